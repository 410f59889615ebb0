"""The angular integral ``e(s) = E|Z_1^2 - s Z_2^2|^{1/2}`` and its
normalized curves over ``s in [-1, 1]``.

Writing ``(Z_1, Z_2)`` in polar form integrates out the radius and leaves

    e(s) = (1 / (2 sqrt(2 pi))) int_0^{2 pi} |cos^2 t - s sin^2 t|^{1/2} dt.

The integrand has period ``pi`` and is even about ``0`` and ``pi/2``, so the
full integral is four times the one over ``[0, pi/2]``. For ``s > 0`` it
vanishes with a square-root kink at ``tan^2 t = 1/s``; integrating the two
panels on either side separately keeps the adaptive rule in its fast regime.
"""
import csv
import math
from dataclasses import dataclass

import numpy as np
from scipy import integrate

NORM = 1.0 / (2.0 * math.sqrt(2.0 * math.pi))


@dataclass(frozen=True)
class ECurvePoint:
    s: float
    e_s: float
    ratio_F: float
    ratio_sqrtF: float
    error: float

    def to_dict(self):
        return {
            "s": self.s,
            "e_s": self.e_s,
            "ratio_F": self.ratio_F,
            "ratio_sqrtF": self.ratio_sqrtF,
            "error": self.error,
        }


def _integrand(theta, s):
    c, sn = math.cos(theta), math.sin(theta)
    return math.sqrt(abs(c * c - s * sn * sn))


def e_of_s(s, tol=1e-10):
    """Evaluate ``e(s)`` to absolute error ``tol`` with both normalizations.

    ``ratio_F`` divides by ``||M||_F = sqrt(1+s^2)`` and ``ratio_sqrtF`` by
    ``sqrt(||M||_F)``, where ``M = diag(1, -s)``.
    """
    s = float(s)
    if not -1.0 <= s <= 1.0:
        raise ValueError(f"s must lie in [-1, 1], got {s}")
    if not tol > 0:
        raise ValueError(f"tol must be positive, got {tol}")
    edges = [0.0, math.pi / 2]
    if s > 0:
        edges.insert(1, math.atan(1.0 / math.sqrt(s)))
    # error budget in integral units, shared across panels
    budget = tol / (4 * NORM) / (len(edges) - 1)
    total, err = 0.0, 0.0
    for a, b in zip(edges[:-1], edges[1:]):
        val, est = integrate.quad(
            _integrand, a, b, args=(s,), epsabs=0.25 * budget, epsrel=0.0, limit=200
        )
        total += val
        err += est
    e_s = 4 * NORM * total
    error = 4 * NORM * err
    if not error < tol:
        raise RuntimeError(f"quadrature did not reach tol={tol} at s={s} (estimate {error:.3g})")
    return ECurvePoint(
        s=s,
        e_s=e_s,
        ratio_F=e_s / math.sqrt(1 + s * s),
        ratio_sqrtF=e_s / (1 + s * s) ** 0.25,
        error=error,
    )


@dataclass
class ECurveScan:
    points: list
    min_ratio_F: float
    argmin_ratio_F: float
    min_ratio_sqrtF: float
    argmin_ratio_sqrtF: float

    def to_dict(self):
        return {
            "points": [p.to_dict() for p in self.points],
            "min_ratio_F": self.min_ratio_F,
            "argmin_ratio_F": self.argmin_ratio_F,
            "min_ratio_sqrtF": self.min_ratio_sqrtF,
            "argmin_ratio_sqrtF": self.argmin_ratio_sqrtF,
        }


def e_curve_scan(grid_points, tol=1e-10):
    """``e_of_s`` on a uniform grid of ``grid_points`` values in ``[-1, 1]``."""
    if grid_points < 3:
        raise ValueError(f"grid_points must be at least 3, got {grid_points}")
    grid = np.linspace(-1.0, 1.0, grid_points)
    pts = [e_of_s(float(s), tol) for s in grid]
    kF = min(range(len(pts)), key=lambda i: pts[i].ratio_F)
    kS = min(range(len(pts)), key=lambda i: pts[i].ratio_sqrtF)
    return ECurveScan(
        points=pts,
        min_ratio_F=pts[kF].ratio_F,
        argmin_ratio_F=pts[kF].s,
        min_ratio_sqrtF=pts[kS].ratio_sqrtF,
        argmin_ratio_sqrtF=pts[kS].s,
    )


def write_curve_csv(scan, path, which):
    """Two-column ``s,ratio`` CSV for ``which`` in ``{"F", "sqrtF"}``."""
    attr = {"F": "ratio_F", "sqrtF": "ratio_sqrtF"}[which]
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["s", "ratio"])
        for p in scan.points:
            w.writerow([repr(p.s), repr(getattr(p, attr))])
