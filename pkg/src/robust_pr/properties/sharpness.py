"""Empirical sharpness of the robust objective around ``{x*, -x*}``."""
import math
from dataclasses import dataclass

import numpy as np

from .. import kernels
from ..core import dist_to_sign_pair, check_p
from .arp import reverse_triangle_check

PROBE_RADII = (0.01, 0.1, 1.0, 10.0)
MIN_PROBE_DIST = 1e-10


def predicted_sharpness(p, psi, epsilon, xstar_norm):
    p = check_p(p)
    factor = (1 - psi) / (1 + psi)
    if p == 2:
        return factor * 0.45 * math.sqrt(2) * (1 - epsilon) * xstar_norm
    return factor * math.sqrt(2 / math.pi) * (2 - math.sqrt(2) - epsilon)


def probe_points(xstar, num_probes, rng):
    """Probes on spheres of radius ``c ||x*||`` around ``x*`` and ``-x*`` for
    each ``c`` in ``PROBE_RADII``, plus uniform points in the ball of radius
    ``3 ||x*||``; ``num_probes`` are split evenly across the nine groups.
    """
    n = xstar.shape[0]
    nx = float(np.linalg.norm(xstar))
    groups = [(sign, c) for c in PROBE_RADII for sign in (1.0, -1.0)]
    per = max(1, -(-num_probes // (len(groups) + 1)))
    probes = []
    for sign, c in groups:
        H = rng.standard_normal((per, n))
        H *= (c * nx) / np.linalg.norm(H, axis=1, keepdims=True)
        probes.extend(sign * xstar + H)
    H = rng.standard_normal((per, n))
    H *= (3 * nx * rng.random((per, 1)) ** (1.0 / n)) / np.linalg.norm(H, axis=1, keepdims=True)
    probes.extend(H)
    return probes[:num_probes] if len(probes) > num_probes else probes


@dataclass
class SharpnessReport:
    p: int
    mu_hat: float
    mu_pred: float
    worst_probe: np.ndarray
    num_probes: int
    num_certified: int
    min_gap: float

    def to_dict(self):
        return {
            "p": self.p,
            "mu_hat": self.mu_hat,
            "mu_pred": self.mu_pred,
            "worst_probe": self.worst_probe.tolist(),
            "num_probes": self.num_probes,
            "num_certified": self.num_certified,
            "min_gap": self.min_gap,
        }


def sharpness_ratio(instance, x, fstar=None):
    """``(f(x) - f(x*)) / (m dist(x, {x*, -x*}))``."""
    fstar = instance.fstar() if fstar is None else fstar
    d = dist_to_sign_pair(x, instance.xstar)
    f = kernels.objective(instance.A, instance.b, x, instance.p)
    return (f - fstar) / (instance.m * d)


def sharpness_scan(instance, psi_hat, epsilon, num_probes, seed):
    """Smallest sharpness ratio over probe points.

    Each probe is also run through ``reverse_triangle_check`` against ``x*``
    when ``psi_hat`` lies in ``(0, 1)``; ``num_certified`` counts passes.
    ``mu_pred`` is ``None`` unless ``psi_hat`` lies in ``(0, 1)``.
    ``min_gap`` is the smallest ``f(probe) - f(x*)``.
    """
    if instance.xstar is None:
        raise ValueError("sharpness needs a planted signal")
    rng = np.random.default_rng(seed)
    xstar = instance.xstar
    fstar = instance.fstar()
    use_psi = psi_hat is not None and 0.0 < psi_hat < 1.0
    mu_hat, worst, certified, min_gap, used = math.inf, None, 0, math.inf, 0
    for x in probe_points(xstar, num_probes, rng):
        if dist_to_sign_pair(x, xstar) < MIN_PROBE_DIST:
            continue
        used += 1
        gap = kernels.objective(instance.A, instance.b, x, instance.p) - fstar
        min_gap = min(min_gap, gap)
        ratio = sharpness_ratio(instance, x, fstar)
        if ratio < mu_hat:
            mu_hat, worst = ratio, x
        if use_psi:
            chk = reverse_triangle_check(
                instance.A, instance.b, x, xstar, instance.L, psi_hat, instance.p
            )
            certified += chk.passed
    mu_pred = None
    if use_psi:
        mu_pred = predicted_sharpness(
            instance.p, psi_hat, epsilon, float(np.linalg.norm(xstar))
        )
    return SharpnessReport(
        p=instance.p,
        mu_hat=mu_hat,
        mu_pred=mu_pred,
        worst_probe=worst,
        num_probes=used,
        num_certified=certified,
        min_gap=min_gap,
    )
