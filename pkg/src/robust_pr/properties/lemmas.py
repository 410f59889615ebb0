"""Deterministic vector inequalities behind the growth constants, with
vectorized sweeps over many seeded pairs.
"""
import math
from dataclasses import dataclass

import numpy as np

from ..core import _check_pair

SQRT2 = math.sqrt(2.0)
Q_MIN = 2.0 - SQRT2


def sum_diff_terms(x, y):
    """``(lhs, rhs)`` of ``||x+y|| + (sqrt2-1)||x-y|| >= ||x|| + ||y||``."""
    x, y = _check_pair(x, y)
    lhs = np.linalg.norm(x + y) + (SQRT2 - 1) * np.linalg.norm(x - y)
    rhs = np.linalg.norm(x) + np.linalg.norm(y)
    return float(lhs), float(rhs)


def lemma_sum_diff_check(x, y):
    """Check the sum/difference norm inequality for ``x^T y >= 0``."""
    x, y = _check_pair(x, y)
    if float(x @ y) < 0:
        raise ValueError("inequality stated for x^T y >= 0; flip the sign of y")
    lhs, rhs = sum_diff_terms(x, y)
    return lhs >= rhs - 1e-12 * rhs


def rank2_terms(x, y):
    """``(lhs, rhs)`` of ``sqrt2 ||xx^T - yy^T||_F >= ||x+y|| ||x-y||``.

    The Frobenius norm comes from the Gram expansion
    ``||x||^4 + ||y||^4 - 2 (x^T y)^2``.
    """
    x, y = _check_pair(x, y)
    xx, yy, xy = float(x @ x), float(y @ y), float(x @ y)
    frob2 = max(xx * xx + yy * yy - 2 * xy * xy, 0.0)
    lhs = SQRT2 * math.sqrt(frob2)
    rhs = float(np.linalg.norm(x + y) * np.linalg.norm(x - y))
    return lhs, rhs


def lemma_rank2_check(x, y):
    """Check the rank-two Frobenius inequality.

    The tolerance is ``1e-12`` relative to ``||x||^2 + ||y||^2``, the
    magnitude of the terms the Gram expansion cancels.
    """
    x, y = _check_pair(x, y)
    lhs, rhs = rank2_terms(x, y)
    return lhs >= rhs - 1e-12 * float(x @ x + y @ y)


def lemma1_quotient(t, rho):
    """``q(t, rho) = (sqrt(t^2-2 rho t+1) + sqrt(t^2+2 rho t+1) - 1 - t) / sqrt(t^2-2 rho t+1)``."""
    if not (0.0 <= t <= 1.0 and 0.0 <= rho <= 1.0):
        raise ValueError(f"(t, rho) must lie in [0, 1]^2, got ({t}, {rho})")
    minus = t * t - 2 * rho * t + 1
    if minus <= 0.0:
        raise ValueError("denominator is zero at t = rho = 1")
    d = math.sqrt(minus)
    return (d + math.sqrt(t * t + 2 * rho * t + 1) - 1 - t) / d


@dataclass(frozen=True)
class SweepResult:
    name: str
    total: int
    passed: int
    min_slack: float

    @property
    def failed(self):
        return self.total - self.passed


def _pairs(rng, size, n):
    return rng.standard_normal((size, n)), rng.standard_normal((size, n))


def sum_diff_sweep(num_pairs, n=8, seed=0, chunk=100_000):
    """Sum/difference inequality on ``num_pairs`` Gaussian pairs, with ``y``
    flipped where ``x^T y < 0``. ``min_slack`` is relative to ``||x||+||y||``."""
    rng = np.random.default_rng(seed)
    passed, min_slack, done = 0, math.inf, 0
    while done < num_pairs:
        k = min(chunk, num_pairs - done)
        X, Y = _pairs(rng, k, n)
        Y *= np.where(np.einsum("ij,ij->i", X, Y) < 0, -1.0, 1.0)[:, None]
        lhs = np.linalg.norm(X + Y, axis=1) + (SQRT2 - 1) * np.linalg.norm(X - Y, axis=1)
        rhs = np.linalg.norm(X, axis=1) + np.linalg.norm(Y, axis=1)
        passed += int(np.count_nonzero(lhs >= rhs - 1e-12 * rhs))
        min_slack = min(min_slack, float(((lhs - rhs) / rhs).min()))
        done += k
    return SweepResult("sum_diff", num_pairs, passed, min_slack)


def rank2_sweep(num_pairs, n=8, seed=1, chunk=100_000):
    """Rank-two inequality on ``num_pairs`` Gaussian pairs. ``min_slack`` is
    relative to ``||x||^2 + ||y||^2``."""
    rng = np.random.default_rng(seed)
    passed, min_slack, done = 0, math.inf, 0
    while done < num_pairs:
        k = min(chunk, num_pairs - done)
        X, Y = _pairs(rng, k, n)
        xx = np.einsum("ij,ij->i", X, X)
        yy = np.einsum("ij,ij->i", Y, Y)
        xy = np.einsum("ij,ij->i", X, Y)
        lhs = SQRT2 * np.sqrt(np.maximum(xx * xx + yy * yy - 2 * xy * xy, 0.0))
        rhs = np.linalg.norm(X + Y, axis=1) * np.linalg.norm(X - Y, axis=1)
        scale = xx + yy
        passed += int(np.count_nonzero(lhs >= rhs - 1e-12 * scale))
        min_slack = min(min_slack, float(((lhs - rhs) / scale).min()))
        done += k
    return SweepResult("rank2", num_pairs, passed, min_slack)


@dataclass(frozen=True)
class QuotientGrid:
    minimum: float
    t_argmin: float
    rho_argmin: float
    points: int


def quotient_grid(step=1e-3):
    """Minimum of ``q`` over a uniform grid on ``[0,1]^2`` without ``(1, 1)``."""
    k = int(round(1.0 / step))
    g = np.linspace(0.0, 1.0, k + 1)
    t, rho = np.meshgrid(g, g, indexing="ij")
    minus = t * t - 2 * rho * t + 1
    valid = minus > 0
    d = np.sqrt(np.where(valid, minus, 1.0))
    q = (d + np.sqrt(t * t + 2 * rho * t + 1) - 1 - t) / d
    q = np.where(valid, q, np.inf)
    i, j = np.unravel_index(int(np.argmin(q)), q.shape)
    return QuotientGrid(float(q[i, j]), float(g[i]), float(g[j]), int(np.count_nonzero(valid)))
