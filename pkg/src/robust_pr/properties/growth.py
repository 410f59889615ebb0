"""Empirical growth constants: how ``(1/m)|| |Ax|^p - |Ay|^p ||_1`` compares
with the sign-invariant distance ``phi_p(x, y)``.
"""
import math
from dataclasses import dataclass, field

import numpy as np

from .. import kernels
from ..core import _check_Ax, as_matrix, check_p, phi
from .sampling import local_search, stratified_pairs

SQRT_2_OVER_PI = math.sqrt(2.0 / math.pi)


def agp_ratio(A, x, y, p):
    """``|| |Ax|^p - |Ay|^p ||_1 / (m * phi_p(x, y))``."""
    p = check_p(p)
    A, x = _check_Ax(A, x)
    dist = phi(x, y, p)
    if dist == 0.0:
        raise ValueError("ratio undefined at sign pair")
    r = kernels.abs_power_diff(A, x, np.asarray(y, dtype=np.float64), p)
    return float(np.abs(r).sum()) / (A.shape[0] * dist)


def predicted_agp_constants(p, epsilon):
    """Lower and upper growth constants at deviation level ``epsilon``."""
    p = check_p(p)
    if p == 2:
        return 0.9 * (1 - epsilon), math.sqrt(2) * (1 + epsilon)
    return SQRT_2_OVER_PI * (2 - math.sqrt(2) - epsilon), SQRT_2_OVER_PI * (1 + epsilon)


@dataclass
class AgpBand:
    p: int
    mu1_hat: float
    mu2_hat: float
    mu1_pred: float
    mu2_pred: float
    witness_min: tuple
    witness_max: tuple
    num_pairs: int
    epsilon: float
    pair_ratios: list = field(default_factory=list)

    @property
    def ratio_ok(self):
        """Whether ``mu2_hat < 2 * mu1_hat``, as the growth definition requires."""
        return self.mu2_hat < 2 * self.mu1_hat

    def to_dict(self):
        return {
            "p": self.p,
            "mu1_hat": self.mu1_hat,
            "mu2_hat": self.mu2_hat,
            "mu1_pred": self.mu1_pred,
            "mu2_pred": self.mu2_pred,
            "ratio_ok": self.ratio_ok,
            "witness_min": [w.tolist() for w in self.witness_min],
            "witness_max": [w.tolist() for w in self.witness_max],
            "num_pairs": self.num_pairs,
            "epsilon": self.epsilon,
            "pair_ratios": list(self.pair_ratios),
        }


def estimate_agp_band(A, p, num_pairs, seed, epsilon, refine_steps=100):
    """Empirical min/max of ``agp_ratio`` over stratified pairs.

    The extreme pairs are then pushed further by ``refine_steps`` steps of
    random local search, so ``mu1_hat``/``mu2_hat`` are attained values, not
    bounds. ``pair_ratios`` keeps the unrefined ratio of every sampled pair.
    """
    p = check_p(p)
    A = as_matrix(A)
    if num_pairs < 1:
        raise ValueError("num_pairs must be at least 1")
    rng = np.random.default_rng(seed)

    def ratio(x, y):
        return agp_ratio(A, x, y, p)

    scored = []
    for x, y in stratified_pairs(A.shape[1], num_pairs, rng):
        try:
            scored.append((ratio(x, y), x, y))
        except ValueError:
            continue
    lo = min(scored, key=lambda s: s[0])
    hi = max(scored, key=lambda s: s[0])
    xl, yl, mu1 = local_search(ratio, lo[1], lo[2], refine_steps, rng, maximize=False)
    xh, yh, mu2 = local_search(ratio, hi[1], hi[2], refine_steps, rng, maximize=True)
    mu1_pred, mu2_pred = predicted_agp_constants(p, epsilon)
    return AgpBand(
        p=p,
        mu1_hat=mu1,
        mu2_hat=mu2,
        mu1_pred=mu1_pred,
        mu2_pred=mu2_pred,
        witness_min=(xl, yl),
        witness_max=(xh, yh),
        num_pairs=num_pairs,
        epsilon=epsilon,
        pair_ratios=[s[0] for s in scored],
    )


def mean_abs_ratio(A, h):
    """``(1/m) sum_i |a_i^T h|`` divided by ``sqrt(2/pi) ||h||``."""
    A, h = _check_Ax(A, h)
    nh = float(np.linalg.norm(h))
    if nh == 0.0:
        raise ValueError("direction must be nonzero")
    return float(np.abs(A @ h).mean()) / (SQRT_2_OVER_PI * nh)


def mean_abs_gauss_check(A, num_dirs, seed, refine_steps=100):
    """Extremes of ``mean_abs_ratio`` over random unit directions.

    Returns ``(min_ratio, max_ratio)``; both equal 1 in expectation for
    Gaussian ``A``.
    """
    A = as_matrix(A)
    if num_dirs < 1:
        raise ValueError("num_dirs must be at least 1")
    rng = np.random.default_rng(seed)
    n = A.shape[1]
    H = rng.standard_normal((num_dirs, n))
    H /= np.linalg.norm(H, axis=1, keepdims=True)
    vals = np.abs(H @ A.T).mean(axis=1) / SQRT_2_OVER_PI

    def fun(h, _unused):
        return mean_abs_ratio(A, h)

    dummy = np.zeros(n)
    h_lo = H[int(np.argmin(vals))]
    h_hi = H[int(np.argmax(vals))]
    _, _, lo = local_search(fun, h_lo, dummy, refine_steps, rng, maximize=False)
    _, _, hi = local_search(fun, h_hi, dummy, refine_steps, rng, maximize=True)
    return min(lo, float(vals.min())), max(hi, float(vals.max()))
