"""Absolute range estimates and the reverse-triangle certificate.

For a pair ``(x, y)`` let ``r = |Ax|^p - |Ay|^p``. The ratio
``||r_T||_1 / ||r_{T^c}||_1`` over index sets of size ``L`` is largest when
``T`` holds the ``L`` largest ``|r_i|``, so the per-pair supremum over ``T`` is
computed exactly. The supremum over pairs is not: ``estimate_arp_psi``
returns an attained value, i.e. a lower bound on the true constant.
"""
import math
from dataclasses import dataclass, field

import numpy as np

from .. import kernels
from ..core import _check_Abx, _check_Ax, as_matrix, check_p, top_indices
from .sampling import local_search, stratified_pairs

# the largest epsilon for which the p=2 constant 0.9(1-eps) still exceeds
# sqrt(2)(1+eps)/2, i.e. the growth band ratio stays below 2
EPS_MAX_P2 = (1.8 - math.sqrt(2)) / (1.8 + math.sqrt(2))


def _check_L(L, m):
    if not 1 <= L < m:
        raise ValueError(f"L must satisfy 1 <= L < m={m}, got {L}")


def arp_ratio_exact_T(A, x, y, L, p):
    """``max_{|T|=L} ||r_T||_1 / ||r_{T^c}||_1``; ``inf`` when the tail is zero."""
    p = check_p(p)
    A, x = _check_Ax(A, x)
    _check_L(L, A.shape[0])
    r = kernels.abs_power_diff(A, x, np.asarray(y, dtype=np.float64), p)
    top, tail = kernels.split_top(r, L)
    if tail == 0.0:
        return math.inf
    return top / tail


def arp_ratio_at(A, x, y, T, p):
    """``||r_T||_1 / ||r_{T^c}||_1`` for a given index set ``T``."""
    p = check_p(p)
    A, x = _check_Ax(A, x)
    r = np.abs(kernels.abs_power_diff(A, x, np.asarray(y, dtype=np.float64), p))
    mask = np.zeros(r.shape[0], dtype=bool)
    mask[np.asarray(T, dtype=np.int64)] = True
    tail = float(r[~mask].sum())
    if tail == 0.0:
        return math.inf
    return float(r[mask].sum()) / tail


@dataclass(frozen=True)
class PsiPrediction:
    psi: float
    below_one: bool


def s_bound_p1(epsilon):
    """Largest corruption fraction for which the ``p=1`` prediction is admissible."""
    return 1.0 - (1 + epsilon) / (2 * (2 - math.sqrt(2)) * (1 - epsilon))


def predicted_psi(p, epsilon, s):
    """Range constant predicted from growth constants at level ``epsilon``
    and corruption fraction ``s``.

    Raises
    ------
    ValueError
        If ``epsilon`` or ``s`` is outside the admissible region; the message
        names the violated bound.
    """
    p = check_p(p)
    if not 0.0 <= s < 1.0:
        raise ValueError(f"s must lie in [0, 1), got {s}")
    if p == 2:
        if not 0.0 < epsilon < EPS_MAX_P2:
            raise ValueError(
                f"epsilon bound violated: need 0 < epsilon < (1.8-sqrt2)/(1.8+sqrt2)"
                f" = {EPS_MAX_P2:.6f}, got {epsilon}"
            )
        lo = 0.9 * (1 - epsilon) * (1 - s)
        psi = (math.sqrt(2) * (1 + epsilon) - lo) / lo
    else:
        if not 0.0 < epsilon < 1.0:
            raise ValueError(f"epsilon bound violated: need 0 < epsilon < 1, got {epsilon}")
        bound = s_bound_p1(epsilon)
        if not 0.0 < s < bound:
            raise ValueError(
                "s bound violated: need 0 < s < 1 - (1+eps)/(2(2-sqrt2)(1-eps))"
                f" = {bound:.6f}, got {s}"
            )
        lo = (2 - math.sqrt(2)) * (1 - epsilon) * (1 - s)
        psi = ((1 + epsilon) - lo) / lo
    return PsiPrediction(psi=psi, below_one=psi < 1.0)


@dataclass
class ArpReport:
    p: int
    L: int
    psi_hat: float
    psi_pred: float
    witness: tuple
    num_pairs: int
    ascent_steps: int
    pair_ratios: list = field(default_factory=list)

    def to_dict(self):
        return {
            "p": self.p,
            "L": self.L,
            "psi_hat": self.psi_hat,
            "psi_pred": self.psi_pred,
            "witness": [w.tolist() for w in self.witness],
            "num_pairs": self.num_pairs,
            "ascent_steps": self.ascent_steps,
            "pair_ratios": list(self.pair_ratios),
        }


def estimate_arp_psi(A, L, p, num_pairs, ascent_steps, seed, epsilon=None):
    """Largest attained range ratio over stratified pairs, each pushed uphill
    by ``ascent_steps`` coordinatewise random moves.

    ``psi_pred`` is filled from ``predicted_psi(p, epsilon, L/m)`` when
    ``epsilon`` is given and admissible, else left as ``None``.
    """
    p = check_p(p)
    A = as_matrix(A)
    m, n = A.shape
    _check_L(L, m)
    if num_pairs < 1:
        raise ValueError("num_pairs must be at least 1")
    rng = np.random.default_rng(seed)

    def ratio(x, y):
        return arp_ratio_exact_T(A, x, y, L, p)

    best = (-1.0, None, None)
    pair_ratios = []
    for x, y in stratified_pairs(n, num_pairs, rng):
        pair_ratios.append(ratio(x, y))
        xr, yr, val = local_search(
            ratio, x, y, ascent_steps, rng, maximize=True, coordinatewise=True
        )
        if val > best[0]:
            best = (val, xr, yr)

    psi_pred = None
    if epsilon is not None:
        try:
            psi_pred = predicted_psi(p, epsilon, L / m).psi
        except ValueError:
            psi_pred = None
    return ArpReport(
        p=p,
        L=L,
        psi_hat=best[0],
        psi_pred=psi_pred,
        witness=(best[1], best[2]),
        num_pairs=num_pairs,
        ascent_steps=ascent_steps,
        pair_ratios=pair_ratios,
    )


@dataclass(frozen=True)
class TriangleCheck:
    passed: bool
    lhs: float
    rhs: float
    slack: float
    arp_ratio: float
    arp_holds: bool


def reverse_triangle_check(A, b, x, y, L, psi, p):
    """Compare ``|| |Ax|^p - |Ay|^p ||_1`` with
    ``(1+psi)/(1-psi) (f(x) - f(y) + 2 sigma_L(y))``.

    ``arp_ratio`` is the range ratio of the pair at ``T`` = top-``L`` entries
    of ``y``'s residual, the set the bound is derived with; ``arp_holds``
    says whether it is at most ``psi``, in which case the bound is guaranteed.
    """
    p = check_p(p)
    if not 0.0 < psi < 1.0:
        raise ValueError(f"psi must lie in (0, 1), got {psi}")
    A, b, x = _check_Abx(A, b, x)
    y = np.asarray(y, dtype=np.float64)
    ry = kernels.forward_map(A, y, p) - b
    T = top_indices(ry, L)
    tail_y = kernels.split_top(ry, L)[1]
    lhs = float(np.abs(kernels.abs_power_diff(A, x, y, p)).sum())
    fx = kernels.objective(A, b, x, p)
    fy = float(np.abs(ry).sum())
    rhs = (1 + psi) / (1 - psi) * (fx - fy + 2 * tail_y)
    arp = arp_ratio_at(A, x, y, T, p)
    return TriangleCheck(
        passed=lhs <= rhs + 1e-9 * abs(rhs),
        lhs=lhs,
        rhs=rhs,
        slack=rhs - lhs,
        arp_ratio=arp,
        arp_holds=arp <= psi,
    )


def recovery_bound_check(A, b, x, xstar, L, psi, p):
    """``|| |Ax|^p - |Ax*|^p ||_1 <= 2(1+psi)/(1-psi) sigma_L(x)``.

    Follows from the reverse-triangle bound with the roles of ``x`` and
    ``x*`` swapped whenever ``f(x*) <= f(x)``.
    """
    p = check_p(p)
    if not 0.0 < psi < 1.0:
        raise ValueError(f"psi must lie in (0, 1), got {psi}")
    A, b, x = _check_Abx(A, b, x)
    rx = kernels.forward_map(A, x, p) - b
    lhs = float(np.abs(kernels.abs_power_diff(A, x, np.asarray(xstar, dtype=np.float64), p)).sum())
    rhs = 2 * (1 + psi) / (1 - psi) * kernels.split_top(rx, L)[1]
    T = top_indices(rx, L)
    arp = arp_ratio_at(A, xstar, x, T, p)
    return TriangleCheck(
        passed=lhs <= rhs + 1e-9 * abs(rhs),
        lhs=lhs,
        rhs=rhs,
        slack=rhs - lhs,
        arp_ratio=arp,
        arp_holds=arp <= psi,
    )
