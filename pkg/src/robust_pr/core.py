"""Objectives, subgradients and sign-invariant distances.

Signals and sensing matrices are plain float64 numpy arrays; the helpers here
validate shapes and finiteness once at the boundary. The exponent ``p`` picks
between magnitude (``p=1``) and squared-magnitude (``p=2``) measurements.

All objective values are the unnormalized sum over the ``m`` rows; divide by
``A.shape[0]`` for the per-measurement average.
"""
from dataclasses import dataclass

import numpy as np

from . import kernels


class DimensionError(ValueError):
    """Array shapes do not agree."""


@dataclass(frozen=True)
class MeasurementModel:
    """Exponent of the measurement map ``x -> |Ax|^p``."""

    p: int

    def __post_init__(self):
        if isinstance(self.p, bool) or self.p not in (1, 2):
            raise ValueError(f"measurement exponent must be 1 or 2, got {self.p!r}")


def check_p(p):
    """Return ``p`` as an int after validating it (accepts a MeasurementModel)."""
    if isinstance(p, MeasurementModel):
        return p.p
    return MeasurementModel(p).p


def as_signal(x, name="x"):
    x = np.asarray(x, dtype=np.float64)
    if x.ndim != 1 or x.size < 1:
        raise DimensionError(f"{name} must be a nonempty 1-d vector, got shape {x.shape}")
    if not np.all(np.isfinite(x)):
        raise ValueError(f"{name} has nonfinite entries")
    return x


def as_matrix(A):
    A = np.asarray(A, dtype=np.float64)
    if A.ndim != 2 or A.shape[0] < 1 or A.shape[1] < 1:
        raise DimensionError(f"sensing matrix must be 2-d and nonempty, got shape {A.shape}")
    if not np.all(np.isfinite(A)):
        raise ValueError("sensing matrix has nonfinite entries")
    return A


def _check_Ax(A, x):
    A = as_matrix(A)
    x = as_signal(x)
    if A.shape[1] != x.shape[0]:
        raise DimensionError(f"A has {A.shape[1]} columns but x has length {x.shape[0]}")
    return A, x


def _check_Abx(A, b, x):
    A, x = _check_Ax(A, x)
    b = np.asarray(b, dtype=np.float64)
    if b.shape != (A.shape[0],):
        raise DimensionError(f"b must have shape ({A.shape[0]},), got {b.shape}")
    if not np.all(np.isfinite(b)):
        raise ValueError("measurements have nonfinite entries")
    return A, b, x


def _check_pair(x, y):
    x = as_signal(x, "x")
    y = as_signal(y, "y")
    if x.shape != y.shape:
        raise DimensionError(f"length mismatch: {x.shape[0]} vs {y.shape[0]}")
    return x, y


def forward_map(A, x, p):
    """Componentwise ``|a_i^T x|^p``."""
    A, x = _check_Ax(A, x)
    return kernels.forward_map(A, x, check_p(p))


def residual(A, b, x, p):
    """``|Ax|^p - b``."""
    A, b, x = _check_Abx(A, b, x)
    return kernels.forward_map(A, x, check_p(p)) - b


def eval_objective(A, b, x, p):
    """``f_p(x) = sum_i | |a_i^T x|^p - b_i |`` (unnormalized)."""
    A, b, x = _check_Abx(A, b, x)
    return kernels.objective(A, b, x, check_p(p))


def subgradient(A, b, x, p):
    """A Clarke subgradient of ``f_p`` at ``x``, with ``sign(0) = 0`` at kinks."""
    A, b, x = _check_Abx(A, b, x)
    return kernels.objective_subgradient(A, b, x, check_p(p))[1]


def objective_and_subgradient(A, b, x, p):
    """Both of the above in one pass over the rows."""
    A, b, x = _check_Abx(A, b, x)
    return kernels.objective_subgradient(A, b, x, check_p(p))


def phi(x, y, p):
    """Sign-invariant distance between ``x`` and ``y``.

    ``p=1``: ``min(||x+y||, ||x-y||)``.
    ``p=2``: ``||xx^T - yy^T||_F``, evaluated in O(n) as
    ``sqrt((||u||^2 ||v||^2 + (u^T v)^2) / 2)`` with ``u = x+y``, ``v = x-y``.
    Every term is nonnegative, so there is no cancellation near ``x = +-y``.
    """
    x, y = _check_pair(x, y)
    p = check_p(p)
    u = x + y
    v = x - y
    if p == 1:
        return float(min(np.linalg.norm(u), np.linalg.norm(v)))
    uu = float(u @ u)
    vv = float(v @ v)
    uv = float(u @ v)
    return float(np.sqrt(0.5 * (uu * vv + uv * uv)))


def dist_to_sign_pair(x, xstar):
    """``min(||x - x*||, ||x + x*||)``."""
    x, xstar = _check_pair(x, xstar)
    return float(min(np.linalg.norm(x - xstar), np.linalg.norm(x + xstar)))


def top_indices(values, L):
    """Indices of the ``L`` largest ``|values|``; ties go to the lowest index."""
    values = np.asarray(values, dtype=np.float64)
    if not 0 <= L <= values.shape[0]:
        raise ValueError(f"L must lie in [0, {values.shape[0]}], got {L}")
    order = np.argsort(-np.abs(values), kind="stable")
    return np.sort(order[:L])


def sigma_tail_of(values, L):
    """l1 mass of ``values`` outside its ``L`` largest-magnitude entries."""
    values = np.asarray(values, dtype=np.float64)
    if not 0 <= L <= values.shape[0]:
        raise ValueError(f"L must lie in [0, {values.shape[0]}], got {L}")
    return kernels.split_top(values, L)[1]


def sigma_tail(A, b, x, L, p):
    """Residual l1 mass outside the ``L`` largest residual entries.

    Zero exactly when the residual ``|Ax|^p - b`` has at most ``L`` nonzeros.
    """
    return sigma_tail_of(residual(A, b, x, p), L)


def residual_l0(A, b, x, p, rel_threshold=1e-8):
    """Count of residual entries above ``rel_threshold * max|b|``."""
    r = residual(A, b, x, p)
    scale = float(np.max(np.abs(b))) if b.size else 0.0
    return int(np.count_nonzero(np.abs(r) > rel_threshold * scale))
