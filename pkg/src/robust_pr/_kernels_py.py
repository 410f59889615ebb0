"""Pure numpy versions of the compiled kernels in ``_kernels.pyx``.

Each function has the same signature and contract as its compiled twin; the
two agree to floating-point rounding, not bit for bit.
"""
import numpy as np


def _powp(t, p):
    return t * t if p == 2 else np.abs(t)


def forward_map(A, x, p):
    return _powp(A @ x, p)


def objective(A, b, x, p):
    return float(np.abs(_powp(A @ x, p) - b).sum())


def objective_subgradient(A, b, x, p):
    t = A @ x
    r = _powp(t, p) - b
    if p == 2:
        coef = np.sign(r) * 2.0 * t
    else:
        coef = np.sign(r) * np.sign(t)
    return float(np.abs(r).sum()), coef @ A


def abs_power_diff(A, x, y, p):
    return _powp(A @ x, p) - _powp(A @ y, p)


def split_top(values, L):
    mags = np.sort(np.abs(values))[::-1]
    return float(mags[:L].sum()), float(mags[L:].sum())
