"""Backend selection for the hot kernels.

The compiled extension is used when it imports; otherwise the numpy fallback.
Setting ``ROBUST_PR_PURE=1`` forces the fallback.
"""
import os

import numpy as np

from . import _kernels_py

if os.environ.get("ROBUST_PR_PURE", "") not in ("", "0"):
    _impl = _kernels_py
    BACKEND = "python"
else:
    try:
        from . import _kernels as _impl
        BACKEND = "cython"
    except ImportError:  # extension not built
        _impl = _kernels_py
        BACKEND = "python"


def _f64(a):
    return np.ascontiguousarray(a, dtype=np.float64)


def forward_map(A, x, p):
    return _impl.forward_map(_f64(A), _f64(x), int(p))


def objective(A, b, x, p):
    return float(_impl.objective(_f64(A), _f64(b), _f64(x), int(p)))


def objective_subgradient(A, b, x, p):
    f, g = _impl.objective_subgradient(_f64(A), _f64(b), _f64(x), int(p))
    return float(f), g


def abs_power_diff(A, x, y, p):
    return _impl.abs_power_diff(_f64(A), _f64(x), _f64(y), int(p))


def split_top(values, L):
    top, tail = _impl.split_top(_f64(values), int(L))
    return float(top), float(tail)
