import os
import subprocess
import sys

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from robust_pr import _kernels_py, kernels

compiled = pytest.importorskip("robust_pr._kernels", reason="compiled kernels not built")


def problem(seed, m, n):
    rng = np.random.default_rng(seed)
    return rng.standard_normal((m, n)), rng.standard_normal(m), rng.standard_normal(n), rng.standard_normal(n)


dims = st.tuples(st.integers(0, 2**31), st.integers(1, 40), st.integers(1, 8), st.sampled_from([1, 2]))


@given(dims)
def test_forward_and_diff_parity(args):
    seed, m, n, p = args
    A, b, x, y = problem(seed, m, n)
    np.testing.assert_allclose(compiled.forward_map(A, x, p), _kernels_py.forward_map(A, x, p), rtol=1e-13, atol=1e-13)
    np.testing.assert_allclose(
        compiled.abs_power_diff(A, x, y, p), _kernels_py.abs_power_diff(A, x, y, p), rtol=1e-12, atol=1e-12
    )


@given(dims)
def test_objective_subgradient_parity(args):
    seed, m, n, p = args
    A, b, x, _ = problem(seed, m, n)
    f1, g1 = compiled.objective_subgradient(A, b, x, p)
    f2, g2 = _kernels_py.objective_subgradient(A, b, x, p)
    assert f1 == pytest.approx(f2, rel=1e-12)
    assert compiled.objective(A, b, x, p) == pytest.approx(f2, rel=1e-12)
    np.testing.assert_allclose(g1, g2, rtol=1e-10, atol=1e-10)


@given(st.integers(0, 2**31), st.integers(1, 60), st.booleans())
def test_split_top_parity(seed, m, ties):
    rng = np.random.default_rng(seed)
    v = rng.standard_normal(m)
    if ties:
        v = np.round(v)
    for L in {0, 1, m // 2, m - 1, m}:
        a = compiled.split_top(v, L)
        b = _kernels_py.split_top(v, L)
        np.testing.assert_allclose(a, b, rtol=1e-12, atol=1e-12)


def test_sign_symmetry_is_bit_exact_compiled():
    A, b, x, _ = problem(0, 50, 6)
    f1, g1 = compiled.objective_subgradient(A, b, x, 2)
    f2, g2 = compiled.objective_subgradient(A, b, -x, 2)
    assert f1 == f2 and np.array_equal(g1, -g2)


def test_backend_reported():
    assert kernels.BACKEND in ("cython", "python")


def test_pure_env_forces_fallback():
    env = dict(os.environ, ROBUST_PR_PURE="1")
    out = subprocess.run(
        [sys.executable, "-c", "from robust_pr import kernels; print(kernels.BACKEND)"],
        env=env, capture_output=True, text=True, check=True,
    )
    assert out.stdout.strip() == "python"


def test_wrappers_accept_non_contiguous():
    A, b, x, _ = problem(1, 20, 4)
    At = np.asfortranarray(A)
    assert kernels.objective(At, b, x, 2) == pytest.approx(kernels.objective(A, b, x, 2), rel=1e-14)
