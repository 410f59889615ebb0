import math

import numpy as np
import pytest
from scipy import integrate

from robust_pr.instances import sample_matrix
from robust_pr.properties import (
    agp_ratio,
    estimate_agp_band,
    mean_abs_gauss_check,
    mean_abs_ratio,
    predicted_agp_constants,
)

SQ2PI = math.sqrt(2 / math.pi)


@pytest.fixture(scope="module")
def big():
    return sample_matrix(20000, 5, 0)


def test_zero_partner_p2(big):
    x = np.array([1.0, -2.0, 0.5, 0.0, 1.0])
    assert abs(agp_ratio(big, x, np.zeros(5), 2) - 1.0) <= 0.03


def test_zero_partner_p1(big):
    x = np.array([0.3, 1.0, -1.0, 2.0, 0.0])
    assert abs(agp_ratio(big, x, np.zeros(5), 1) - SQ2PI) <= 0.02


def test_orthonormal_p2(big):
    # E|Z1^2 - Z2^2| = E|2UV| = 2 (E|Z|)^2 = 4/pi
    assert abs(agp_ratio(big, np.eye(5)[0], np.eye(5)[1], 2) - 4 / (math.pi * math.sqrt(2))) <= 0.02


def test_orthonormal_p1_is_lower_constant(big):
    # oracle: quadrature of E||Z1| - |Z2|| over the positive quadrant
    f = lambda y, x: abs(x - y) * math.exp(-(x * x + y * y) / 2) / (2 * math.pi)
    val, _ = integrate.dblquad(f, 0, 12, 0, 12, epsabs=1e-10)
    expected = 4 * val / math.sqrt(2)
    assert expected == pytest.approx(SQ2PI * (2 - math.sqrt(2)), abs=1e-6)
    assert abs(agp_ratio(big, np.eye(5)[0], np.eye(5)[1], 1) - expected) <= 0.02


@pytest.mark.parametrize("p", [1, 2])
def test_sign_pair_undefined(p):
    A = np.eye(3)
    x = np.array([1.0, 2.0, 3.0])
    with pytest.raises(ValueError, match="ratio undefined at sign pair"):
        agp_ratio(A, x, -x, p)


def test_predicted_constants():
    assert predicted_agp_constants(2, 0.1) == pytest.approx((0.81, math.sqrt(2) * 1.1))
    lo, hi = predicted_agp_constants(1, 0.1)
    assert lo == pytest.approx(SQ2PI * (2 - math.sqrt(2) - 0.1))
    assert hi == pytest.approx(SQ2PI * 1.1)


@pytest.mark.parametrize("p", [1, 2])
def test_band_at_moderate_size(p):
    A = sample_matrix(5000, 10, 1)
    band = estimate_agp_band(A, p, 60, seed=1, epsilon=0.1)
    assert 0 <= band.mu1_hat <= band.mu2_hat
    if p == 2:
        assert band.mu1_hat >= 0.9 * 0.9 and band.mu2_hat <= math.sqrt(2) * 1.1
    else:
        assert band.mu1_hat >= SQ2PI * (2 - math.sqrt(2)) * 0.9
        assert band.mu2_hat <= SQ2PI * 1.1
    assert band.ratio_ok
    assert (band.mu1_pred, band.mu2_pred) == predicted_agp_constants(p, 0.1)


@pytest.mark.parametrize("p", [1, 2])
def test_witnesses_reproduce(p):
    A = sample_matrix(300, 4, 2)
    band = estimate_agp_band(A, p, 30, seed=5, epsilon=0.1)
    assert abs(agp_ratio(A, *band.witness_min, p) - band.mu1_hat) <= 1e-12
    assert abs(agp_ratio(A, *band.witness_max, p) - band.mu2_hat) <= 1e-12
    assert band.mu1_hat <= min(band.pair_ratios) and band.mu2_hat >= max(band.pair_ratios)


def test_band_deterministic_and_serializable():
    A = sample_matrix(200, 3, 0)
    a = estimate_agp_band(A, 2, 12, seed=3, epsilon=0.05)
    b = estimate_agp_band(A, 2, 12, seed=3, epsilon=0.05)
    assert a.to_dict() == b.to_dict()
    assert set(a.to_dict()) >= {"mu1_hat", "mu2_hat", "mu1_pred", "mu2_pred", "witness_min", "witness_max"}


def test_band_needs_pairs():
    with pytest.raises(ValueError):
        estimate_agp_band(np.eye(3), 2, 0, seed=0, epsilon=0.1)


def test_mean_abs_single_row():
    A = np.array([[1.0, 0.0, 0.0]])
    h = np.array([0.6, 0.0, 0.8])
    assert mean_abs_ratio(A, h) == pytest.approx(0.6 / SQ2PI, rel=1e-15)


def test_mean_abs_homogeneous(rng):
    A = rng.standard_normal((50, 4))
    h = rng.standard_normal(4)
    assert mean_abs_ratio(A, 2 * h) == pytest.approx(mean_abs_ratio(A, h), rel=1e-14)


def test_mean_abs_check_band():
    A = sample_matrix(20000, 20, 3)
    lo, hi = mean_abs_gauss_check(A, 20, seed=3)
    assert 0.95 <= lo <= hi <= 1.05


def test_mean_abs_check_validation():
    with pytest.raises(ValueError):
        mean_abs_gauss_check(np.eye(2), 0, seed=0)
