import numpy as np
import pytest

from robust_pr.core import eval_objective
from robust_pr.instances import CorruptionSpec, plant_instance
from robust_pr.properties import predicted_sharpness, sharpness_scan
from robust_pr.properties.sharpness import probe_points, sharpness_ratio

SPEC = CorruptionSpec(0.02)


@pytest.mark.parametrize("p", [1, 2])
def test_positive_on_planted(p):
    for seed in range(20):
        inst = plant_instance(500, 10, p, SPEC, seed=seed)
        rep = sharpness_scan(inst, None, 0.1, 90, seed)
        assert rep.mu_hat > 0 and rep.mu_pred is None
        assert rep.min_gap > 0


def test_double_signal_probe():
    inst = plant_instance(200, 5, 2, SPEC, seed=1)
    x = 2 * inst.xstar
    expected = (eval_objective(inst.A, inst.b, x, 2) - inst.fstar()) / (inst.m * np.linalg.norm(inst.xstar))
    assert sharpness_ratio(inst, x) == pytest.approx(expected, rel=1e-14)
    assert 0 < expected < np.inf


def test_probe_layout():
    rng = np.random.default_rng(0)
    xs = np.array([3.0, 4.0])
    probes = probe_points(xs, 90, rng)
    assert len(probes) == 90
    d = [min(np.linalg.norm(x - xs), np.linalg.norm(x + xs)) for x in probes[:80]]
    for k, c in enumerate((0.01, 0.1, 1.0, 10.0)):
        # first group of each radius is centered at +x*
        np.testing.assert_allclose(np.linalg.norm(np.array(probes[20 * k:20 * k + 10]) - xs, axis=1), c * 5.0)
        np.testing.assert_allclose(np.linalg.norm(np.array(probes[20 * k + 10:20 * k + 20]) + xs, axis=1), c * 5.0)
    assert min(d) > 0


def test_prediction_formula():
    assert predicted_sharpness(2, 0.5, 0.1, 2.0) == pytest.approx(0.45 * np.sqrt(2) * 0.9 * 2 / 3)
    assert predicted_sharpness(1, 0.5, 0.1, 7.0) == pytest.approx(
        np.sqrt(2 / np.pi) * (2 - np.sqrt(2) - 0.1) / 3)


def test_needs_planted_signal():
    from robust_pr.instances import instance_from_arrays
    with pytest.raises(ValueError):
        sharpness_scan(instance_from_arrays(np.eye(2), np.ones(2), 2), None, 0.1, 10, 0)


def test_report_serializes():
    inst = plant_instance(100, 3, 2, SPEC, seed=0)
    d = sharpness_scan(inst, 0.3, 0.1, 20, 0).to_dict()
    assert d["num_probes"] == 20 and d["mu_pred"] is not None
