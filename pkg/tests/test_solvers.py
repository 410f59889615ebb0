import math

import numpy as np
import pytest
from scipy import optimize

from robust_pr.core import dist_to_sign_pair
from robust_pr.instances import CorruptionSpec, instance_from_arrays, plant_instance
from robust_pr.solvers import (
    SolverConfig,
    prox_linear_model_step,
    solve,
    solve_geometric,
    solve_polyak,
    solve_prox_linear,
    spectral_init,
    weighted_median,
)

ADV = CorruptionSpec(0.02, "adversarial_large", 10.0)


def desk(seed, p, spec=ADV):
    return plant_instance(200, 10, p, spec, seed=seed)


class TestConfig:
    @pytest.mark.parametrize("kw", [
        {"method": "newton"}, {"q": 1.0}, {"q": 0.0}, {"tol_dist": 0.0}, {"tol_obj": -1.0},
        {"lam0": -1.0}, {"prox_t": 0.0}, {"inner_tol": 0.0}, {"fstar_mode": "guess"},
        {"fstar_value": math.inf}, {"max_iters": -1},
    ])
    def test_rejects(self, kw):
        with pytest.raises(ValueError):
            SolverConfig(**kw)

    def test_dict_round_trip(self):
        cfg = SolverConfig(method="geometric", lam0=0.3, q=0.9)
        assert SolverConfig.from_dict(cfg.to_dict()) == cfg

    def test_unknown_key(self):
        with pytest.raises(ValueError, match="unknown"):
            SolverConfig.from_dict({"stepsize": 1.0})


def test_weighted_median():
    assert weighted_median(np.array([3.0, 1.0, 2.0]), np.ones(3)) == 2.0
    assert weighted_median(np.array([1.0, 2.0]), np.array([1.0, 5.0])) == 2.0


class TestSpectral:
    @pytest.mark.parametrize("p", [1, 2])
    def test_one_dimensional(self, p):
        inst = plant_instance(30, 1, p, seed=4, norm=1.7)
        x0 = spectral_init(inst.A, inst.b, p)
        assert abs(abs(x0[0]) - 1.7) <= 1e-6 * 1.7

    def test_alignment(self):
        hits = 0
        for seed in range(50):
            inst = plant_instance(5000, 5, 2, seed=seed)
            x0 = spectral_init(inst.A, inst.b, 2)
            hits += abs(x0 @ inst.xstar) / np.linalg.norm(x0) >= 0.95
        assert hits >= 45

    @pytest.mark.parametrize("p", [1, 2])
    def test_duplicated_measurements(self, p):
        inst = plant_instance(80, 4, p, ADV, seed=6)
        a = spectral_init(inst.A, inst.b, p)
        b = spectral_init(np.vstack([inst.A, inst.A]), np.concatenate([inst.b, inst.b]), p)
        np.testing.assert_allclose(a, b, rtol=1e-10, atol=1e-12)

    def test_degenerate(self):
        with pytest.raises(ValueError, match="degenerate measurements"):
            spectral_init(np.ones((4, 2)), np.zeros(4), 2)


class TestPolyak:
    def test_one_step_on_absolute_value(self):
        inst = instance_from_arrays([[1.0]], [1.0], 1)
        cfg = SolverConfig(fstar_mode="zero", tol_dist=None, tol_obj=1e-15, max_iters=5)
        tr = solve_polyak(inst, cfg, np.array([0.5]))
        assert tr.x.tolist() == [1.0] and tr.iterations == 1
        tr = solve_polyak(inst, cfg, np.array([-0.5]))
        assert tr.x.tolist() == [-1.0] and tr.iterations == 1

    def test_kink_start_stalls(self):
        # a^T x = 0 is a kink; sign(0) = 0 gives a zero subgradient above f*
        inst = instance_from_arrays([[1.0]], [1.0], 1)
        cfg = SolverConfig(fstar_mode="zero", tol_dist=None, tol_obj=1e-15)
        tr = solve_polyak(inst, cfg, np.array([0.0]))
        assert tr.termination == "stalled" and tr.iterations == 0

    def test_start_at_solution(self):
        inst = plant_instance(40, 4, 2, seed=1)
        tr = solve_polyak(inst, SolverConfig(), inst.xstar.copy())
        assert tr.termination == "converged" and tr.iterations == 0

    def test_needs_finite_fstar(self):
        inst = instance_from_arrays(np.eye(2), [1.0, 1.0], 2)
        with pytest.raises(ValueError, match="f\\*"):
            solve_polyak(inst, SolverConfig(), np.ones(2))

    @pytest.mark.parametrize("p", [1, 2])
    def test_running_best_nonincreasing(self, p):
        tr = solve(desk(3, p), SolverConfig(tol_dist=1e-12, max_iters=300))
        best = np.minimum.accumulate(tr.objective)
        assert np.all(np.diff(best) <= 0)
        assert len(tr.objective) == tr.iterations + 1


class TestGeometric:
    def test_movement_bound(self):
        inst = desk(0, 2)
        x0 = spectral_init(inst.A, inst.b, 2)
        cfg = SolverConfig(method="geometric", lam0=0.2, q=0.9, max_iters=200)
        tr = solve_geometric(inst, cfg, x0)
        steps = np.diff(np.array(tr.iterates), axis=0)
        assert np.linalg.norm(steps, axis=1).sum() <= 0.2 / (1 - 0.9) * (1 + 1e-12)

    def test_zero_step_freezes(self):
        inst = desk(0, 1)
        x0 = spectral_init(inst.A, inst.b, 1)
        tr = solve_geometric(inst, SolverConfig(method="geometric", lam0=0.0, max_iters=20), x0)
        assert all(np.array_equal(x, x0) for x in tr.iterates)

    def test_recovery_with_distance_scaled_step(self):
        hits = 0
        for seed in range(50):
            inst = desk(seed, 2)
            x0 = spectral_init(inst.A, inst.b, 2)
            cfg = SolverConfig(method="geometric", lam0=dist_to_sign_pair(x0, inst.xstar), q=0.98)
            tr = solve_geometric(inst, cfg, x0)
            hits += tr.dist[-1] <= 1e-5 * np.linalg.norm(inst.xstar)
        assert hits >= 40


class TestProxLinear:
    def test_p1_rejected(self):
        inst = desk(0, 1)
        with pytest.raises(ValueError, match="prox-linear requires smooth inner map"):
            solve(inst, SolverConfig(method="prox_linear"))

    def test_fixed_point(self):
        inst = plant_instance(60, 5, 2, seed=2)
        cfg = SolverConfig(method="prox_linear", tol_dist=None, tol_obj=None, max_iters=1)
        tr = solve_prox_linear(inst, cfg, inst.xstar.copy())
        assert np.linalg.norm(tr.x - inst.xstar) <= 1e-12

    def test_model_step_against_split_reformulation(self):
        # oracle: smooth reformulation with z = z+ - z-, solved by SLSQP
        rng = np.random.default_rng(0)
        m, n, t = 12, 3, 0.3
        c = rng.standard_normal(m)
        G = rng.standard_normal((m, n))
        d, gap = prox_linear_model_step(c, G, t, 1e-12, 200)

        def model(d):
            return np.abs(c + G @ d).sum() + d @ d / (2 * t)

        def obj(v):
            dd, zp, zm = v[:n], v[n:n + m], v[n + m:]
            return zp.sum() + zm.sum() + dd @ dd / (2 * t)

        cons = {"type": "eq", "fun": lambda v: c + G @ v[:n] - v[n:n + m] + v[n + m:]}
        v0 = np.concatenate([np.zeros(n), np.maximum(c, 0), np.maximum(-c, 0)])
        bounds = [(None, None)] * n + [(0, None)] * (2 * m)
        ref = optimize.minimize(obj, v0, constraints=[cons], bounds=bounds, method="SLSQP",
                                options={"ftol": 1e-14, "maxiter": 1000})
        assert ref.success
        assert model(d) <= ref.fun + 1e-9
        np.testing.assert_allclose(d, ref.x[:n], atol=1e-5)
        assert 0 <= gap <= 1e-12 * np.abs(c).sum()

    def test_quadratic_rate(self):
        ok = 0
        for seed in range(50):
            inst = desk(seed, 2)
            tr = solve(inst, SolverConfig(method="prox_linear", max_iters=50))
            nx = np.linalg.norm(inst.xstar)
            d = tr.dist
            local = [k for k in range(len(d) - 1) if d[k] <= 0.1 * nx and d[k] > 0]
            ratios = [d[k + 1] / d[k] ** 2 for k in local[-3:]]
            ok += d[-1] <= 1e-5 * nx and bool(ratios) and max(ratios) * nx <= 1.0
        assert ok >= 40


class TestSharedContracts:
    @pytest.mark.parametrize("method", ["polyak", "geometric", "prox_linear"])
    def test_sign_covariance_bit_exact(self, method):
        inst = desk(5, 2)
        x0 = spectral_init(inst.A, inst.b, 2)
        cfg = SolverConfig(method=method, max_iters=30, tol_dist=1e-14)
        a = solve(inst, cfg, x0)
        b = solve(inst, cfg, -x0)
        assert np.array_equal(a.objective, b.objective)
        assert all(np.array_equal(u, -v) for u, v in zip(a.iterates, b.iterates))

    @pytest.mark.parametrize("method", ["polyak", "geometric", "prox_linear"])
    def test_stopping_soundness(self, method):
        inst = desk(7, 2)
        cfg = SolverConfig(method=method, tol_dist=1e-6)
        tr = solve(inst, cfg)
        if tr.termination == "converged":
            assert dist_to_sign_pair(tr.x, inst.xstar) <= 1e-6 * np.linalg.norm(inst.xstar)

    def test_tol_obj_soundness(self):
        inst = desk(8, 1)
        cfg = SolverConfig(tol_dist=None, tol_obj=1e-6)
        tr = solve(inst, cfg)
        assert tr.termination == "converged"
        assert tr.objective[-1] - inst.fstar() <= 1e-6

    def test_thinning_keeps_last(self):
        inst = desk(1, 2)
        tr = solve(inst, SolverConfig(keep_every=7, tol_dist=1e-12, max_iters=50))
        assert np.array_equal(tr.iterates[-1], tr.x)
        assert len(tr.iterates) <= tr.iterations // 7 + 2

    def test_summary(self):
        inst = desk(2, 2)
        tr = solve(inst, SolverConfig())
        s = tr.summary(inst.xstar, 1e-5)
        assert s["success"] is True and s["termination"] == "converged"
