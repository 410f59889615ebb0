"""Seeded recovery trials over grids of ``(n, m, s)`` cells.

Every trial's instance seed is a pure function of the master seed and the
trial coordinates, so any execution order, serial or parallel, produces the
same records, and aggregation over sorted records makes the written files
byte-identical.
"""
import csv
import datetime
import json
import math
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from . import __version__
from .core import dist_to_sign_pair, residual_l0
from .instances import NOISE_MODELS, CorruptionSpec, plant_instance
from .solvers import SolverConfig, solve, spectral_init

CSV_HEADER = ("n", "m", "s", "trials", "successes", "rate", "mean_final_dist", "mean_iters")

MASK64 = (1 << 64) - 1

# solvers run far past the success threshold tau so that clean residuals fall
# below the l0 zero-threshold and the attained sparsity is meaningful
HARNESS_TOL_DIST = 1e-12

_CONFIG_KEYS = {
    "dims", "n", "oversampling", "fractions", "p", "noise_model", "noise_scale",
    "signal_norm", "solver", "trials", "master_seed", "tau", "l0_threshold", "output_dir",
}


def splitmix64(x):
    """One step of the SplitMix64 finalizer on a 64-bit integer."""
    z = (x + 0x9E3779B97F4A7C15) & MASK64
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & MASK64
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & MASK64
    return z ^ (z >> 31)


def trial_seed(master, n, m, s, trial):
    """Fold ``(master, n, m, round(s*1e6), trial)`` through SplitMix64."""
    h = splitmix64(int(master) & MASK64)
    for v in (n, m, round(s * 1e6), trial):
        h = splitmix64(h ^ (int(v) & MASK64))
    return h


@dataclass
class ExperimentConfig:
    """Grid definition.

    ``dims`` lists ``(n, m)`` pairs. Alternatively, ``from_dict`` accepts
    ``n`` and ``oversampling`` lists and forms every ``(n, round(r*n))``.
    """

    dims: list
    fractions: list
    p: int = 2
    noise_model: str = "adversarial_large"
    noise_scale: float = 10.0
    signal_norm: float = 1.0
    solver: SolverConfig = field(default_factory=lambda: SolverConfig(tol_dist=HARNESS_TOL_DIST))
    trials: int = 10
    master_seed: int = 0
    tau: float = 1e-5
    l0_threshold: float = 1e-8
    output_dir: str = "results"

    def __post_init__(self):
        self.dims = [(int(n), int(m)) for n, m in self.dims]
        self.fractions = [float(s) for s in self.fractions]
        if not self.dims:
            raise ValueError("dims must be nonempty")
        if not self.fractions:
            raise ValueError("fractions must be nonempty")
        for n, m in self.dims:
            if n < 1 or m < 1:
                raise ValueError(f"dimensions must be positive, got (n={n}, m={m})")
        for s in self.fractions:
            CorruptionSpec(s, self.noise_model, self.noise_scale)
        if self.p not in (1, 2) or isinstance(self.p, bool):
            raise ValueError(f"p must be 1 or 2, got {self.p!r}")
        if self.noise_model not in NOISE_MODELS:
            raise ValueError(f"unknown noise model {self.noise_model!r}")
        if not self.trials >= 1:
            raise ValueError("trials must be at least 1")
        if not self.tau > 0:
            raise ValueError("tau must be positive")
        if not self.l0_threshold > 0:
            raise ValueError("l0_threshold must be positive")
        if not self.signal_norm > 0:
            raise ValueError("signal_norm must be positive")
        if isinstance(self.solver, dict):
            self.solver = SolverConfig.from_dict(self.solver)

    def cells(self):
        return sorted((n, m, s) for n, m in self.dims for s in self.fractions)

    def to_dict(self):
        return {
            "dims": [list(d) for d in self.dims],
            "fractions": list(self.fractions),
            "p": self.p,
            "noise_model": self.noise_model,
            "noise_scale": self.noise_scale,
            "signal_norm": self.signal_norm,
            "solver": self.solver.to_dict(),
            "trials": self.trials,
            "master_seed": self.master_seed,
            "tau": self.tau,
            "l0_threshold": self.l0_threshold,
            "output_dir": self.output_dir,
        }

    @classmethod
    def from_dict(cls, d):
        unknown = set(d) - _CONFIG_KEYS
        if unknown:
            raise ValueError(f"unknown config keys: {sorted(unknown)}")
        d = dict(d)
        if "dims" in d:
            if "n" in d or "oversampling" in d:
                raise ValueError("give either dims or n + oversampling, not both")
        elif "n" in d and "oversampling" in d:
            ns, rs = d.pop("n"), d.pop("oversampling")
            d["dims"] = [(int(n), int(round(r * n))) for n in ns for r in rs]
        else:
            raise ValueError("config needs dims, or n and oversampling")
        if "fractions" not in d:
            raise ValueError("config needs fractions")
        for key in ("trials", "master_seed", "p"):
            if key in d and not isinstance(d[key], int):
                raise ValueError(f"{key} must be an integer")
        d["solver"] = SolverConfig.from_dict({"tol_dist": HARNESS_TOL_DIST, **d.get("solver", {})})
        return cls(**d)

    @classmethod
    def load(cls, path):
        with open(path) as fh:
            return cls.from_dict(json.load(fh))


@dataclass(frozen=True)
class TrialRecord:
    n: int
    m: int
    s: float
    trial: int
    seed: int
    success: bool
    final_dist: float
    final_objective: float
    residual_l0: int
    l0_within_support: bool
    iterations: int
    termination: str
    x_hat: tuple
    xstar: tuple
    wall_time: float = field(default=0.0, compare=False)

    def to_dict(self):
        # wall time is left out so that files depend only on the config
        return {
            "n": self.n, "m": self.m, "s": self.s, "trial": self.trial,
            "seed": self.seed, "success": self.success,
            "final_dist": self.final_dist, "final_objective": self.final_objective,
            "residual_l0": self.residual_l0, "l0_within_support": self.l0_within_support,
            "iterations": self.iterations, "termination": self.termination,
            "x_hat": list(self.x_hat), "xstar": list(self.xstar),
        }


def run_trial(config, cell, trial_index):
    """Plant, initialize spectrally, solve, and score one trial."""
    n, m, s = cell
    seed = trial_seed(config.master_seed, n, m, s, trial_index)
    spec = CorruptionSpec(s, config.noise_model, config.noise_scale)
    try:
        inst = plant_instance(m, n, config.p, spec, seed=seed, norm=config.signal_norm)
        x0 = spectral_init(inst.A, inst.b, inst.p)
        trace = solve(inst, config.solver, x0)
    except Exception as exc:
        raise RuntimeError(f"trial failed at n={n} m={m} s={s} trial={trial_index}: {exc}") from exc
    d = dist_to_sign_pair(trace.x, inst.xstar)
    l0 = residual_l0(inst.A, inst.b, trace.x, inst.p, config.l0_threshold)
    return TrialRecord(
        n=n, m=m, s=s, trial=trial_index, seed=seed,
        success=bool(d <= config.tau * float(np.linalg.norm(inst.xstar))),
        final_dist=d,
        final_objective=float(trace.objective[-1]),
        residual_l0=l0,
        l0_within_support=l0 <= spec.count(m),
        iterations=trace.iterations,
        termination=trace.termination,
        x_hat=tuple(float(v) for v in trace.x),
        xstar=tuple(float(v) for v in inst.xstar),
        wall_time=trace.wall_time,
    )


def _task(args):
    return run_trial(*args)


@dataclass(frozen=True)
class CellSummary:
    n: int
    m: int
    s: float
    trials: int
    successes: int
    mean_final_dist: float
    mean_iters: float
    seeds: tuple

    @property
    def rate(self):
        return self.successes / self.trials


@dataclass
class GridResult:
    config: ExperimentConfig
    cells: list
    records: list


def aggregate(config, records):
    records = sorted(records, key=lambda r: (r.n, r.m, r.s, r.trial))
    groups = {}
    for r in records:
        groups.setdefault((r.n, r.m, r.s), []).append(r)
    cells = []
    for (n, m, s), rs in sorted(groups.items()):
        cells.append(CellSummary(
            n=n, m=m, s=s, trials=len(rs),
            successes=sum(r.success for r in rs),
            mean_final_dist=math.fsum(r.final_dist for r in rs) / len(rs),
            mean_iters=math.fsum(r.iterations for r in rs) / len(rs),
            seeds=tuple(r.seed for r in rs),
        ))
    return GridResult(config=config, cells=cells, records=records)


def run_grid(config, workers=1):
    """Every cell times every trial; ``workers > 1`` uses a process pool."""
    tasks = [(config, cell, k) for cell in config.cells() for k in range(config.trials)]
    if workers > 1 and len(tasks) > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            records = list(pool.map(_task, tasks, chunksize=max(1, len(tasks) // (4 * workers))))
    else:
        records = [_task(t) for t in tasks]
    return aggregate(config, records)


def results_csv(grid):
    """CSV text with one row per cell; floats in shortest round-trip form."""
    lines = [",".join(CSV_HEADER)]
    for c in sorted(grid.cells, key=lambda c: (c.n, c.m, c.s)):
        lines.append(",".join([
            str(c.n), str(c.m), repr(c.s), str(c.trials), str(c.successes),
            repr(c.rate), repr(c.mean_final_dist), repr(c.mean_iters),
        ]))
    return "\n".join(lines) + "\n"


def manifest(grid, timestamp=None):
    if timestamp is None:
        timestamp = datetime.datetime.now(datetime.timezone.utc).isoformat()
    return {
        "config": grid.config.to_dict(),
        "master_seed": grid.config.master_seed,
        "version": __version__,
        "cells": [
            {"n": c.n, "m": c.m, "s": c.s, "seed_list": list(c.seeds)}
            for c in grid.cells
        ],
        "timestamp": timestamp,
    }


def _write(path, text):
    try:
        with open(path, "w", newline="") as fh:
            fh.write(text)
    except OSError as exc:
        raise OSError(f"cannot write {path}: {exc.strerror or exc}") from exc


def write_results(grid, out_dir):
    """Write ``results.csv``, ``trials.jsonl`` and ``manifest.json``.

    Returns the three paths. Only the manifest's ``timestamp`` varies
    between reruns of the same config.
    """
    try:
        os.makedirs(out_dir, exist_ok=True)
    except OSError as exc:
        raise OSError(f"cannot create {out_dir}: {exc.strerror or exc}") from exc
    csv_path = os.path.join(out_dir, "results.csv")
    jsonl_path = os.path.join(out_dir, "trials.jsonl")
    man_path = os.path.join(out_dir, "manifest.json")
    _write(csv_path, results_csv(grid))
    _write(jsonl_path, "".join(json.dumps(r.to_dict()) + "\n" for r in grid.records))
    _write(man_path, json.dumps(manifest(grid), indent=2, sort_keys=True) + "\n")
    return csv_path, jsonl_path, man_path


def read_results(path):
    """Parse ``results.csv`` back into a list of dicts with typed values."""
    with open(path, newline="") as fh:
        rows = list(csv.DictReader(fh))
    types = dict(n=int, m=int, s=float, trials=int, successes=int,
                 rate=float, mean_final_dist=float, mean_iters=float)
    return [{k: types[k](v) for k, v in row.items()} for row in rows]
