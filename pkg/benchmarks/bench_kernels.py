"""Time the compiled kernels against the numpy fallback.

Run with ``python3 benchmarks/bench_kernels.py [--m M] [--n N] [--repeat R]``.
"""
import argparse
import timeit

import numpy as np

from robust_pr import _kernels_py
from robust_pr import kernels


def cases(m, n, seed=0):
    rng = np.random.default_rng(seed)
    A = rng.standard_normal((m, n))
    x = rng.standard_normal(n)
    y = rng.standard_normal(n)
    b = np.abs(A @ y) ** 2
    r = rng.standard_normal(m)
    L = max(1, m // 50)
    return {
        "objective_subgradient p=2": lambda mod: mod.objective_subgradient(A, b, x, 2),
        "objective_subgradient p=1": lambda mod: mod.objective_subgradient(A, np.sqrt(b), x, 1),
        "abs_power_diff p=2": lambda mod: mod.abs_power_diff(A, x, y, 2),
        "split_top": lambda mod: mod.split_top(r, L),
    }


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--m", type=int, default=2000)
    ap.add_argument("--n", type=int, default=10)
    ap.add_argument("--repeat", type=int, default=200)
    args = ap.parse_args(argv)
    compiled = getattr(kernels, "_impl", None)
    if kernels.BACKEND != "cython":
        print("compiled kernels unavailable; only the fallback is timed")
    print(f"m={args.m} n={args.n} repeat={args.repeat}")
    print(f"{'kernel':28s} {'python (us)':>12s} {'cython (us)':>12s} {'speedup':>8s}")
    for name, fn in cases(args.m, args.n).items():
        t_py = min(timeit.repeat(lambda: fn(_kernels_py), number=args.repeat, repeat=3)) / args.repeat
        if kernels.BACKEND == "cython":
            t_cy = min(timeit.repeat(lambda: fn(compiled), number=args.repeat, repeat=3)) / args.repeat
            print(f"{name:28s} {t_py * 1e6:12.1f} {t_cy * 1e6:12.1f} {t_py / t_cy:8.2f}")
        else:
            print(f"{name:28s} {t_py * 1e6:12.1f} {'-':>12s} {'-':>8s}")


if __name__ == "__main__":
    main()
