"""Command-line front end: ``robust-pr <subcommand> [flags]``.

Exit status is 0 on success, 1 on invalid input and 2 on runtime or
numerical failure. Failures print one ``error kind=... command=...
message=...`` line to stderr. Key scalars go to stdout as ``RESULT key=value``
lines, and every run writes a manifest recording the arguments and seed.
"""
import argparse
import datetime
import json
import os
import sys

import numpy as np

from . import __version__, kernels
from .harness import ExperimentConfig, results_csv, run_grid, write_results
from .instances import NOISE_MODELS, CorruptionSpec, ProblemInstance, plant_instance
from .properties import (
    e_curve_scan,
    estimate_agp_band,
    estimate_arp_psi,
    quotient_grid,
    rank2_sweep,
    sharpness_scan,
    sum_diff_sweep,
    write_curve_csv,
)
from .solvers import METHODS, SolverConfig, solve


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


def _global_flags():
    g = argparse.ArgumentParser(add_help=False)
    g.add_argument("--seed", type=int, default=None,
                   help="random seed (default 0; for phase, overrides the config's master_seed)")
    g.add_argument("--out", default=None,
                   help="output directory (default: current directory; for phase, the config's output_dir)")
    g.add_argument("--p", type=int, choices=(1, 2), default=None,
                   help="measurement exponent (default 2; solve uses the instance's own)")
    g.add_argument("--quiet", action="store_true", help="print only RESULT lines")
    g.add_argument("--threads", type=int, default=1,
                   help="maximum worker processes (phase only; default 1)")
    return g


def build_parser():
    parser = _Parser(prog="robust-pr", description="Robust phase retrieval toolkit.")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)
    glob = [_global_flags()]

    gen = sub.add_parser("gen", parents=glob, help="plant a corrupted instance")
    gen.add_argument("--m", type=int, required=True, help="number of measurements")
    gen.add_argument("--n", type=int, required=True, help="signal length")
    gen.add_argument("--s", type=float, default=0.0, help="corrupted fraction (default 0)")
    gen.add_argument("--noise-model", choices=NOISE_MODELS, default="adversarial_large",
                     help="corruption model (default adversarial_large)")
    gen.add_argument("--noise-scale", type=float, default=10.0, help="corruption scale (default 10)")
    gen.add_argument("--norm", type=float, default=1.0, help="norm of the planted signal (default 1)")

    sol = sub.add_parser("solve", parents=glob, help="recover a signal from an instance file")
    sol.add_argument("--instance", required=True, help="instance JSON written by gen")
    sol.add_argument("--method", choices=METHODS, default="polyak", help="solver (default polyak)")
    sol.add_argument("--max-iters", type=int, default=500, help="iteration cap (default 500)")
    sol.add_argument("--tol-dist", type=float, default=1e-5,
                     help="stop at dist <= tol * ||x*|| (default 1e-5)")
    sol.add_argument("--lam0", type=float, default=None,
                     help="geometric initial step (default 0.5 ||x0||)")
    sol.add_argument("--q", type=float, default=0.98, help="geometric decay (default 0.98)")
    sol.add_argument("--tau", type=float, default=1e-5,
                     help="success threshold, relative distance (default 1e-5)")

    props = sub.add_parser("props", parents=glob, help="estimate growth, range and sharpness constants")
    props.add_argument("--instance", default=None, help="instance JSON (default: plant one from --m/--n/--s)")
    props.add_argument("--m", type=int, default=500, help="measurements when planting (default 500)")
    props.add_argument("--n", type=int, default=10, help="signal length when planting (default 10)")
    props.add_argument("--s", type=float, default=0.02, help="corrupted fraction when planting (default 0.02)")
    props.add_argument("--L", type=int, default=None, help="range set size (default: planted support size)")
    props.add_argument("--epsilon", type=float, default=0.1, help="deviation level for predictions (default 0.1)")
    props.add_argument("--pairs", type=int, default=60, help="sampled pairs per estimator (default 60)")
    props.add_argument("--ascent-steps", type=int, default=100, help="range ascent steps per pair (default 100)")
    props.add_argument("--probes", type=int, default=200, help="sharpness probes (default 200)")
    props.add_argument("--which", default="agp,arp,sharp",
                       help="comma list from agp, arp, sharp (default all)")

    ec = sub.add_parser("ecurve", parents=glob, help="tabulate e(s) and its normalized ratios")
    ec.add_argument("--points", type=int, default=201, help="grid points on [-1, 1] (default 201)")
    ec.add_argument("--tol", type=float, default=1e-8, help="absolute quadrature tolerance (default 1e-8)")

    ph = sub.add_parser("phase", parents=glob, help="run a recovery grid from a JSON config")
    ph.add_argument("--config", required=True, help="grid config JSON")

    lem = sub.add_parser("lemmas", parents=glob, help="sweep the deterministic inequalities")
    lem.add_argument("--pairs", type=int, default=1_000_000, help="random pairs per sweep (default 1e6)")
    lem.add_argument("--n", type=int, default=8, help="vector length (default 8)")
    lem.add_argument("--step", type=float, default=1e-3, help="quotient grid step (default 1e-3)")
    return parser


class _Out:
    def __init__(self, quiet):
        self.quiet = quiet

    def info(self, text):
        if not self.quiet:
            print(text)

    def result(self, **kv):
        for k, v in kv.items():
            print(f"RESULT {k}={v}")


def _outdir(args, default="."):
    d = args.out if args.out is not None else default
    os.makedirs(d, exist_ok=True)
    return d


def _dump(path, obj):
    with open(path, "w") as fh:
        json.dump(obj, fh, indent=2, sort_keys=True)
        fh.write("\n")


def _write_manifest(out_dir, args, argv, outputs):
    path = os.path.join(out_dir, f"{args.command}_manifest.json")
    _dump(path, {
        "command": args.command,
        "argv": list(argv),
        "seed": args.seed if args.seed is not None else 0,
        "version": __version__,
        "kernel_backend": kernels.BACKEND,
        "outputs": outputs,
        "timestamp": datetime.datetime.now(datetime.timezone.utc).isoformat(),
    })
    return path


def _load_instance(path):
    try:
        with open(path) as fh:
            return ProblemInstance.from_json(fh.read())
    except OSError as exc:
        raise ValueError(f"cannot read instance {path}: {exc.strerror or exc}") from exc
    except (KeyError, json.JSONDecodeError) as exc:
        raise ValueError(f"malformed instance {path}: {exc}") from exc


def cmd_gen(args, argv, out):
    p = args.p or 2
    seed = args.seed or 0
    spec = CorruptionSpec(args.s, args.noise_model, args.noise_scale)
    inst = plant_instance(args.m, args.n, p, spec, seed=seed, norm=args.norm)
    d = _outdir(args)
    path = os.path.join(d, "instance.json")
    with open(path, "w") as fh:
        fh.write(inst.to_json())
    _write_manifest(d, args, argv, [path])
    out.info(f"wrote {path}")
    out.result(path=path, m=inst.m, n=inst.n, p=p, L=inst.L, seed=seed)


def cmd_solve(args, argv, out):
    inst = _load_instance(args.instance)
    if args.p is not None and args.p != inst.p:
        raise ValueError(f"--p {args.p} disagrees with instance p={inst.p}")
    if not args.tau > 0:
        raise ValueError("tau must be positive")
    cfg = SolverConfig(
        method=args.method, max_iters=args.max_iters,
        tol_dist=args.tol_dist if inst.xstar is not None else None,
        lam0=args.lam0, q=args.q,
    )
    trace = solve(inst, cfg)
    summary = trace.summary(inst.xstar, args.tau if inst.xstar is not None else None)
    summary["seed"] = inst.seed
    d = _outdir(args)
    path = os.path.join(d, "solve_summary.json")
    _dump(path, summary)
    _write_manifest(d, args, argv, [path])
    out.info(f"{trace.method}: {trace.termination} after {trace.iterations} iterations")
    kv = dict(termination=trace.termination, iterations=trace.iterations,
              final_objective=repr(summary["final_objective"]))
    if "final_dist" in summary:
        kv["final_dist"] = repr(summary["final_dist"])
    if "success" in summary:
        kv["success"] = str(summary["success"]).lower()
    out.result(**kv)


def cmd_props(args, argv, out):
    which = [w.strip() for w in args.which.split(",") if w.strip()]
    bad = set(which) - {"agp", "arp", "sharp"}
    if bad or not which:
        raise ValueError(f"--which entries must come from agp, arp, sharp; got {args.which!r}")
    seed = args.seed or 0
    if args.instance is not None:
        inst = _load_instance(args.instance)
        if args.p is not None and args.p != inst.p:
            raise ValueError(f"--p {args.p} disagrees with instance p={inst.p}")
    else:
        inst = plant_instance(args.m, args.n, args.p or 2, CorruptionSpec(args.s), seed=seed)
    L = args.L if args.L is not None else inst.L
    report = {"seed": seed, "p": inst.p, "m": inst.m, "n": inst.n, "L": L, "epsilon": args.epsilon}
    psi_hat = None
    if "agp" in which:
        band = estimate_agp_band(inst.A, inst.p, args.pairs, seed, args.epsilon)
        report["agp"] = band.to_dict()
        out.result(mu1_hat=repr(band.mu1_hat), mu2_hat=repr(band.mu2_hat),
                   agp_ratio_ok=str(band.ratio_ok).lower())
    if "arp" in which or "sharp" in which:
        if L < 1:
            raise ValueError("range estimate needs L >= 1; pass --L or plant with s > 0")
        arp = estimate_arp_psi(inst.A, L, inst.p, args.pairs, args.ascent_steps, seed, args.epsilon)
        psi_hat = arp.psi_hat
        report["arp"] = arp.to_dict()
        out.result(psi_hat=repr(arp.psi_hat), psi_pred=repr(arp.psi_pred))
    if "sharp" in which:
        if inst.xstar is None:
            raise ValueError("sharpness needs an instance with a planted signal")
        sh = sharpness_scan(inst, psi_hat, args.epsilon, args.probes, seed)
        report["sharp"] = sh.to_dict()
        out.result(mu_hat=repr(sh.mu_hat), mu_pred=repr(sh.mu_pred),
                   certified=f"{sh.num_certified}/{sh.num_probes}")
    d = _outdir(args)
    path = os.path.join(d, "props.json")
    _dump(path, report)
    _write_manifest(d, args, argv, [path])
    out.info(f"wrote {path}")


def cmd_ecurve(args, argv, out):
    if not args.tol > 0:
        raise ValueError("tol must be positive")
    scan = e_curve_scan(args.points, args.tol)
    d = _outdir(args)
    paths = []
    for which in ("F", "sqrtF"):
        path = os.path.join(d, f"ecurve_ratio_{which}.csv")
        write_curve_csv(scan, path, which)
        paths.append(path)
    jpath = os.path.join(d, "ecurve.json")
    _dump(jpath, scan.to_dict())
    paths.append(jpath)
    _write_manifest(d, args, argv, paths)
    verdict = ">=" if scan.min_ratio_sqrtF >= 0.77 else "<"
    print(f"min ratio_sqrtF = {scan.min_ratio_sqrtF:.7f} {verdict} 0.77 (s = {scan.argmin_ratio_sqrtF:.4g})")
    print(f"min ratio_F = {scan.min_ratio_F:.7f} (s = {scan.argmin_ratio_F:.4g})")
    out.result(min_ratio_sqrtF=repr(scan.min_ratio_sqrtF),
               argmin_ratio_sqrtF=repr(scan.argmin_ratio_sqrtF),
               min_ratio_F=repr(scan.min_ratio_F),
               argmin_ratio_F=repr(scan.argmin_ratio_F))


def cmd_phase(args, argv, out):
    try:
        config = ExperimentConfig.load(args.config)
    except OSError as exc:
        raise ValueError(f"cannot read config {args.config}: {exc.strerror or exc}") from exc
    except json.JSONDecodeError as exc:
        raise ValueError(f"malformed config {args.config}: {exc}") from exc
    except TypeError as exc:
        raise ValueError(f"invalid config {args.config}: {exc}") from exc
    if args.seed is not None:
        config.master_seed = args.seed
    if args.p is not None:
        config.p = args.p
    if args.threads < 1:
        raise ValueError("--threads must be at least 1")
    grid = run_grid(config, workers=args.threads)
    d = args.out if args.out is not None else config.output_dir
    paths = write_results(grid, d)
    out.info(results_csv(grid).rstrip("\n"))
    out.result(cells=len(grid.cells), trials=len(grid.records),
               successes=sum(r.success for r in grid.records), results=paths[0])


def cmd_lemmas(args, argv, out):
    if args.pairs < 1 or args.n < 1:
        raise ValueError("--pairs and --n must be positive")
    if not 0 < args.step <= 0.5:
        raise ValueError("--step must lie in (0, 0.5]")
    seed = args.seed or 0
    sd = sum_diff_sweep(args.pairs, args.n, seed=seed)
    r2 = rank2_sweep(args.pairs, args.n, seed=seed + 1)
    qg = quotient_grid(args.step)
    q_ok = qg.minimum >= 2 - np.sqrt(2) - 1e-9
    report = {
        "seed": seed,
        "sum_diff": {"total": sd.total, "passed": sd.passed, "min_slack": sd.min_slack},
        "rank2": {"total": r2.total, "passed": r2.passed, "min_slack": r2.min_slack},
        "quotient": {"minimum": qg.minimum, "t_argmin": qg.t_argmin,
                     "rho_argmin": qg.rho_argmin, "points": qg.points, "passed": bool(q_ok)},
    }
    d = _outdir(args)
    path = os.path.join(d, "lemmas.json")
    _dump(path, report)
    _write_manifest(d, args, argv, [path])
    print(f"sum_diff: {sd.passed}/{sd.total} pass")
    print(f"rank2: {r2.passed}/{r2.total} pass")
    print(f"quotient: min {qg.minimum:.10f} at (t, rho) = ({qg.t_argmin:g}, {qg.rho_argmin:g}): "
          f"{'pass' if q_ok else 'fail'}")
    out.result(sum_diff_failed=sd.failed, rank2_failed=r2.failed,
               quotient_min=repr(qg.minimum))


_COMMANDS = {
    "gen": cmd_gen, "solve": cmd_solve, "props": cmd_props,
    "ecurve": cmd_ecurve, "phase": cmd_phase, "lemmas": cmd_lemmas,
}


def _fail(kind, command, exc):
    msg = " ".join(str(exc).split())
    print(f"error kind={kind} command={command} message={msg}", file=sys.stderr)


def main(argv=None):
    argv = sys.argv[1:] if argv is None else list(argv)
    parser = build_parser()
    command = argv[0] if argv and not argv[0].startswith("-") else "-"
    try:
        args = parser.parse_args(argv)
    except UsageError as exc:
        _fail("usage", command, exc)
        return 1
    out = _Out(args.quiet)
    try:
        _COMMANDS[args.command](args, argv, out)
    except (ValueError, KeyError) as exc:
        _fail("validation", args.command, exc)
        return 1
    except Exception as exc:
        _fail("runtime", args.command, exc)
        return 2
    return 0


if __name__ == "__main__":
    sys.exit(main())
