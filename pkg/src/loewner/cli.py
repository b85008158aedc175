"""Command-line interface.

Subcommands:

* ``trace``   - sample an SLE trace adaptively and write trace/driving CSVs
* ``forward`` - driving CSV -> trace CSV (naive, blocked, or both)
* ``extract`` - curve CSV -> driving CSV (naive, blocked, or both)
* ``kappa``   - ensemble pipeline: simulate/extract/estimate kappa
* ``bench``   - timing matrices and log-log slope fits for the cost claims

Every command embeds its fully resolved configuration in a JSON sidecar,
so runs are reproducible from (config, seed).  Delimited outputs carry 17
significant digits and round-trip doubles exactly.  Unless ``--no-plot``
is given, each command also renders a PNG figure next to its data files.

Flag defaults may be overridden with environment variables prefixed
``LOEWNER_`` (for example ``LOEWNER_SEED=7 loewner trace ...``).

Exit codes: 0 success, 2 invalid arguments, 3 cap or convergence failure.
"""

from __future__ import annotations

import argparse
import math
import os
import sys
import tempfile
import time
from concurrent.futures import ProcessPoolExecutor
from pathlib import Path

import numpy as np

from . import fileio, plotting
from .drivers import DrivingPath, brownian_driver
from .forward import (default_block_size, build_maps, point_at, sle_adaptive,
                      solve_blocked, solve_naive)
from .hatseries import build_forward_plan
from .inverse import extract_blocked, extract_naive, sanitize
from .slitmap import ConvergenceError, SlitKind
from .stats import estimate_kappa, resample_to_grid, uniform_grid

EXIT_OK = 0
EXIT_VALIDATION = 2
EXIT_CAP = 3
ENV_PREFIX = "LOEWNER_"


def _env_default(name, cast, fallback):
    raw = os.environ.get(ENV_PREFIX + name.upper().replace("-", "_"))
    if raw is None:
        return fallback
    try:
        return cast(raw)
    except (TypeError, ValueError):
        return fallback


def _resolved(args, keys) -> dict:
    cfg = {k: getattr(args, k) for k in keys}
    cfg["command"] = args.command
    return cfg


def _sizes(text) -> list[int]:
    return [int(s) for s in str(text).split(",") if s.strip()]


# ---------------------------------------------------------------------------
# trace

def cmd_trace(args) -> int:
    if args.kappa < 0 or args.T <= 0 or (args.eps is not None and args.eps <= 0):
        print("trace: need kappa >= 0, T > 0, eps > 0", file=sys.stderr)
        return EXIT_VALIDATION
    path, trace = sle_adaptive(args.kappa, args.T, args.eps, args.seed,
                               kind=args.kind, initial_points=args.n0,
                               max_rounds=args.max_rounds,
                               max_points=args.max_points)
    out = Path(args.out)
    fileio.write_trace_csv(out.with_suffix(".trace.csv"), trace.times, trace.points)
    fileio.write_driving_csv(out.with_suffix(".driving.csv"), path)
    meta = dict(trace.meta)
    meta["config"] = _resolved(args, ["kappa", "T", "eps", "seed", "kind", "n0",
                                      "max_rounds", "max_points", "out"])
    fileio.write_json(out.with_suffix(".meta.json"), meta)
    if not args.no_plot:
        plotting.plot_trace(trace.points, out.with_suffix(".trace.png"),
                            title=f"SLE({args.kappa:g}) adaptive, N={len(trace) - 1}")
    if not trace.meta["compliant"]:
        print("trace: refinement cap exceeded; partial result flagged in meta",
              file=sys.stderr)
        return EXIT_CAP
    return EXIT_OK


# ---------------------------------------------------------------------------
# forward

def cmd_forward(args) -> int:
    driving = fileio.read_driving_csv(args.infile)
    n_maps = len(driving) - 1
    b = args.block_b if args.block_b else default_block_size(n_maps)
    out = Path(args.out)
    meta = {"config": _resolved(args, ["infile", "kind", "mode", "block_b",
                                       "order_n", "gate_L", "out"]),
            "n_points": n_maps, "block_size": b}
    naive = blocked = None
    if args.mode in ("naive", "both"):
        naive = solve_naive(driving, args.kind)
        fileio.write_trace_csv(out.with_suffix(".naive.csv"),
                               naive.times, naive.points)
    if args.mode in ("blocked", "both"):
        blocked = solve_blocked(driving, args.kind, block_size=b,
                                n=args.order_n, gate=args.gate_L)
        fileio.write_trace_csv(out.with_suffix(".blocked.csv"),
                               blocked.times, blocked.points)
    if naive is not None and blocked is not None:
        diff = np.abs(naive.points - blocked.points)
        meta["diff"] = {"max": float(diff.max()),
                        "max_over_diameter": float(diff.max() / naive.diameter)}
    fileio.write_json(out.with_suffix(".meta.json"), meta)
    if not args.no_plot:
        primary = blocked if blocked is not None else naive
        compare = naive.points if (naive is not None and blocked is not None) else None
        plotting.plot_trace(primary.points, out.with_suffix(".trace.png"),
                            title=f"forward ({args.mode}), N={n_maps}",
                            compare=compare, labels=("blocked", "naive"))
    return EXIT_OK


# ---------------------------------------------------------------------------
# extract

def cmd_extract(args) -> int:
    points = fileio.read_curve_csv(args.infile)
    try:
        curve = sanitize(points, source=str(args.infile))
    except ValueError as exc:
        print(f"extract: {exc}", file=sys.stderr)
        return EXIT_VALIDATION
    n = len(curve) - 1
    b = args.block_b if args.block_b else max(1, math.ceil(math.sqrt(n)))
    out = Path(args.out)
    meta = {"config": _resolved(args, ["infile", "kind", "mode", "block_b",
                                       "order_n", "gate_L", "out"]),
            "n_points": n,
            "sanitize": {"lifted": list(curve.report.lifted),
                         "dropped": list(curve.report.dropped)}}
    naive = blocked = None
    try:
        if args.mode in ("naive", "both"):
            naive = extract_naive(curve, args.kind)
            fileio.write_driving_csv(out.with_suffix(".naive.csv"), naive)
            meta["lifted_steps_naive"] = naive.meta.get("lifted_steps", [])
        if args.mode in ("blocked", "both"):
            blocked = extract_blocked(curve, args.kind, block_size=b,
                                      n=args.order_n, gate=args.gate_L)
            fileio.write_driving_csv(out.with_suffix(".blocked.csv"), blocked)
            meta["lifted_steps_blocked"] = blocked.meta.get("lifted_steps", [])
    except ConvergenceError as exc:
        print(f"extract: {exc}", file=sys.stderr)
        return EXIT_CAP
    if naive is not None and blocked is not None:
        d = np.abs(naive.values - blocked.values)
        meta["diff"] = {"max": float(d.max()),
                        "max_over_scale": float(d.max() / (np.abs(naive.values).max() + 1))}
    fileio.write_json(out.with_suffix(".meta.json"), meta)
    if not args.no_plot:
        primary = blocked if blocked is not None else naive
        compare = (naive.times, naive.values) if (naive and blocked) else None
        plotting.plot_driving(primary.times, primary.values,
                              out.with_suffix(".driving.png"),
                              title=f"extracted driving ({args.mode}), N={n}",
                              compare=compare, labels=("blocked", "naive"))
    return EXIT_OK


# ---------------------------------------------------------------------------
# kappa ensemble

def _kappa_worker(payload) -> str:
    (kappa, T, eps, seed, kind, idx, tmpdir) = payload
    path, trace = sle_adaptive(kappa, T, eps, int(seed))
    curve = sanitize(trace.points, source=f"ensemble[{idx}]")
    rec = extract_blocked(curve, kind)
    dest = os.path.join(tmpdir, f"driving_{idx:05d}.csv")
    fileio.write_driving_csv(dest, rec)
    return dest


def cmd_kappa(args) -> int:
    if args.paths < 2:
        print("kappa: need at least 2 paths", file=sys.stderr)
        return EXIT_VALIDATION
    seeds = np.random.SeedSequence(args.seed).generate_state(args.paths)
    out = Path(args.out)
    recovered = []
    with tempfile.TemporaryDirectory(prefix="loewner_kappa_") as tmpdir:
        payloads = [(args.kappa, args.T, args.eps, int(s), args.kind, i, tmpdir)
                    for i, s in enumerate(seeds)]
        if args.jobs > 1:
            with ProcessPoolExecutor(max_workers=args.jobs) as pool:
                files = list(pool.map(_kappa_worker, payloads))
        else:
            files = [_kappa_worker(p) for p in payloads]
        recovered = [fileio.read_driving_csv(f) for f in files]
    grid = uniform_grid(recovered, args.grid_points)
    report = estimate_kappa(recovered, grid, seed=args.seed)
    payload = report.to_dict()
    payload["config"] = _resolved(args, ["kappa", "T", "eps", "paths", "seed",
                                         "kind", "jobs", "grid_points", "out"])
    fileio.write_json(out.with_suffix(".kappa.json"), payload)
    if not args.no_plot:
        vals = np.stack([resample_to_grid(p, grid) for p in recovered])
        plotting.plot_kappa_fit(grid, np.var(vals, axis=0, ddof=1),
                                report.kappa_hat, out.with_suffix(".kappa.png"),
                                title=f"kappa_hat = {report.kappa_hat:.4g} "
                                      f"(true {args.kappa:g})")
    print(f"kappa_hat = {report.kappa_hat:.6g} +- {report.stderr:.2g} "
          f"(r^2 = {report.r_squared:.4f}, {report.n_paths} paths)")
    return EXIT_OK


# ---------------------------------------------------------------------------
# bench

def _median_time(fn, reps):
    fn()  # warm cache / JIT
    times = []
    for _ in range(reps):
        t0 = time.perf_counter()
        fn()
        times.append(time.perf_counter() - t0)
    return float(np.median(times))


def _loglog_slope(sizes, secs) -> float:
    return float(np.polyfit(np.log(np.asarray(sizes, float)),
                            np.log(np.asarray(secs, float)), 1)[0])


def cmd_bench(args) -> int:
    sizes = _sizes(args.sizes)
    pp_sizes = _sizes(args.per_point_sizes)
    reps = args.reps
    rng_seed = args.seed
    timings: dict = {}
    slopes: dict = {}

    drivers = {N: brownian_driver(args.kappa, np.linspace(0.0, args.T, N + 1),
                                  rng_seed + N) for N in set(sizes + pp_sizes + [args.speedup_N])}

    # total forward cost
    fw_naive, fw_blocked = [], []
    for N in sizes:
        drv = drivers[N]
        fw_naive.append(_median_time(lambda: solve_naive(drv, args.kind), reps))
        fw_blocked.append(_median_time(
            lambda: solve_blocked(drv, args.kind, n=args.order_n, gate=args.gate_L), reps))
    timings["forward_naive"] = {"sizes": sizes, "seconds": fw_naive}
    timings["forward_blocked"] = {"sizes": sizes, "seconds": fw_blocked}
    slopes["forward_naive"] = _loglog_slope(sizes, fw_naive)
    slopes["forward_blocked"] = _loglog_slope(sizes, fw_blocked)

    # total inverse cost on forward-generated curves
    curves = {N: sanitize(solve_naive(drivers[N], args.kind).points, source="bench")
              for N in set(sizes + [args.speedup_N])}
    inv_naive, inv_blocked = [], []
    for N in sizes:
        cv = curves[N]
        inv_naive.append(_median_time(lambda: extract_naive(cv, args.kind), reps))
        inv_blocked.append(_median_time(
            lambda: extract_blocked(cv, args.kind, n=args.order_n, gate=args.gate_L), reps))
    timings["inverse_naive"] = {"sizes": sizes, "seconds": inv_naive}
    timings["inverse_blocked"] = {"sizes": sizes, "seconds": inv_blocked}
    slopes["inverse_naive"] = _loglog_slope(sizes, inv_naive)
    slopes["inverse_blocked"] = _loglog_slope(sizes, inv_blocked)

    # single-point cost from a prebuilt plan
    per_point = []
    pp_rng = np.random.default_rng(rng_seed)
    for N in pp_sizes:
        drv = drivers[N]
        maps = build_maps(drv, args.kind)
        plan = build_forward_plan(maps, default_block_size(N), args.order_n, args.gate_L)
        ks = pp_rng.integers(N // 2, N + 1, size=args.per_point_samples)

        def _eval_points():
            for k in ks:
                point_at(drv, int(k), plan)

        per_point.append(_median_time(_eval_points, reps) / len(ks))
    timings["forward_point"] = {"sizes": pp_sizes, "seconds": per_point}
    slopes["forward_point"] = _loglog_slope(pp_sizes, per_point)

    # speedup at the reference size: block size scanned, best wins
    N = args.speedup_N
    drv, cv = drivers[N], curves[N]
    root = default_block_size(N)
    scan = sorted({max(4, root // 6), max(4, root // 3), max(4, root // 2), root})
    t_fwd_naive = _median_time(lambda: solve_naive(drv, args.kind), reps)
    t_inv_naive = _median_time(lambda: extract_naive(cv, args.kind), reps)
    best_fwd = min(((_median_time(lambda: solve_blocked(
        drv, args.kind, block_size=b, n=args.order_n, gate=args.gate_L), reps), b)
        for b in scan), key=lambda p: p[0])
    best_inv = min(((_median_time(lambda: extract_blocked(
        cv, args.kind, block_size=b, n=args.order_n, gate=args.gate_L), reps), b)
        for b in scan), key=lambda p: p[0])
    speedup = {
        "N": N,
        "block_sizes_scanned": scan,
        "forward": {"naive_seconds": t_fwd_naive, "blocked_seconds": best_fwd[0],
                    "block_size": best_fwd[1], "factor": t_fwd_naive / best_fwd[0]},
        "inverse": {"naive_seconds": t_inv_naive, "blocked_seconds": best_inv[0],
                    "block_size": best_inv[1], "factor": t_inv_naive / best_inv[0]},
    }

    result = {"timings": timings, "slopes": slopes, "speedup": speedup,
              "config": _resolved(args, ["sizes", "per_point_sizes", "reps",
                                         "kappa", "T", "kind", "order_n",
                                         "gate_L", "seed", "speedup_N",
                                         "per_point_samples", "out"])}
    out = Path(args.out)
    fileio.write_json(out.with_suffix(".bench.json"), result)
    if not args.no_plot:
        plotting.plot_bench(result, out.with_suffix(".bench.png"))
    for name, s in slopes.items():
        print(f"slope {name}: {s:.3f}")
    print(f"speedup at N={N}: forward {speedup['forward']['factor']:.2f}x "
          f"(b={speedup['forward']['block_size']}), inverse "
          f"{speedup['inverse']['factor']:.2f}x (b={speedup['inverse']['block_size']})")
    return EXIT_OK


# ---------------------------------------------------------------------------

def _add_common(p, *, kind=True, series=False, plot=True):
    p.add_argument("--seed", type=int, default=_env_default("seed", int, 0))
    if kind:
        p.add_argument("--kind", choices=[k.value for k in SlitKind],
                       default=_env_default("kind", str, "vertical"))
    if series:
        p.add_argument("--block-b", dest="block_b", type=int,
                       default=_env_default("block_b", int, 0),
                       help="block size (0 = ceil(sqrt(N)))")
        p.add_argument("--order-n", dest="order_n", type=int,
                       default=_env_default("order_n", int, 12))
        p.add_argument("--gate-L", dest="gate_L", type=float,
                       default=_env_default("gate_l", float, 4.0))
    if plot:
        p.add_argument("--no-plot", action="store_true",
                       help="skip the PNG figure next to the data files")


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(
        prog="loewner",
        description="Chordal Loewner toolkit: traces from driving functions, "
                    "driving functions from curves, and benchmarks.",
        epilog=f"Flag defaults honor environment variables {ENV_PREFIX}<FLAG>.")
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("trace", help="sample an SLE trace adaptively")
    p.add_argument("--kappa", type=float, default=_env_default("kappa", float, 8.0 / 3.0))
    p.add_argument("--T", type=float, default=_env_default("t", float, 1.0))
    p.add_argument("--eps", type=float, default=_env_default("eps", float, None),
                   help="spatial resolution (default 0.01*sqrt(2T))")
    p.add_argument("--n0", type=int, default=_env_default("n0", int, 64))
    p.add_argument("--max-rounds", type=int, default=24)
    p.add_argument("--max-points", type=int, default=2_000_000)
    p.add_argument("--out", default=_env_default("out", str, "trace"))
    _add_common(p)
    p.set_defaults(func=cmd_trace)

    p = sub.add_parser("forward", help="driving CSV -> trace CSV")
    p.add_argument("--in", dest="infile", required=True)
    p.add_argument("--mode", choices=["naive", "blocked", "both"], default="blocked")
    p.add_argument("--out", default=_env_default("out", str, "forward"))
    _add_common(p, series=True)
    p.set_defaults(func=cmd_forward)

    p = sub.add_parser("extract", help="curve CSV -> driving CSV")
    p.add_argument("--in", dest="infile", required=True)
    p.add_argument("--mode", choices=["naive", "blocked", "both"], default="blocked")
    p.add_argument("--out", default=_env_default("out", str, "extract"))
    _add_common(p, series=True)
    p.set_defaults(func=cmd_extract)

    p = sub.add_parser("kappa", help="ensemble kappa estimation pipeline")
    p.add_argument("--kappa", type=float, default=_env_default("kappa", float, 8.0 / 3.0))
    p.add_argument("--T", type=float, default=_env_default("t", float, 1.0))
    p.add_argument("--eps", type=float, default=_env_default("eps", float, None))
    p.add_argument("--paths", type=int, default=_env_default("paths", int, 50))
    p.add_argument("--jobs", type=int, default=_env_default("jobs", int, 1))
    p.add_argument("--grid-points", type=int, default=100)
    p.add_argument("--out", default=_env_default("out", str, "kappa"))
    _add_common(p)
    p.set_defaults(func=cmd_kappa)

    p = sub.add_parser("bench", help="timing matrices and scaling exponents")
    p.add_argument("--sizes", default=_env_default("sizes", str, "2500,5000,10000,20000"))
    p.add_argument("--per-point-sizes", dest="per_point_sizes",
                   default="1000,10000,100000")
    p.add_argument("--per-point-samples", dest="per_point_samples", type=int, default=48)
    p.add_argument("--reps", type=int, default=5)
    p.add_argument("--kappa", type=float, default=_env_default("kappa", float, 8.0 / 3.0))
    p.add_argument("--T", type=float, default=_env_default("t", float, 1.0))
    p.add_argument("--N", dest="speedup_N", type=int,
                   default=_env_default("n", int, 10000),
                   help="reference size for the naive-vs-blocked speedup")
    p.add_argument("--out", default=_env_default("out", str, "bench"))
    _add_common(p, series=True)
    p.set_defaults(func=cmd_bench)
    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except FileNotFoundError as exc:
        print(f"loewner: {exc}", file=sys.stderr)
        return EXIT_VALIDATION
    except ValueError as exc:
        print(f"loewner: {exc}", file=sys.stderr)
        return EXIT_VALIDATION
    except ConvergenceError as exc:
        print(f"loewner: {exc}", file=sys.stderr)
        return EXIT_CAP


if __name__ == "__main__":
    sys.exit(main())
