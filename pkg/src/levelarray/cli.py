"""Command line entry point.

Usage:
    levelarray bench --algo level,random --threads 1,4,8 --emulated 8000 --prefill 50
    levelarray sim run --config FILE [--trace FILE]
    levelarray sim heal --n 65536 --fill b0=0.25,b1=0.5 --B 2 --ops 100000 --interval 4000
    levelarray bounds --n 65536 [--c 16] [--format json|csv]

Exit status is 0 on success, 1 when a run finds a correctness violation,
2 on bad arguments or configuration.
"""
from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from .analysis import bound_constants
from .baselines import ALGORITHMS, make_algorithm
from .bench import BenchConfig, emit_results, run_sweep
from .errors import LevelArrayError
from .rng import RngSpec
from .simulator import (
    CompactnessSpec,
    check_collect_validity,
    check_uniqueness,
    compactness_violations,
    parse_config,
    parse_fill,
    run_healing_experiment,
    run_schedule,
)


def _int_list(text: str) -> list[int]:
    try:
        return [int(x) for x in text.split(",") if x.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}") from None


def _algo_list(text: str) -> list[str]:
    algos = [x.strip() for x in text.split(",") if x.strip()]
    bad = [a for a in algos if a not in ALGORITHMS]
    if bad:
        raise argparse.ArgumentTypeError(f"unknown algorithm(s) {bad}; choose from {ALGORITHMS}")
    return algos


def _emit(text: str, path: str | None) -> None:
    if path:
        Path(path).write_text(text, encoding="utf-8")
    else:
        sys.stdout.write(text)


def cmd_bench(args) -> int:
    cfg = BenchConfig(
        algo=args.algo[0], threads=args.threads[0], emulated=args.emulated, slots=args.slots,
        prefill=args.prefill, seconds=args.seconds, ops=args.ops, warmup=args.warmup,
        seed=args.seed, rng=args.rng, pad_cells=args.pad_cells, debug=args.debug,
        probe_count=args.probes, repetitions=args.repetitions,
    )
    results = run_sweep(cfg, args.threads, args.algo)
    emit_results(results, args.format, args.out)
    if args.out:
        # keep a human-readable summary on the terminal when the data goes to a file
        sys.stdout.write(emit_results(results, "csv"))
    else:
        sys.stdout.write(emit_results(results, args.format))
    return 1 if any(r.violations for r in results) else 0


def cmd_sim_run(args) -> int:
    cfg = parse_config(Path(args.config).read_text(encoding="utf-8"))
    sched = cfg.schedule
    slots = cfg.slots if cfg.slots is not None else 2 * sched.n
    if cfg.algo == "level":
        from .core import LevelArray
        algo = LevelArray(sched.n, cfg.probes, cells="flag")
    else:
        algo = make_algorithm(cfg.algo, slots, cells="flag")
    trace = run_schedule(algo, sched, cfg.rng, sample_every=args.sample_every)
    dup = check_uniqueness(trace)
    collect_problems = check_collect_validity(trace)
    compact = (compactness_violations(trace, CompactnessSpec(sched.B), sched.n)
               if sched.B is not None else [])
    summary = {
        "algo": trace.algo,
        "n": trace.n,
        "processes": sched.process_count,
        "rng": cfg.rng.to_dict(),
        "steps_executed": trace.steps_executed,
        "ops_completed": trace.ops_completed,
        "gets": len(trace.gets()),
        "frees": len(trace.frees()),
        "collects": len(trace.collects()),
        "max_probes": max((e[5] for e in trace.gets()), default=0),
        "uniqueness_violation": None if dup is None else
            {"time": dup.time, "name": dup.name, "holders": list(dup.holders), "kind": dup.kind},
        "collect_problems": collect_problems,
        "compactness_violations": len(compact),
        "final_holders": {str(p): nm for p, nm in sorted(trace.final_holders.items())},
    }
    if args.trace:
        Path(args.trace).write_text(trace.to_json(indent=2) + "\n", encoding="utf-8")
    _emit(json.dumps(summary, sort_keys=True, indent=2) + "\n", args.out)
    return 1 if dup is not None or collect_problems else 0


def cmd_sim_heal(args) -> int:
    report = run_healing_experiment(
        args.n, parse_fill(args.fill), CompactnessSpec(args.B), args.ops, args.interval,
        rng_spec=RngSpec(args.rng, args.seed), probe_counts=args.probes,
        processes=args.processes, interval=args.window,
    )
    if args.histogram:
        Path(args.histogram).write_text(report.histogram_csv(), encoding="utf-8")
    _emit(report.to_json() + "\n", args.out)
    return 0


def cmd_bounds(args) -> int:
    table = bound_constants(args.n, args.c, alpha=args.alpha, gamma=args.gamma, B=args.B)
    text = table.to_json() + "\n" if args.format == "json" else table.to_csv()
    _emit(text, args.out)
    return 0


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="levelarray", description="Batched renaming array toolkit.")
    sub = p.add_subparsers(dest="command", required=True)

    b = sub.add_parser("bench", help="multithreaded register/deregister benchmark")
    b.add_argument("--algo", type=_algo_list, default=["level"],
                   help="algorithm(s), comma separated: level,random,linear,det")
    b.add_argument("--threads", type=_int_list, default=[8], help="thread count(s), comma separated")
    b.add_argument("--emulated", type=int, default=8000, help="emulated capacity N")
    b.add_argument("--slots", type=int, default=None, help="array size L (default 2N)")
    b.add_argument("--prefill", type=float, default=50.0, help="prefill percentage")
    b.add_argument("--seconds", type=float, default=10.0, help="measured duration")
    b.add_argument("--ops", type=int, default=None, help="total op budget instead of a duration")
    b.add_argument("--warmup", type=float, default=1.0, help="seconds excluded before measuring")
    b.add_argument("--seed", type=int, default=1)
    b.add_argument("--rng", default="lehmer", help="lehmer | marsaglia")
    b.add_argument("--pad-cells", action="store_true", help="pad cells to separate cache lines")
    b.add_argument("--debug", action="store_true", help="enable the ownership checker")
    b.add_argument("--probes", type=int, default=1, help="trials per batch (level only)")
    b.add_argument("--repetitions", type=int, default=1)
    b.add_argument("--out", default=None, help="output file (default stdout)")
    b.add_argument("--format", choices=("csv", "json"), default="csv")
    b.set_defaults(func=cmd_bench)

    sim = sub.add_parser("sim", help="deterministic simulator")
    simsub = sim.add_subparsers(dest="sim_command", required=True)

    r = simsub.add_parser("run", help="replay a schedule config and check it")
    r.add_argument("--config", required=True)
    r.add_argument("--sample-every", type=int, default=None)
    r.add_argument("--trace", default=None, help="write the full JSON trace here")
    r.add_argument("--out", default=None, help="summary output file (default stdout)")
    r.set_defaults(func=cmd_sim_run)

    h = simsub.add_parser("heal", help="inject an unbalanced state and watch it recover")
    h.add_argument("--n", type=int, required=True)
    h.add_argument("--fill", default="b0=0.25,b1=0.5")
    h.add_argument("--B", type=float, default=2.0, help="compactness exponent")
    h.add_argument("--ops", type=int, default=100_000)
    h.add_argument("--interval", type=int, default=4000, help="snapshot every this many ops")
    h.add_argument("--probes", type=int, default=16, help="trials per batch")
    h.add_argument("--processes", type=int, default=None)
    h.add_argument("--window", type=int, default=None,
                   help="step length of the Y_j windows (default: realised compact bound)")
    h.add_argument("--seed", type=int, default=1)
    h.add_argument("--rng", default="lehmer")
    h.add_argument("--histogram", default=None, help="write op_count,batch_index,occupancy CSV here")
    h.add_argument("--out", default=None)
    h.set_defaults(func=cmd_sim_heal)

    bd = sub.add_parser("bounds", help="print the per-batch constants for capacity n")
    bd.add_argument("--n", type=int, required=True)
    bd.add_argument("--c", type=int, default=16, help="trials per batch")
    bd.add_argument("--alpha", type=float, default=1)
    bd.add_argument("--gamma", type=float, default=1)
    bd.add_argument("--B", type=float, default=2)
    bd.add_argument("--format", choices=("json", "csv"), default="json")
    bd.add_argument("--out", default=None)
    bd.set_defaults(func=cmd_bounds)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (LevelArrayError, ValueError, OSError) as exc:
        print(f"levelarray: error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
