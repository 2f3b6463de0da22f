"""Multithreaded register/deregister benchmark.

Each of ``threads`` workers emulates ``N / threads`` processes.  A worker
first performs ``prefill`` percent of its registrations without releasing
anything, then loops: register until it holds ``N / threads`` names, then
deregister (most recent first) back down to the prefill level.  Only the
main loop is measured, and the first ``warmup`` seconds of it are dropped.

Under CPython the workers share one interpreter lock, so throughput numbers
are about relative cost rather than parallel speedup; probe counts, which
are what the algorithms are compared on, are unaffected.
"""
from __future__ import annotations

import csv
import io
import json
import math
import os
import threading
import time
import warnings
from dataclasses import asdict, dataclass, field, replace
from typing import Sequence

import jsonschema

from .baselines import ALGORITHMS, make_algorithm
from .core import BACKUP, LevelArray
from .errors import CapacityExhausted, InvalidConfiguration
from .rng import RngSpec

__all__ = [
    "CSV_HEADER",
    "RESULT_SCHEMA",
    "BenchConfig",
    "BenchResult",
    "emit_results",
    "run_bench",
    "run_sweep",
]

CSV_HEADER = ("algo", "threads", "N", "L", "prefill", "throughput", "avg_probes",
              "stddev_probes", "max_probes", "backup_uses")

# how many operations a worker runs between clock reads
_CHECK_EVERY = 64


@dataclass
class BenchConfig:
    algo: str = "level"
    threads: int = 8
    emulated: int = 8000
    slots: int | None = None          # L; defaults to 2N
    prefill: float = 50.0             # percent of each worker's registrations done up front
    seconds: float | None = 10.0
    ops: int | None = None            # total op budget; overrides seconds when set
    warmup: float = 1.0
    seed: int = 1
    rng: str = "lehmer"
    pad_cells: bool = False
    debug: bool = False
    probe_count: int = 1
    repetitions: int = 1

    @property
    def L(self) -> int:
        return self.slots if self.slots is not None else 2 * self.emulated

    @property
    def per_thread(self) -> int:
        return -(-self.emulated // self.threads)

    @property
    def effective_emulated(self) -> int:
        """``N`` rounded up to a multiple of the thread count."""
        return self.per_thread * self.threads

    def validate(self) -> None:
        if self.algo not in ALGORITHMS:
            raise InvalidConfiguration(f"unknown algorithm {self.algo!r}; expected one of {ALGORITHMS}")
        if self.threads < 1:
            raise InvalidConfiguration("threads must be at least 1")
        if self.emulated < self.threads:
            raise InvalidConfiguration("emulated capacity N must be at least the thread count")
        if self.L < 2 * self.effective_emulated:
            raise InvalidConfiguration(
                f"slots L={self.L} must be at least 2N={2 * self.effective_emulated}")
        if not 0 <= self.prefill <= 100:
            raise InvalidConfiguration("prefill must be a percentage in [0, 100]")
        if self.ops is None and (self.seconds is None or self.seconds <= 0):
            raise InvalidConfiguration("give a positive duration or an op budget")
        if self.ops is not None and self.ops < 1:
            raise InvalidConfiguration("op budget must be positive")
        if self.warmup < 0 or self.repetitions < 1 or self.probe_count < 1:
            raise InvalidConfiguration("warmup must be >= 0, repetitions and probe_count >= 1")
        RngSpec(self.rng, self.seed)  # checks kind and seed


@dataclass
class _ThreadStats:
    ops: int = 0
    gets: int = 0
    probe_sum: int = 0
    probe_sq: int = 0
    max_probes: int = 0
    backup_uses: int = 0
    hist: dict = field(default_factory=dict)
    batches: dict = field(default_factory=dict)


@dataclass
class BenchResult:
    config: BenchConfig
    throughput: float
    avg_probes: float
    stddev_probes: float
    max_probes: float            # per-thread maxima averaged over threads and repetitions
    global_max_probes: int
    backup_uses: int
    total_ops: int
    total_gets: int
    elapsed: float
    probe_histogram: dict[int, int]
    batch_histogram: list[int]   # level only: gets won per batch, backup last
    violations: int = 0
    per_thread: list[dict] = field(default_factory=list)
    notes: list[str] = field(default_factory=list)

    def csv_row(self) -> list:
        c = self.config
        return [c.algo, c.threads, c.effective_emulated, c.L, f"{c.prefill:g}",
                f"{self.throughput:.1f}", f"{self.avg_probes:.6f}", f"{self.stddev_probes:.6f}",
                f"{self.max_probes:.3f}", self.backup_uses]

    def to_dict(self) -> dict:
        return {
            "config": asdict(self.config) | {"L": self.config.L,
                                             "N": self.config.effective_emulated},
            "throughput": self.throughput,
            "avg_probes": self.avg_probes,
            "stddev_probes": self.stddev_probes,
            "max_probes": self.max_probes,
            "global_max_probes": self.global_max_probes,
            "backup_uses": self.backup_uses,
            "total_ops": self.total_ops,
            "total_gets": self.total_gets,
            "elapsed": self.elapsed,
            "probe_histogram": {str(k): v for k, v in sorted(self.probe_histogram.items())},
            "batch_histogram": list(self.batch_histogram),
            "violations": self.violations,
            "per_thread": self.per_thread,
            "notes": list(self.notes),
        }


def _worker(tid: int, array, rng, cfg: BenchConfig, budget: int | None, start: threading.Barrier,
            clock: list, stop: list, out: list, errors: list) -> None:
    st = _ThreadStats()
    get, free = array.get, array.free
    hi = cfg.per_thread
    lo = min(math.floor(cfg.prefill / 100 * hi), hi - 1)
    tag = tid if cfg.debug else None
    held: list[int] = []
    level = isinstance(array, LevelArray)
    try:
        for _ in range(lo):
            held.append(get(rng, tag)[0])
    except CapacityExhausted as exc:
        errors.append(exc)
        stop[0] = True
    start.wait()
    t_measure = clock[0]
    measuring = cfg.warmup == 0
    hist = st.hist
    batches = st.batches
    check = _CHECK_EVERY
    growing = True
    try:
        while not stop[0]:
            if growing:
                name, ps = get(rng, tag)
                held.append(name)
                if measuring:
                    p = ps.probes
                    st.gets += 1
                    st.probe_sum += p
                    st.probe_sq += p * p
                    if p > st.max_probes:
                        st.max_probes = p
                    hist[p] = hist.get(p, 0) + 1
                    if level:
                        b = ps.batch_reached
                        batches[b] = batches.get(b, 0) + 1
                    if ps.used_backup:
                        st.backup_uses += 1
                if len(held) >= hi:
                    growing = False
            else:
                free(held.pop(), tag)
                if len(held) <= lo:
                    growing = True
            if measuring:
                st.ops += 1
                if budget is not None and st.ops >= budget:
                    break
            check -= 1
            if check == 0:
                check = _CHECK_EVERY
                now = time.perf_counter()
                if not measuring and now >= t_measure:
                    measuring = True
                if budget is None and now >= clock[1]:
                    break
    except CapacityExhausted as exc:
        errors.append(exc)
        stop[0] = True
    except Exception as exc:  # misuse detected by the debug checker, among others
        errors.append(exc)
        stop[0] = True
    out[tid] = st


def _run_once(cfg: BenchConfig, rep: int) -> tuple[list[_ThreadStats], float, object]:
    array = make_algorithm(cfg.algo, cfg.L, cells="lock", probe_counts=cfg.probe_count,
                           pad=cfg.pad_cells, debug=cfg.debug)
    spec = RngSpec(cfg.rng, cfg.seed)
    n = cfg.threads
    budget = None if cfg.ops is None else -(-cfg.ops // n)
    clock = [0.0, math.inf]
    stop = [False]
    out: list = [None] * n
    errors: list = []
    marks = {}

    def started():
        # runs once, in the last worker to reach the barrier
        now = time.perf_counter()
        clock[0] = now + cfg.warmup
        clock[1] = clock[0] + (cfg.seconds or 0.0)
        marks["t0"] = now

    start = threading.Barrier(n, action=started)
    workers = [threading.Thread(target=_worker, name=f"bench-{i}",
                                args=(i, array, spec.stream(rep * n + i), cfg, budget, start, clock,
                                      stop, out, errors))
               for i in range(n)]
    for w in workers:
        w.start()
    for w in workers:
        w.join()
    end = time.perf_counter()
    if errors:
        raise errors[0]
    measured = end - max(clock[0], marks["t0"])
    return out, max(measured, 1e-9), array


def run_bench(config: BenchConfig) -> BenchResult:
    """Run ``config.repetitions`` timed runs and aggregate their statistics."""
    config.validate()
    notes = []
    cpus = os.cpu_count() or 1
    if config.threads > cpus:
        msg = (f"{config.threads} threads on {cpus} hardware thread(s): "
               "throughput is not meaningful")
        warnings.warn(msg, RuntimeWarning, stacklevel=2)
        notes.append(msg)

    all_stats: list[_ThreadStats] = []
    elapsed = 0.0
    violations = 0
    per_rep_throughput = []
    batch_count = None
    for rep in range(config.repetitions):
        stats, secs, array = _run_once(config, rep)
        all_stats.extend(stats)
        elapsed += secs
        per_rep_throughput.append(sum(s.ops for s in stats) / secs)
        if array.checker is not None:
            violations += len(array.checker.violations)
        if isinstance(array, LevelArray):
            batch_count = array.layout.batch_count

    gets = sum(s.gets for s in all_stats)
    total = sum(s.probe_sum for s in all_stats)
    sq = sum(s.probe_sq for s in all_stats)
    avg = total / gets if gets else 0.0
    var = max(0.0, sq / gets - avg * avg) if gets else 0.0
    hist: dict[int, int] = {}
    for s in all_stats:
        for k, v in s.hist.items():
            hist[k] = hist.get(k, 0) + v
    batch_hist: list[int] = []
    if batch_count is not None:
        batch_hist = [0] * (batch_count + 1)
        for s in all_stats:
            for b, v in s.batches.items():
                batch_hist[-1 if b == BACKUP else b] += v
    active = [s for s in all_stats if s.gets]
    return BenchResult(
        config=config,
        throughput=sum(per_rep_throughput) / len(per_rep_throughput),
        avg_probes=avg,
        stddev_probes=math.sqrt(var),
        max_probes=sum(s.max_probes for s in active) / len(active) if active else 0.0,
        global_max_probes=max((s.max_probes for s in all_stats), default=0),
        backup_uses=sum(s.backup_uses for s in all_stats),
        total_ops=sum(s.ops for s in all_stats),
        total_gets=gets,
        elapsed=elapsed,
        probe_histogram=hist,
        batch_histogram=batch_hist,
        violations=violations,
        per_thread=[{"ops": s.ops, "gets": s.gets, "max_probes": s.max_probes,
                     "avg_probes": s.probe_sum / s.gets if s.gets else 0.0}
                    for s in all_stats],
        notes=notes,
    )


def run_sweep(config: BenchConfig, threads: Sequence[int] | None = None,
              algos: Sequence[str] | None = None) -> list[BenchResult]:
    """One run per (algo, thread count) pair, algo-major."""
    out = []
    for algo in algos or [config.algo]:
        for t in threads or [config.threads]:
            out.append(run_bench(replace(config, algo=algo, threads=t)))
    return out


RESULT_SCHEMA = {
    "type": "object",
    "required": ["results"],
    "properties": {
        "results": {
            "type": "array",
            "items": {
                "type": "object",
                "required": ["config", "throughput", "avg_probes", "stddev_probes", "max_probes",
                             "global_max_probes", "backup_uses", "total_ops", "total_gets",
                             "probe_histogram", "batch_histogram", "violations"],
                "properties": {
                    "config": {
                        "type": "object",
                        "required": ["algo", "threads", "N", "L", "prefill", "seed", "rng"],
                        "properties": {
                            "algo": {"enum": list(ALGORITHMS)},
                            "threads": {"type": "integer", "minimum": 1},
                            "N": {"type": "integer", "minimum": 1},
                            "L": {"type": "integer", "minimum": 2},
                            "prefill": {"type": "number", "minimum": 0, "maximum": 100},
                        },
                    },
                    "throughput": {"type": "number", "minimum": 0},
                    "avg_probes": {"type": "number", "minimum": 0},
                    "stddev_probes": {"type": "number", "minimum": 0},
                    "max_probes": {"type": "number", "minimum": 0},
                    "global_max_probes": {"type": "integer", "minimum": 0},
                    "backup_uses": {"type": "integer", "minimum": 0},
                    "total_ops": {"type": "integer", "minimum": 0},
                    "total_gets": {"type": "integer", "minimum": 0},
                    "probe_histogram": {"type": "object",
                                        "additionalProperties": {"type": "integer"}},
                    "batch_histogram": {"type": "array", "items": {"type": "integer"}},
                    "violations": {"type": "integer", "minimum": 0},
                },
            },
        },
    },
}


def emit_results(results: BenchResult | Sequence[BenchResult], fmt: str = "csv",
                 path: str | os.PathLike | None = None) -> str:
    """Render results as CSV (one row per run) or schema-checked JSON; write to ``path`` if given."""
    if isinstance(results, BenchResult):
        results = [results]
    if fmt == "csv":
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(CSV_HEADER)
        for r in results:
            w.writerow(r.csv_row())
        text = buf.getvalue()
    elif fmt == "json":
        doc = {"results": [r.to_dict() for r in results]}
        jsonschema.validate(doc, RESULT_SCHEMA)
        text = json.dumps(doc, sort_keys=True, indent=2) + "\n"
    else:
        raise InvalidConfiguration(f"unknown output format {fmt!r}; expected csv or json")
    if path is not None:
        with open(path, "w", encoding="utf-8") as fh:
            fh.write(text)
    return text
