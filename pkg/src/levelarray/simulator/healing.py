"""Self-healing experiment: start from an overcrowded array, churn, watch it rebalance."""
from __future__ import annotations

import bisect
import csv
import io
import json
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Mapping, Sequence

from ..core import LevelArray
from ..errors import InvalidConfiguration
from ..rng import RngSpec
from .checks import realized_compact_bound
from .engine import BalanceReport, ExecutionTrace, run_schedule
from .schedule import CompactnessSpec, generate_compact_schedule

__all__ = [
    "HealingReport",
    "Snapshot",
    "convergence",
    "inject_unbalanced_state",
    "interval_indicators",
    "parse_fill",
    "run_healing_experiment",
]

# stream index for injection cell choices, disjoint from process streams
INJECT_STREAM = (1 << 62) + 1


def _fill_count(fraction: float, size: int) -> int:
    f = Fraction(str(fraction))
    if not 0 <= f <= 1:
        raise InvalidConfiguration(f"fill fraction {fraction} outside [0, 1]")
    return int(f * size)


def inject_unbalanced_state(array: LevelArray, fill: Mapping[int, float],
                            owners: Sequence[int] | int, rng) -> dict[int, int]:
    """Directly acquire ``floor(fraction * size)`` random cells of each listed batch.

    The held names are handed to the virtual owners in order (``owners``
    may be a count, meaning processes ``0 .. owners-1``).  Returns
    ``{owner: name}``.  Owners left over get nothing.
    """
    lay = array.layout
    plan = []
    for batch, frac in sorted(fill.items()):
        if not 0 <= batch < lay.batch_count:
            raise InvalidConfiguration(f"batch {batch} does not exist (m={lay.batch_count})")
        plan.append((batch, _fill_count(frac, lay.batch_sizes[batch])))
    total = sum(k for _, k in plan)
    owner_ids = list(range(owners)) if isinstance(owners, int) else list(owners)
    if total > len(owner_ids):
        raise InvalidConfiguration(f"injection needs {total} owners, only {len(owner_ids)} given")

    mapping: dict[int, int] = {}
    it = iter(owner_ids)
    for batch, k in plan:
        cells = list(lay.batch_range(batch))
        # partial Fisher-Yates: first k entries become a uniform k-subset
        for i in range(k):
            j = i + rng.next_in_range(0, len(cells) - 1 - i)
            cells[i], cells[j] = cells[j], cells[i]
        for cell in cells[:k]:
            if not array.cells.test_and_set(cell):
                raise InvalidConfiguration(f"cell {cell} of batch {batch} is already held")
            mapping[next(it)] = lay.name_of(cell)
    return mapping


def parse_fill(text: str) -> dict[int, float]:
    """``"b0=0.25,b1=0.5"`` -> ``{0: 0.25, 1: 0.5}``."""
    out = {}
    for part in text.split(","):
        part = part.strip()
        if not part:
            continue
        key, eq, value = part.partition("=")
        key = key.strip().lower()
        if not eq or not key.lstrip("b").isdigit():
            raise InvalidConfiguration(f"bad fill entry {part!r}; expected b<index>=<fraction>")
        out[int(key.lstrip("b"))] = float(value)
    return out


@dataclass
class Snapshot:
    op_count: int
    time: int
    occupancy: list[int]
    backup: int
    fully_balanced: bool
    injected_held: int = 0


def convergence(trace: ExecutionTrace) -> tuple[int | None, int | None]:
    """``(op_count, time)`` from which the array stays fully balanced to the end."""
    top = trace.monitored_top
    tl = trace.balance_timeline
    if not tl or tl[-1][2] != top:
        return None, None
    i = len(tl) - 1
    while i > 0 and tl[i - 1][2] == top:
        i -= 1
    return tl[i][1], tl[i][0]


def interval_indicators(trace: ExecutionTrace, interval: int) -> list[bool | None]:
    """``Y_j`` for each monitored batch ``j``.

    ``Y_j`` holds when, for every ``i <= j``, the array stayed balanced up to
    ``i`` throughout the step interval ``[i * interval, (i + 1) * interval)``.
    Intervals starting past the end of the trace give ``None``; an interval
    cut off by the end of the trace is judged on its observed part.
    """
    if interval < 1:
        raise ValueError("interval must be positive")
    top = trace.monitored_top
    tl = trace.balance_timeline
    end = trace.steps_executed
    out: list[bool | None] = []
    ok = True
    for i in range(top + 1):
        lo, hi = i * interval, (i + 1) * interval
        if lo > end or (lo == end and end > 0):
            out.append(None)
            continue
        # balanced prefix in force at time lo, then every change inside the interval
        current = tl[0][2]
        worst = None
        for t, _, b in tl:
            if t <= lo:
                current = b
            elif t < hi:
                worst = b if worst is None else min(worst, b)
        worst = current if worst is None else min(worst, current)
        ok = ok and worst >= i
        out.append(ok)
    return out


@dataclass
class HealingReport:
    n: int
    fill: dict[int, float]
    B: float
    probe_count: int
    processes: int
    total_ops: int
    snapshot_interval: int
    rng: RngSpec
    injected: dict[int, int]
    snapshots: list[Snapshot] = field(default_factory=list)
    convergence_op: int | None = None
    convergence_time: int | None = None
    interval_steps: int = 0
    indicators: list[bool | None] = field(default_factory=list)
    initial: BalanceReport | None = None
    final: BalanceReport | None = None
    ops_completed: int = 0
    steps_executed: int = 0
    injected_freed_by_convergence: dict[int, int] = field(default_factory=dict)
    drained_op: int | None = None     # first snapshot with every injected name released
    trace: ExecutionTrace | None = field(default=None, repr=False)

    @property
    def converged(self) -> bool:
        return self.convergence_op is not None

    def to_dict(self) -> dict:
        return {
            "n": self.n,
            "fill": {f"b{k}": v for k, v in sorted(self.fill.items())},
            "B": self.B,
            "probe_count": self.probe_count,
            "processes": self.processes,
            "total_ops": self.total_ops,
            "snapshot_interval": self.snapshot_interval,
            "rng": self.rng.to_dict(),
            "injected": {f"b{k}": v for k, v in sorted(self.injected.items())},
            "convergence_op": self.convergence_op,
            "convergence_time": self.convergence_time,
            "drained_op": self.drained_op,
            "interval_steps": self.interval_steps,
            "indicators": self.indicators,
            "ops_completed": self.ops_completed,
            "steps_executed": self.steps_executed,
            "injected_freed_by_convergence": {
                f"b{k}": v for k, v in sorted(self.injected_freed_by_convergence.items())},
            "initial": self.initial.to_dict() if self.initial else None,
            "final": self.final.to_dict() if self.final else None,
            "snapshots": [
                {"op_count": s.op_count, "time": s.time, "occupancy": s.occupancy,
                 "backup": s.backup, "fully_balanced": s.fully_balanced,
                 "injected_held": s.injected_held}
                for s in self.snapshots
            ],
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True, indent=2)

    def histogram_csv(self) -> str:
        """One row per (snapshot, batch): ``op_count,batch_index,occupancy``."""
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["op_count", "batch_index", "occupancy"])
        for s in self.snapshots:
            for j, occ in enumerate(s.occupancy):
                w.writerow([s.op_count, j, occ])
        return buf.getvalue()


def run_healing_experiment(n: int, fill: Mapping[int, float],
                           compactness: CompactnessSpec = CompactnessSpec(2),
                           total_ops: int = 100_000, snapshot_interval: int = 4000, *,
                           rng_spec: RngSpec = RngSpec("lehmer", 1), probe_counts: int = 16,
                           processes: int | None = None, hold: tuple[int, int] = (1, 8),
                           idle: tuple[int, int] = (0, 8), release_rounds: int = 8,
                           interval: int | None = None) -> HealingReport:
    """Inject an unbalanced state, drive a compact churn, report the recovery.

    Every injected name belongs to its own virtual process, which frees it
    within ``release_rounds`` scheduling rounds and then keeps churning
    (get, ``hold`` calls, free, ``idle`` calls).  ``processes`` defaults to
    the number of injected names, or ``n // 2`` when nothing is injected.
    ``interval`` is the step length of the windows behind the ``Y_j``
    indicators; by default it is the compact bound actually realised by the
    run, since ``n**B`` dwarfs any run that fits on a desk.
    """
    array = LevelArray(n, probe_counts, cells="flag")
    lay = array.layout
    injected_counts = {b: _fill_count(f, lay.batch_sizes[b]) for b, f in fill.items()
                       if 0 <= b < lay.batch_count}
    n_inj = sum(injected_counts.values())
    P = processes if processes is not None else (n_inj or lay.capacity // 2)
    if P < n_inj:
        raise InvalidConfiguration(f"{P} processes cannot own {n_inj} injected names")

    holders = inject_unbalanced_state(array, fill, P, rng_spec.stream(INJECT_STREAM))

    mean_cycle = 1 + sum(hold) / 2 + 1 + sum(idle) / 2
    ops_per_round = max(1.0, 2 * P / mean_cycle)
    rounds = int(2 * total_ops / ops_per_round) + release_rounds + 8
    schedule = generate_compact_schedule(
        lay.capacity, P, rounds * P, compactness.B, rng_spec, probe_counts=probe_counts,
        hold=hold, idle=idle, initially_holding=len(holders), release_rounds=release_rounds)
    trace = run_schedule(array, schedule, rng_spec, sample_every=snapshot_interval,
                         max_ops=total_ops, initial_holders=holders, validate=False)

    conv_op, conv_time = convergence(trace)
    W = interval if interval is not None else max(1, realized_compact_bound(trace))
    report = HealingReport(
        n=lay.capacity, fill=dict(fill), B=compactness.B, probe_count=probe_counts,
        processes=P, total_ops=total_ops, snapshot_interval=snapshot_interval, rng=rng_spec,
        injected=injected_counts, convergence_op=conv_op, convergence_time=conv_time,
        interval_steps=W, indicators=interval_indicators(trace, W),
        ops_completed=trace.ops_completed, steps_executed=trace.steps_executed,
    )
    first_free: dict[int, int] = {}
    for e in trace.events:
        if e[0] == "free" and e[1] in holders and e[1] not in first_free:
            first_free[e[1]] = e[2]
    released = sorted(first_free.values())
    report.snapshots = [
        Snapshot(s.op_count, s.time, s.occupancy, s.backup, s.fully_balanced,
                 len(holders) - bisect.bisect_left(released, s.time))
        for s in trace.samples]
    report.drained_op = next((s.op_count for s in report.snapshots if s.injected_held == 0), None)
    if trace.samples:
        report.initial = trace.samples[0]
        report.final = trace.samples[-1]
    if conv_time is not None:
        inj_batch = {pid: lay.batch_of_cell(lay.cell_of(nm)) for pid, nm in holders.items()}
        freed: dict[int, int] = dict.fromkeys(injected_counts, 0)
        for e in trace.events:
            if e[0] == "free" and e[2] < conv_time and e[1] in inj_batch:
                # an injected process's first free releases its injected name
                freed[inj_batch.pop(e[1])] += 1
        report.injected_freed_by_convergence = freed
    report.trace = trace
    return report
