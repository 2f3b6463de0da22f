"""Deterministic step-by-step replay of a schedule against a renaming array.

One schedule entry is one shared-memory step of the named process:

* a get performs one test-and-set per step, drawing that probe's randomness
  at the step, and is linearized at its winning test-and-set;
* a free is a single reset step (its linearization point);
* a collect reads one cell per step, left to right;
* a call is one step that touches nothing.

Time ``t`` means "after the first ``t`` steps": an event recorded at step
index ``s`` is visible from time ``s + 1`` on, and time 0 is the initial
state.
"""
from __future__ import annotations

import json
from dataclasses import dataclass, field
from fractions import Fraction

from ..analysis import monitored_batches, overcrowd_threshold
from ..core import BACKUP, BatchLayout, LevelArray, RenamingArray
from ..errors import CapacityExhausted, ScheduleError
from ..rng import RngSpec
from .schedule import CALL, COLLECT, FREE, GET, Schedule

__all__ = [
    "BalanceReport",
    "BalanceTracker",
    "ExecutionTrace",
    "run_schedule",
]


@dataclass
class BalanceReport:
    time: int
    op_count: int
    occupancy: list[int]
    backup: int
    overcrowded: list[bool]
    balanced_up_to: int
    fully_balanced: bool
    vacuous: bool
    cells_held: int | None = None

    def to_dict(self) -> dict:
        return {
            "time": self.time,
            "op_count": self.op_count,
            "occupancy": list(self.occupancy),
            "backup": self.backup,
            "overcrowded": list(self.overcrowded),
            "balanced_up_to": self.balanced_up_to,
            "fully_balanced": self.fully_balanced,
            "vacuous": self.vacuous,
            "cells_held": self.cells_held,
        }


class BalanceTracker:
    """Per-batch occupancy against the overcrowding thresholds of a layout."""

    def __init__(self, layout: BatchLayout | None) -> None:
        self.layout = layout
        if layout is None:
            self.monitored: range = range(0)
            self.thresholds: list[Fraction] = []
            self.batches = 1
        else:
            n = layout.capacity
            mon = monitored_batches(n)
            self.monitored = range(min(len(mon), layout.batch_count))
            self.thresholds = [overcrowd_threshold(n, j) for j in self.monitored]
            self.batches = layout.batch_count
        self.occ = [0] * self.batches
        self.backup = 0
        self.top = len(self.monitored) - 1

    @property
    def vacuous(self) -> bool:
        # batch 0 can never be overcrowded, so balance says something only once batch 1 is monitored
        return self.top < 1

    def batch_of_name(self, name: int) -> int:
        if self.layout is None:
            return 0
        return self.layout.batch_of_cell(self.layout.cell_of(name))

    def add(self, batch: int, delta: int) -> None:
        if batch == BACKUP:
            self.backup += delta
        else:
            self.occ[batch] += delta

    def balanced_up_to(self) -> int:
        occ, thr = self.occ, self.thresholds
        for j in self.monitored:
            if occ[j] >= thr[j]:
                return j - 1
        return self.top

    def report(self, time: int, op_count: int, cells_held: int | None = None) -> BalanceReport:
        over = [self.occ[j] >= self.thresholds[j] for j in self.monitored]
        bal = self.balanced_up_to()
        return BalanceReport(time, op_count, list(self.occ), self.backup, over, bal,
                             bal == self.top, self.vacuous, cells_held)


@dataclass
class ExecutionTrace:
    """Everything observable about one run; serialises to stable JSON.

    ``events`` holds tuples:

    * ``("get", pid, start_step, lin_step, name, probes, batch_reached, used_backup)``
    * ``("free", pid, step, name)``
    * ``("collect", pid, start_step, end_step, ((name, read_step), ...))``

    ``balance_timeline`` lists ``(time, op_count, balanced_up_to)`` each time
    the balanced prefix changes, starting with the initial state.
    """

    algo: str
    n: int
    slot_count: int
    layout: BatchLayout | None
    rng: RngSpec
    initial_holders: dict[int, int]
    events: list[tuple] = field(default_factory=list)
    samples: list[BalanceReport] = field(default_factory=list)
    balance_timeline: list[tuple[int, int, int]] = field(default_factory=list)
    steps_executed: int = 0
    ops_completed: int = 0
    final_holders: dict[int, int] = field(default_factory=dict)
    monitored_top: int = -1

    def gets(self):
        return [e for e in self.events if e[0] == "get"]

    def frees(self):
        return [e for e in self.events if e[0] == "free"]

    def collects(self):
        return [e for e in self.events if e[0] == "collect"]

    def batch_of_name(self, name: int) -> int:
        if self.layout is None:
            return 0
        return self.layout.batch_of_cell(self.layout.cell_of(name))

    def holders_at(self, t: int) -> dict[int, int]:
        """``name -> pid`` after the first ``t`` steps (event replay)."""
        if not 0 <= t <= self.steps_executed:
            raise ValueError(f"time {t} outside [0, {self.steps_executed}]")
        held = {name: pid for pid, name in self.initial_holders.items()}
        for e in self.events:
            kind = e[0]
            if kind == "get":
                if e[3] >= t:
                    break
                held[e[4]] = e[1]
            elif kind == "free":
                if e[2] >= t:
                    break
                held.pop(e[3], None)
        return held

    def to_dict(self) -> dict:
        events = []
        for e in self.events:
            if e[0] == "get":
                events.append({"kind": "get", "pid": e[1], "start": e[2], "step": e[3],
                               "name": e[4], "probes": e[5], "batch_reached": e[6],
                               "used_backup": e[7]})
            elif e[0] == "free":
                events.append({"kind": "free", "pid": e[1], "step": e[2], "name": e[3]})
            else:
                events.append({"kind": "collect", "pid": e[1], "start": e[2], "end": e[3],
                               "reads": [list(r) for r in e[4]]})
        return {
            "algo": self.algo,
            "n": self.n,
            "slot_count": self.slot_count,
            "layout": self.layout.to_dict() if self.layout is not None else None,
            "rng": self.rng.to_dict(),
            "initial_holders": {str(p): nm for p, nm in sorted(self.initial_holders.items())},
            "steps_executed": self.steps_executed,
            "ops_completed": self.ops_completed,
            "events": events,
            "samples": [s.to_dict() for s in self.samples],
            "balance_timeline": [list(x) for x in self.balance_timeline],
            "final_holders": {str(p): nm for p, nm in sorted(self.final_holders.items())},
        }

    def to_json(self, indent: int | None = None) -> str:
        return json.dumps(self.to_dict(), sort_keys=True, indent=indent)


def run_schedule(algo: RenamingArray, schedule: Schedule, rng_spec: RngSpec, *,
                 sample_every: int | None = None, max_ops: int | None = None,
                 initial_holders: dict[int, int] | None = None,
                 validate: bool = True) -> ExecutionTrace:
    """Execute ``schedule`` against ``algo`` and return the full trace.

    Process ``p`` draws its coins from ``rng_spec.stream(p)``.  ``sample_every``
    records a :class:`BalanceReport` every that many completed gets and
    frees (plus one at time 0); ``max_ops`` stops the run once that many gets
    and frees have completed.  ``initial_holders`` maps processes to names
    they hold at time 0; those names must already be held in ``algo``.
    """
    if validate:
        schedule.validate()
    initial_holders = dict(initial_holders or {})
    if set(initial_holders) != set(schedule.initially_holding):
        raise ScheduleError("initial holders do not match the schedule's initially holding processes")
    cells = algo.cells
    for pid, name in initial_holders.items():
        if not cells.is_held(algo.cell_of(name)):
            raise ScheduleError(f"process {pid} is said to hold name {name}, whose cell is free")

    layout = algo.layout if isinstance(algo, LevelArray) else None
    tracker = BalanceTracker(layout)
    for name in initial_holders.values():
        tracker.add(tracker.batch_of_name(name), 1)

    trace = ExecutionTrace(
        algo=algo.name,
        n=layout.capacity if layout is not None else algo.slot_count,
        slot_count=algo.slot_count,
        layout=layout,
        rng=rng_spec,
        initial_holders=initial_holders,
        monitored_top=tracker.top,
    )
    events = trace.events
    timeline = trace.balance_timeline
    samples = trace.samples
    bal = tracker.balanced_up_to()
    timeline.append((0, 0, bal))
    if sample_every:
        samples.append(tracker.report(0, 0, cells.held_count()))

    P = schedule.process_count
    inputs = schedule.inputs
    pos = [0] * P
    holding: list[int | None] = [None] * P
    for pid, name in initial_holders.items():
        holding[pid] = name
    streams: list = [None] * P
    probe_iter: list = [None] * P    # active get: probe iterator
    get_start = [0] * P
    get_probes = [0] * P
    col_next: list[int | None] = [None] * P  # active collect: next cell index
    col_start = [0] * P
    col_reads: list[list | None] = [None] * P

    tas = cells.test_and_set
    reset = cells.reset
    is_held = cells.is_held
    name_of = algo.name_of
    cell_of = algo.cell_of
    exhausted_after = algo.exhausted_after
    batch_of_cell = algo.batch_of_cell
    slot_count = algo.slot_count
    ops = 0
    step = 0

    for step, pid in enumerate(schedule.steps):
        pid = int(pid)
        it = probe_iter[pid]
        if it is None and col_next[pid] is None:
            p = pos[pid]
            seq = inputs[pid]
            if p >= len(seq):
                continue  # input exhausted; the step is idle
            op = seq[p]
            pos[pid] = p + 1
            if op == CALL:
                continue
            if op == FREE:
                name = holding[pid]
                if name is None:
                    raise ScheduleError(f"process {pid}: FREE before GET", step)
                reset(cell_of(name))
                holding[pid] = None
                events.append(("free", pid, step, name))
                ops += 1
                tracker.add(batch_of_cell(cell_of(name)), -1)
            elif op == GET:
                rng = streams[pid]
                if rng is None:
                    rng = streams[pid] = rng_spec.stream(pid)
                it = probe_iter[pid] = algo.probe_sequence(rng)
                get_start[pid] = step
                get_probes[pid] = 0
            elif op == COLLECT:
                col_next[pid] = 0
                col_start[pid] = step
                col_reads[pid] = []
            else:
                raise ScheduleError(f"process {pid}: unknown operation {op!r}", p)

        if it is not None:
            cell = next(it, None)
            if cell is None:
                raise CapacityExhausted(f"process {pid}: every probe failed (step {step})")
            k = get_probes[pid] + 1
            get_probes[pid] = k
            if not tas(cell):
                if exhausted_after(k):
                    raise CapacityExhausted(f"process {pid}: no free cell after {k} probes (step {step})")
                continue
            probe_iter[pid] = None
            name = name_of(cell)
            batch = batch_of_cell(cell)
            holding[pid] = name
            events.append(("get", pid, get_start[pid], step, name, k, batch,
                           layout is not None and batch == BACKUP))
            ops += 1
            tracker.add(batch, 1)
        elif col_next[pid] is not None:
            i = col_next[pid]
            if is_held(i):
                col_reads[pid].append((name_of(i), step))
            i += 1
            if i == slot_count:
                events.append(("collect", pid, col_start[pid], step, tuple(col_reads[pid])))
                col_next[pid] = None
                col_reads[pid] = None
            else:
                col_next[pid] = i
            continue
        # otherwise this step was a free

        # a get or free linearized at this step
        if layout is not None:
            nb = tracker.balanced_up_to()
            if nb != bal:
                bal = nb
                timeline.append((step + 1, ops, bal))
        if sample_every and ops % sample_every == 0:
            samples.append(tracker.report(step + 1, ops, cells.held_count()))
        if max_ops is not None and ops >= max_ops:
            break

    trace.steps_executed = step + 1 if len(schedule.steps) else 0
    trace.ops_completed = ops
    trace.final_holders = {pid: nm for pid, nm in enumerate(holding) if nm is not None}
    return trace
