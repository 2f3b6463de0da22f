"""Trace checkers.  Each one replays the event log on its own and never
consults the cell memory, so it can catch a faulty array or a corrupted
trace."""
from __future__ import annotations

from dataclasses import dataclass

from ..analysis import monitored_batches, overcrowd_threshold
from .engine import BalanceReport, BalanceTracker, ExecutionTrace
from .schedule import CompactnessSpec

__all__ = [
    "CompactnessViolation",
    "Violation",
    "balance_report",
    "check_collect_validity",
    "check_conservation",
    "check_uniqueness",
    "compactness_violations",
    "realized_compact_bound",
]


@dataclass(frozen=True)
class Violation:
    time: int
    name: int
    holders: tuple[int, ...]
    kind: str = "duplicate"


def check_uniqueness(trace: ExecutionTrace) -> Violation | None:
    """First moment two processes hold the same name, or ``None`` if none does.

    Also flags frees by a process that does not hold the freed name.
    """
    held: dict[int, int] = {}
    for pid, name in trace.initial_holders.items():
        if name in held:
            return Violation(0, name, (held[name], pid))
        held[name] = pid
    for e in trace.events:
        kind = e[0]
        if kind == "get":
            pid, step, name = e[1], e[3], e[4]
            if name in held:
                return Violation(step + 1, name, (held[name], pid))
            held[name] = pid
        elif kind == "free":
            pid, step, name = e[1], e[2], e[3]
            if held.get(name) != pid:
                owner = held.get(name)
                return Violation(step + 1, name, (pid,) if owner is None else (owner, pid),
                                 kind="foreign-free")
            del held[name]
    return None


def _lifetimes(trace: ExecutionTrace) -> dict[int, list[tuple[int, int]]]:
    """Per name, the half-open time intervals during which it was held."""
    end = trace.steps_executed
    open_since: dict[int, int] = {name: 0 for name in trace.initial_holders.values()}
    spans: dict[int, list[tuple[int, int]]] = {}
    for e in trace.events:
        if e[0] == "get":
            open_since[e[4]] = e[3] + 1
        elif e[0] == "free":
            start = open_since.pop(e[3])
            spans.setdefault(e[3], []).append((start, e[2] + 1))
    for name, start in open_since.items():
        spans.setdefault(name, []).append((start, end + 1))
    return spans


def check_collect_validity(trace: ExecutionTrace) -> list[str]:
    """Problems with collects; an empty list means every collect was valid.

    Validity: each returned name was held when its cell was read.
    Completeness: each name held throughout the collect was returned.
    """
    spans = _lifetimes(trace)
    problems = []
    for e in trace.collects():
        pid, start, end, reads = e[1], e[2], e[3], e[4]
        returned = set()
        for name, step in reads:
            returned.add(name)
            # the read at step s sees the state at time s
            if not any(a <= step < b for a, b in spans.get(name, ())):
                problems.append(f"collect by {pid} at [{start}, {end}] returned {name}, "
                                f"not held at step {step}")
        for name, ivs in spans.items():
            if name in returned:
                continue
            if any(a <= start and end < b for a, b in ivs):
                problems.append(f"collect by {pid} at [{start}, {end}] missed {name}, "
                                "held throughout")
    return problems


def check_conservation(trace: ExecutionTrace) -> list[str]:
    """Compare sampled cell counts with initial + linearized gets - frees."""
    problems = []
    events = [e for e in trace.events if e[0] in ("get", "free")]
    held = len(trace.initial_holders)
    i = 0
    for s in trace.samples:
        while i < len(events):
            e = events[i]
            step = e[3] if e[0] == "get" else e[2]
            if step >= s.time:
                break
            held += 1 if e[0] == "get" else -1
            i += 1
        if s.cells_held is not None and s.cells_held != held:
            problems.append(f"time {s.time}: {s.cells_held} cells held, expected {held}")
        if sum(s.occupancy) + s.backup != held:
            problems.append(f"time {s.time}: batch occupancy sums to "
                            f"{sum(s.occupancy) + s.backup}, expected {held}")
    return problems


def balance_report(trace: ExecutionTrace, t: int) -> BalanceReport:
    """Occupancy per batch and overcrowding flags at time ``t``."""
    holders = trace.holders_at(t)
    tracker = BalanceTracker(trace.layout)
    for name in holders:
        tracker.add(tracker.batch_of_name(name), 1)
    ops = sum(1 for e in trace.events
              if (e[0] == "get" and e[3] < t) or (e[0] == "free" and e[2] < t))
    return tracker.report(t, ops, None)


def report_from_occupancy(n: int, occupancy: list[int], backup: int = 0) -> BalanceReport:
    """Balance flags for a bare occupancy vector (capacity ``n``)."""
    mon = monitored_batches(n)
    top = len(mon) - 1
    over = [occupancy[j] >= overcrowd_threshold(n, j) for j in mon]
    bal = top
    for j, o in zip(mon, over):
        if o:
            bal = j - 1
            break
    return BalanceReport(0, 0, list(occupancy), backup, over, bal, bal == top, top < 1)


@dataclass(frozen=True)
class CompactnessViolation:
    pid: int
    get_start: int
    free_step: int | None
    bound: int


def compactness_violations(trace: ExecutionTrace, spec: CompactnessSpec | int,
                           n: int | None = None) -> list[CompactnessViolation]:
    """Gets whose free did not happen strictly before ``start + bound``.

    ``spec`` is a :class:`CompactnessSpec` (bound ``n**B``) or a bound in steps.
    A get still unfreed at the end counts only if the bound has already elapsed.
    """
    if isinstance(spec, CompactnessSpec):
        bound = spec.bound(n if n is not None else trace.n)
    else:
        bound = int(spec)
    pending: dict[int, int] = {}
    out = []
    for e in trace.events:
        if e[0] == "get":
            pending[e[1]] = e[2]
        elif e[0] == "free" and e[1] in pending:
            start = pending.pop(e[1])
            if not e[2] < start + bound:
                out.append(CompactnessViolation(e[1], start, e[2], bound))
    for pid, start in pending.items():
        if trace.steps_executed >= start + bound:
            out.append(CompactnessViolation(pid, start, None, bound))
    return out


def realized_compact_bound(trace: ExecutionTrace) -> int:
    """Smallest step bound under which the trace's completed gets were compact."""
    pending: dict[int, int] = {}
    worst = 0
    for e in trace.events:
        if e[0] == "get":
            pending[e[1]] = e[2]
        elif e[0] == "free" and e[1] in pending:
            worst = max(worst, e[2] - pending.pop(e[1]) + 1)
    return worst
