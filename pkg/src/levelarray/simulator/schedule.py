"""Oblivious-adversary executions: schedules, inputs and their text format.

A schedule is fixed before anything runs.  ``steps[t]`` names the process
taking the ``t``-th shared-memory step and ``inputs[p]`` is process ``p``'s
operation string over the alphabet::

    G  get        F  free        C  collect        .  call (one idle step)

Gets and frees alternate, starting with a get (or with a free for a process
that holds an injected name when the run starts).

Text format (``sim run --config FILE``)::

    # comments start with '#'
    n = 16
    B = 2
    processes = 2
    rng = lehmer:42
    probes = 1                 # optional, per-batch trial count
    algo = level               # optional: level | random | linear | det
    slots = 32                 # optional, flat baselines only
    steps = roundrobin         # roundrobin | random:<seed> | explicit:0,1,0,1
    max_steps = 1000           # optional
    ---
    G . . F
    G C F

Whitespace inside op strings is ignored.  Line ``i`` after ``---`` is
process ``i``; a lone ``-`` stands for a process with no operations.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from ..core import build_layout
from ..errors import InvalidConfiguration, ScheduleError
from ..rng import RngSpec, derive_seed

__all__ = [
    "CALL",
    "COLLECT",
    "FREE",
    "GET",
    "CompactnessSpec",
    "Schedule",
    "SimConfig",
    "dump_config",
    "generate_compact_schedule",
    "parse_config",
    "round_robin_steps",
]

GET, FREE, COLLECT, CALL = "G", "F", "C", "."
OPS = frozenset((GET, FREE, COLLECT, CALL))

# stream index reserved for the adversary's own shuffling, disjoint from process indices
ADVERSARY_STREAM = 1 << 62


@dataclass(frozen=True)
class CompactnessSpec:
    """Every get started at step ``t`` must see its free before ``t + n**B``."""

    B: float

    def __post_init__(self) -> None:
        if self.B < 0:
            raise InvalidConfiguration("compactness exponent B must be non-negative")

    def bound(self, n: int) -> int:
        return math.floor(n**self.B)


@dataclass
class Schedule:
    n: int
    steps: Sequence[int]
    inputs: list[str]
    B: float | None = None
    initially_holding: frozenset[int] = field(default_factory=frozenset)

    @property
    def process_count(self) -> int:
        return len(self.inputs)

    def validate(self) -> None:
        """Raise :class:`ScheduleError` on the first malformed entry."""
        P = self.process_count
        if P > self.n:
            raise ScheduleError(f"{P} processes exceed the capacity n={self.n}")
        steps = np.asarray(self.steps)
        if steps.size:
            bad = np.flatnonzero((steps < 0) | (steps >= P))
            if bad.size:
                i = int(bad[0])
                raise ScheduleError(f"unknown process id {int(steps[i])} in steps", i)
        for pid, ops in enumerate(self.inputs):
            holding = pid in self.initially_holding
            for i, op in enumerate(ops):
                if op not in OPS:
                    raise ScheduleError(f"process {pid}: unknown operation {op!r}", i)
                if op == GET:
                    if holding:
                        raise ScheduleError(f"process {pid}: GET while holding a name", i)
                    holding = True
                elif op == FREE:
                    if not holding:
                        raise ScheduleError(f"process {pid}: FREE before GET", i)
                    holding = False

    def op_counts(self) -> dict[str, int]:
        counts = dict.fromkeys(OPS, 0)
        for ops in self.inputs:
            for op in OPS:
                counts[op] += ops.count(op)
        return counts


def round_robin_steps(inputs: Sequence[str], max_steps: int | None = None,
                      slack: int = 4, collect_cost: int = 0) -> list[int]:
    """Cycle through processes; sized so that every input can finish.

    A get may take several steps, so each get is budgeted ``slack`` steps,
    and each collect ``collect_cost`` steps (one per cell read).
    ``max_steps`` truncates.
    """
    P = len(inputs)
    longest = max((len(s) + s.count(GET) * (slack - 1) + s.count(COLLECT) * max(0, collect_cost - 1)
                   for s in inputs), default=0)
    total = P * longest
    if max_steps is not None:
        total = min(total, max_steps)
    return [t % P for t in range(total)] if P else []


def _clean_ops(line: str) -> str:
    ops = "".join(line.split())
    bad = set(ops) - OPS
    if bad:
        raise ScheduleError(f"unknown operation(s) {sorted(bad)} in {line!r}")
    return ops


@dataclass
class SimConfig:
    schedule: Schedule
    rng: RngSpec
    algo: str = "level"
    probes: int = 1
    slots: int | None = None


def parse_config(text: str) -> SimConfig:
    header, sep, body = text.partition("---")
    if not sep:
        raise ScheduleError("config has no '---' separator before the process inputs")
    kv: dict[str, str] = {}
    for raw in header.splitlines():
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        key, eq, value = line.partition("=")
        if not eq:
            raise ScheduleError(f"expected key = value, got {raw!r}")
        kv[key.strip().lower()] = value.strip()
    try:
        n = int(kv["n"])
    except KeyError:
        raise ScheduleError("config header needs n") from None
    inputs = []
    for raw in body.splitlines():
        line = raw.split("#", 1)[0].strip()
        if line == "-":
            inputs.append("")
        elif line:
            inputs.append(_clean_ops(line))
    P = int(kv.get("processes", len(inputs)))
    if P != len(inputs):
        raise ScheduleError(f"header declares {P} processes but {len(inputs)} input lines follow")
    B = float(kv["b"]) if "b" in kv else None
    rng = RngSpec.parse(kv.get("rng", "lehmer:1"))
    max_steps = int(kv["max_steps"]) if "max_steps" in kv else None

    slots = int(kv["slots"]) if "slots" in kv else None
    # a collect reads every cell: under 4n for the batched layout, L for flat arrays
    collect_cost = max(4 * n, slots or 0)
    mode = kv.get("steps", "roundrobin")
    if mode == "roundrobin":
        steps = round_robin_steps(inputs, max_steps, collect_cost=collect_cost)
    elif mode.startswith("random"):
        _, _, seed = mode.partition(":")
        total = max_steps if max_steps is not None else \
            2 * len(round_robin_steps(inputs, collect_cost=collect_cost))
        gen = np.random.default_rng(int(seed or 0))
        steps = gen.integers(0, P, size=total).tolist()
    elif mode.startswith("explicit:"):
        steps = [int(x) for x in mode[len("explicit:"):].split(",") if x.strip()]
        if max_steps is not None:
            steps = steps[:max_steps]
    else:
        raise ScheduleError(f"unknown steps mode {mode!r}")

    sched = Schedule(n=n, steps=steps, inputs=inputs, B=B)
    sched.validate()
    return SimConfig(sched, rng, kv.get("algo", "level"), int(kv.get("probes", 1)), slots)


def dump_config(cfg: SimConfig) -> str:
    s = cfg.schedule
    lines = [
        f"n = {s.n}",
        *( [f"B = {s.B:g}"] if s.B is not None else [] ),
        f"processes = {s.process_count}",
        f"rng = {cfg.rng.kind}:{cfg.rng.seed}",
        f"probes = {cfg.probes}",
        f"algo = {cfg.algo}",
        *( [f"slots = {cfg.slots}"] if cfg.slots is not None else [] ),
        "steps = explicit:" + ",".join(str(int(p)) for p in s.steps),
        "---",
        *(" ".join(ops) or "-" for ops in s.inputs),
    ]
    return "\n".join(lines) + "\n"


def _cycle(gen: np.random.Generator, hold: tuple[int, int], idle: tuple[int, int],
           collect_prob: float) -> str:
    h = int(gen.integers(hold[0], hold[1] + 1))
    g = int(gen.integers(idle[0], idle[1] + 1))
    gap = CALL * g
    if collect_prob and gen.random() < collect_prob:
        gap = COLLECT + gap
    return GET + CALL * h + FREE + gap


def generate_compact_schedule(n: int, process_count: int, total_steps: int, B: float,
                              rng_spec: RngSpec, *, probe_counts=1, max_get_steps: int | None = None,
                              hold: tuple[int, int] = (1, 8), idle: tuple[int, int] = (0, 8),
                              initially_holding: int = 0, release_rounds: int = 1,
                              collect_prob: float = 0.0) -> Schedule:
    """Random well-formed inputs whose frees all land within ``n**B`` steps of their get.

    Steps come in rounds, each a fresh random permutation of all processes,
    so a process moves exactly once per round.  A get that starts in round
    ``a`` and uses ``k`` steps, followed by ``h`` calls, frees in round
    ``a + k + h``; the schedule is therefore compact whenever
    ``(max_get_steps + max_hold + 1) * P <= n**B``, which is checked up front.

    The first ``initially_holding`` processes start out holding a name
    (see :func:`~levelarray.simulator.healing.inject_unbalanced_state`) and
    free it after a uniformly random number of rounds in
    ``[0, release_rounds)``.
    """
    if process_count < 1 or process_count > n:
        raise InvalidConfiguration(f"process count must be in [1, {n}], got {process_count}")
    if not 0 <= initially_holding <= process_count:
        raise InvalidConfiguration("initially holding processes exceed the process count")
    if hold[0] < 0 or hold[0] > hold[1] or idle[0] < 0 or idle[0] > idle[1]:
        raise InvalidConfiguration("hold and idle ranges must be non-negative (lo, hi) pairs")
    if max_get_steps is None:
        max_get_steps = build_layout(n, probe_counts).max_probes
    bound = CompactnessSpec(B).bound(n)
    needed = (max_get_steps + hold[1] + 1) * process_count
    if needed > bound:
        raise InvalidConfiguration(
            f"infeasible compactness: worst-case get-to-free span {needed} steps "
            f"exceeds n**B = {bound}")

    P = process_count
    gen = np.random.default_rng(derive_seed(rng_spec.seed, ADVERSARY_STREAM))
    rounds = -(-total_steps // P)
    steps = gen.permuted(np.tile(np.arange(P, dtype=np.int32), (rounds, 1)), axis=1)
    steps = steps.ravel()[:total_steps]

    inputs = []
    for pid in range(P):
        parts = []
        length = 0
        if pid < initially_holding:
            wait = int(gen.integers(0, max(1, release_rounds)))
            first = CALL * wait + FREE
            parts.append(first)
            length += len(first)
        while length < rounds:
            cyc = _cycle(gen, hold, idle, collect_prob)
            parts.append(cyc)
            length += len(cyc)
        inputs.append("".join(parts))
    return Schedule(n=n, steps=steps, inputs=inputs, B=B,
                    initially_holding=frozenset(range(initially_holding)))
