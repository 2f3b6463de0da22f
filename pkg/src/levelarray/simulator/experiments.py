"""Monte Carlo experiments on batch-reach and hold probabilities."""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction

from ..analysis import (
    binomial_upper_confidence,
    hold_bound,
    monitored_batches,
    overcrowd_threshold,
    pi,
)
from ..core import BACKUP, LevelArray
from ..rng import RngSpec
from .engine import run_schedule
from .healing import inject_unbalanced_state, INJECT_STREAM
from .schedule import Schedule, generate_compact_schedule

__all__ = [
    "HoldResult",
    "ReachResult",
    "hold_probability_experiment",
    "one_shot_experiment",
    "regularity_experiment",
    "worst_balanced_fill",
]


@dataclass
class ReachResult:
    n: int
    probe_counts: tuple[int, ...]
    trials: int
    reached: list[int]          # reached[k]: gets that probed batch k (backup counts as past every batch)
    confidence: float = 0.99
    background: list[int] = field(default_factory=list)

    def fraction(self, k: int) -> float:
        return self.reached[k] / self.trials

    def upper(self, k: int) -> float:
        return binomial_upper_confidence(self.reached[k], self.trials, self.confidence)

    def within_pi(self, k: int) -> bool:
        return self.upper(k) <= float(pi(k))


def _tally(reached: list[int], batch: int, m: int) -> None:
    top = m - 1 if batch == BACKUP else batch
    for k in range(top + 1):
        reached[k] += 1


def worst_balanced_fill(n: int) -> list[int]:
    """Occupancy per batch of the most crowded balanced state with ``n - 1`` holders.

    Every monitored batch ``j >= 1`` sits one below its overcrowding threshold
    and batch 0 takes the rest, so a new get faces the densest batches that
    the balance condition allows.
    """
    lay = LevelArray(n, 1, cells="flag").layout
    occ = [0] * lay.batch_count
    for j in monitored_batches(lay.capacity):
        if j >= 1:
            occ[j] = min(lay.batch_sizes[j], math.ceil(overcrowd_threshold(lay.capacity, j)) - 1)
    occ[0] = lay.capacity - 1 - sum(occ)
    return occ


def regularity_experiment(n: int, probe_counts=16, trials: int = 100_000,
                          rng_spec: RngSpec = RngSpec("lehmer", 1), *,
                          background: list[int] | None = None,
                          confidence: float = 0.99) -> ReachResult:
    """Fresh single gets against a fixed background occupancy.

    Each trial is one get followed by its free, so every get sees the same
    background (by default :func:`worst_balanced_fill`).  Returns how many
    gets reached each batch.
    """
    array = LevelArray(n, probe_counts, cells="flag")
    lay = array.layout
    if background is None:
        background = worst_balanced_fill(lay.capacity)
    # exact fractions, so floor(fraction * size) gives back the requested counts
    fill = {j: Fraction(k, lay.batch_sizes[j]) for j, k in enumerate(background) if k}
    inject_unbalanced_state(array, fill, sum(background), rng_spec.stream(INJECT_STREAM))
    rng = rng_spec.stream()
    reached = [0] * lay.batch_count
    m = lay.batch_count
    for _ in range(trials):
        name, st = array.get(rng)
        _tally(reached, st.batch_reached, m)
        array.free(name)
    return ReachResult(lay.capacity, lay.probe_counts, trials, reached, confidence,
                       list(background))


def one_shot_experiment(n: int, probe_counts=16, rng_spec: RngSpec = RngSpec("lehmer", 1),
                        processes: int | None = None) -> ReachResult:
    """``processes`` (default ``n``) processes each get once, scheduled round robin."""
    array = LevelArray(n, probe_counts, cells="flag")
    lay = array.layout
    P = processes or lay.capacity
    sched = Schedule(n=lay.capacity, steps=[t % P for t in range(P * (lay.max_probes + 1))],
                     inputs=["G"] * P)
    trace = run_schedule(array, sched, rng_spec, max_ops=P)
    reached = [0] * lay.batch_count
    for e in trace.gets():
        _tally(reached, e[6], lay.batch_count)
    return ReachResult(lay.capacity, lay.probe_counts, len(trace.gets()), reached)


@dataclass
class HoldResult:
    n: int
    processes: int
    samples: int
    max_fraction: list[float]     # per monitored batch, worst sampled share of processes
    bound: list[float]            # c_j * pi_j
    all_balanced: bool


def hold_probability_experiment(n: int, processes: int, total_ops: int,
                                rng_spec: RngSpec = RngSpec("lehmer", 1), *, probe_counts: int = 16,
                                B: float = 2, sample_every: int = 500) -> HoldResult:
    """Sample the share of processes holding a name in each batch during compact churn."""
    array = LevelArray(n, probe_counts, cells="flag")
    lay = array.layout
    rounds = 2 * total_ops // max(1, processes) * 6 + 16
    sched = generate_compact_schedule(lay.capacity, processes, rounds * processes, B, rng_spec,
                                      probe_counts=probe_counts)
    trace = run_schedule(array, sched, rng_spec, sample_every=sample_every, max_ops=total_ops,
                         validate=False)
    mon = list(monitored_batches(lay.capacity))
    worst = [0.0] * len(mon)
    for s in trace.samples:
        for j in mon:
            worst[j] = max(worst[j], s.occupancy[j] / processes)
    bounds = [float(hold_bound(j, lay.probe_counts[j])) for j in mon]
    return HoldResult(lay.capacity, processes, len(trace.samples), worst, bounds,
                      all(s.fully_balanced for s in trace.samples))
