"""The LevelArray activity array.

A structure of capacity ``n`` (a power of two) owns ``3n`` cells: a main
region split into batches followed by a backup region of exactly ``n``
cells.  Batch 0 holds ``floor(3n/2)`` cells and batch ``i >= 1`` holds
``floor(n / 2**(i+1))``, for ``log2(n)`` batches in total.  ``get`` tries
``c[i]`` uniformly random cells (with replacement) in each batch in turn,
then scans the backup region from its start.  Main-region names are cell
indices; backup names are ``2n`` plus the backup index.

The shared :class:`RenamingArray` base also carries the baselines in
:mod:`levelarray.baselines`.  Each algorithm only defines its probe
sequence: the order in which cells are tried.  The concurrent ``get`` and
the step-by-step simulator both drive that same sequence.
"""
from __future__ import annotations

import bisect
import threading
from dataclasses import dataclass
from typing import Any, Iterator, Sequence

from .cells import Cells, make_cells
from .errors import CapacityExhausted, InvalidConfiguration, InvalidName, MisuseError

__all__ = [
    "BACKUP",
    "BatchLayout",
    "LevelArray",
    "OwnershipChecker",
    "ProbeStats",
    "RenamingArray",
    "batch_of",
    "build_layout",
    "next_power_of_two",
]

BACKUP = -1


def next_power_of_two(n: int) -> int:
    return 1 << (n - 1).bit_length() if n > 1 else 1


@dataclass(frozen=True)
class BatchLayout:
    capacity: int
    batch_offsets: tuple[int, ...]
    batch_sizes: tuple[int, ...]
    probe_counts: tuple[int, ...]
    probe_prefix: tuple[int, ...]
    main_size: int
    backup_size: int
    requested_capacity: int

    @property
    def batch_count(self) -> int:
        return len(self.batch_sizes)

    @property
    def cell_count(self) -> int:
        return self.main_size + self.backup_size

    @property
    def backup_base_name(self) -> int:
        return 2 * self.capacity

    @property
    def max_probes(self) -> int:
        """Worst-case test-and-set attempts of one ``get``."""
        return self.probe_prefix[-1] + self.backup_size

    def batch_range(self, i: int) -> range:
        off = self.batch_offsets[i]
        return range(off, off + self.batch_sizes[i])

    def cell_of(self, name: int) -> int:
        if 0 <= name < self.main_size:
            return name
        k = name - 2 * self.capacity
        if 0 <= k < self.backup_size:
            return self.main_size + k
        raise InvalidName(f"name {name} is outside the layout of capacity {self.capacity}")

    def name_of(self, cell: int) -> int:
        if cell < self.main_size:
            return cell
        return 2 * self.capacity + (cell - self.main_size)

    def batch_of_cell(self, cell: int) -> int:
        if cell >= self.main_size:
            return BACKUP
        return bisect.bisect_right(self.batch_offsets, cell) - 1

    def to_dict(self) -> dict:
        return {
            "capacity": self.capacity,
            "requested_capacity": self.requested_capacity,
            "batch_offsets": list(self.batch_offsets),
            "batch_sizes": list(self.batch_sizes),
            "probe_counts": list(self.probe_counts),
            "probe_prefix": list(self.probe_prefix),
            "main_size": self.main_size,
            "backup_size": self.backup_size,
        }


def build_layout(n: int, probe_counts: int | Sequence[int] = 1) -> BatchLayout:
    """Compute batch boundaries for capacity ``n`` (rounded up to a power of two).

    ``probe_counts`` is either one positive integer used for every batch or
    one positive integer per batch.
    """
    if isinstance(n, bool) or not isinstance(n, int) or n < 2:
        raise InvalidConfiguration(f"capacity must be an integer >= 2, got {n!r}")
    cap = next_power_of_two(n)
    m = cap.bit_length() - 1
    if isinstance(probe_counts, int):
        counts = (probe_counts,) * m
    else:
        counts = tuple(int(c) for c in probe_counts)
        if len(counts) != m:
            raise InvalidConfiguration(f"expected {m} probe counts, got {len(counts)}")
    if any(c < 1 for c in counts):
        raise InvalidConfiguration("probe counts must be positive")

    sizes = [3 * cap // 2] + [cap >> (i + 1) for i in range(1, m)]
    offsets, prefix = [], [0]
    pos = 0
    for size, c in zip(sizes, counts):
        offsets.append(pos)
        pos += size
        prefix.append(prefix[-1] + c)
    return BatchLayout(
        capacity=cap,
        batch_offsets=tuple(offsets),
        batch_sizes=tuple(sizes),
        probe_counts=counts,
        probe_prefix=tuple(prefix),
        main_size=pos,
        backup_size=cap,
        requested_capacity=n,
    )


def batch_of(layout: BatchLayout, name: int) -> int:
    """Batch index holding ``name``, or ``BACKUP`` for backup names."""
    return layout.batch_of_cell(layout.cell_of(name))


@dataclass(frozen=True, slots=True)
class ProbeStats:
    probes: int
    batch_reached: int
    used_backup: bool = False


class OwnershipChecker:
    """Debug shadow of who holds each cell.

    Tags are written only by the current holder, right after its winning
    test-and-set and right before its reset.  Finding someone else's tag on
    a freshly won cell means two callers held the same name.
    """

    def __init__(self, size: int) -> None:
        self.owner: list[Any] = [None] * size
        self.violations: list[tuple] = []

    def acquired(self, cell: int, tag: Any) -> None:
        prev = self.owner[cell]
        if prev is not None:
            self.violations.append(("duplicate", cell, prev, tag))
        self.owner[cell] = tag

    def releasing(self, cell: int, tag: Any) -> None:
        current = self.owner[cell]
        if current is None or current != tag:
            self.violations.append(("foreign-free", cell, current, tag))
            raise MisuseError(f"cell {cell} is not held by the freeing caller")
        self.owner[cell] = None


class _Counters:
    # per-thread slots, summed on read; no shared read-modify-write on the hot path
    def __init__(self) -> None:
        self._local = threading.local()
        self._slots: list[list[int]] = []

    def slot(self) -> list[int]:
        s = getattr(self._local, "slot", None)
        if s is None:
            s = self._local.slot = [0, 0]
            self._slots.append(s)
        return s

    def totals(self) -> tuple[int, int]:
        slots = list(self._slots)
        return sum(s[0] for s in slots), sum(s[1] for s in slots)


class RenamingArray:
    """Common get/free/collect machinery over a probe sequence.

    Subclasses define ``probe_sequence(rng)`` (lazy; randomness is drawn
    when a probe is taken) plus the name <-> cell mapping.
    """

    name = "abstract"

    def __init__(self, cell_count: int, cells: Cells | str = "lock", *, pad: bool = False,
                 debug: bool = False) -> None:
        if isinstance(cells, str):
            cells = make_cells(cells, cell_count, pad=pad)
        elif cells.size != cell_count:
            raise InvalidConfiguration(f"cell memory has {cells.size} cells, need {cell_count}")
        self.cells = cells
        self.slot_count = cell_count
        self.checker = OwnershipChecker(cell_count) if debug else None
        self._counters = _Counters()

    # --- per-algorithm hooks -------------------------------------------------
    def probe_sequence(self, rng) -> Iterator[int]:
        raise NotImplementedError

    def name_of(self, cell: int) -> int:
        return cell

    def cell_of(self, name: int) -> int:
        if not 0 <= name < self.slot_count:
            raise InvalidName(f"name {name} out of range [0, {self.slot_count})")
        return name

    def batch_of_cell(self, cell: int) -> int:
        return 0

    def stats_for(self, probes: int, cell: int) -> ProbeStats:
        return ProbeStats(probes, self.batch_of_cell(cell), False)

    # --- operations ----------------------------------------------------------
    def _any_free(self) -> bool:
        is_held = self.cells.is_held
        return any(not is_held(i) for i in range(self.slot_count))

    def exhausted_after(self, probes: int) -> bool:
        """Whether a get that has failed ``probes`` attempts must give up."""
        return probes % self.slot_count == 0 and not self._any_free()

    def get(self, rng, tag: Any = None) -> tuple[int, ProbeStats]:
        """Acquire a free name; returns it with the attempt statistics."""
        tas = self.cells.test_and_set
        probes = 0
        for cell in self.probe_sequence(rng):
            probes += 1
            if tas(cell, tag):
                return self._won(cell, probes, tag)
            if self.exhausted_after(probes):
                break
        raise CapacityExhausted(f"{self.name}: no free cell after {probes} attempts")

    def _won(self, cell: int, probes: int, tag: Any) -> tuple[int, ProbeStats]:
        if self.checker is not None:
            self.checker.acquired(cell, tag)
        stats = self.stats_for(probes, cell)
        slot = self._counters.slot()
        slot[0] += 1
        if stats.used_backup:
            slot[1] += 1
        return self.name_of(cell), stats

    def free(self, name: int, tag: Any = None) -> None:
        """Release ``name``: one reset of its cell."""
        cell = self.cell_of(name)
        if self.checker is not None:
            self.checker.releasing(cell, tag)
        self.cells.reset(cell)

    def collect(self) -> set[int]:
        """Names whose cells were read as held, scanning every cell once in order."""
        is_held = self.cells.is_held
        name_of = self.name_of
        return {name_of(i) for i in range(self.slot_count) if is_held(i)}

    def collect_tagged(self) -> list[tuple[int, Any]]:
        """Like :meth:`collect` but also returns the holder tag read with each cell."""
        read = self.cells.read_tag
        out = []
        for i in range(self.slot_count):
            tag = read(i)
            if tag is not None:
                out.append((self.name_of(i), tag))
        return out

    def occupancy(self) -> int:
        return self.cells.held_count()

    @property
    def total_gets(self) -> int:
        return self._counters.totals()[0]

    @property
    def backup_uses(self) -> int:
        return self._counters.totals()[1]


class LevelArray(RenamingArray):
    """Batched randomized activity array of capacity ``n``."""

    name = "level"

    def __init__(self, n: int, probe_counts: int | Sequence[int] = 1,
                 cells: Cells | str = "lock", *, pad: bool = False, debug: bool = False) -> None:
        self.layout = build_layout(n, probe_counts)
        super().__init__(self.layout.cell_count, cells, pad=pad, debug=debug)
        lay = self.layout
        self._plan = tuple(zip(lay.batch_offsets, lay.batch_sizes, lay.probe_counts))

    @property
    def capacity(self) -> int:
        return self.layout.capacity

    def probe_sequence(self, rng):
        for off, size, c in self._plan:
            hi = size - 1
            for _ in range(c):
                yield off + rng.next_in_range(0, hi)
        base = self.layout.main_size
        yield from range(base, base + self.layout.backup_size)

    def exhausted_after(self, probes):
        return probes >= self.layout.max_probes

    def get(self, rng, tag=None):
        tas = self.cells.test_and_set
        draw = rng.next_in_range
        probes = 0
        for off, size, c in self._plan:
            hi = size - 1
            for _ in range(c):
                probes += 1
                cell = off + draw(0, hi)
                if tas(cell, tag):
                    return self._won(cell, probes, tag)
        base = self.layout.main_size
        for cell in range(base, base + self.layout.backup_size):
            probes += 1
            if tas(cell, tag):
                return self._won(cell, probes, tag)
        raise CapacityExhausted(f"level: all {probes} attempts failed, backup full")

    def name_of(self, cell):
        return self.layout.name_of(cell)

    def cell_of(self, name):
        return self.layout.cell_of(name)

    def batch_of_cell(self, cell):
        return self.layout.batch_of_cell(cell)

    def batch_of(self, name: int) -> int:
        return batch_of(self.layout, name)

    def stats_for(self, probes, cell):
        batch = self.layout.batch_of_cell(cell)
        return ProbeStats(probes, batch, batch == BACKUP)

    def batch_occupancy(self) -> list[int]:
        """Held cells per batch, backup last."""
        lay = self.layout
        is_held = self.cells.is_held
        counts = [sum(1 for i in lay.batch_range(b) if is_held(i)) for b in range(lay.batch_count)]
        base = lay.main_size
        counts.append(sum(1 for i in range(base, base + lay.backup_size) if is_held(i)))
        return counts
