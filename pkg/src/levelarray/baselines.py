"""Flat-array comparison algorithms.

All three share the :class:`~levelarray.core.RenamingArray` machinery and
differ only in the order they try cells of an array of ``L`` slots:

* :class:`RandomArray` -- uniform random cells until a test-and-set wins;
* :class:`LinearProbeArray` -- one random start, then rightwards with wraparound;
* :class:`DeterministicArray` -- left to right from index 0.
"""
from __future__ import annotations

from .cells import Cells
from .core import LevelArray, RenamingArray
from .errors import CapacityExhausted, InvalidConfiguration

__all__ = [
    "ALGORITHMS",
    "DeterministicArray",
    "LinearProbeArray",
    "RandomArray",
    "make_algorithm",
    "random_get",
    "linear_probe_get",
    "deterministic_get",
]


class _FlatArray(RenamingArray):
    def __init__(self, slots: int, cells: Cells | str = "lock", *, pad: bool = False,
                 debug: bool = False) -> None:
        if slots < 1:
            raise InvalidConfiguration(f"slot count must be positive, got {slots}")
        super().__init__(slots, cells, pad=pad, debug=debug)


class RandomArray(_FlatArray):
    name = "random"

    def probe_sequence(self, rng):
        hi = self.slot_count - 1
        draw = rng.next_in_range
        while True:
            yield draw(0, hi)


class LinearProbeArray(_FlatArray):
    name = "linear"

    def probe_sequence(self, rng):
        L = self.slot_count
        start = rng.next_in_range(0, L - 1)
        for k in range(L):
            i = start + k
            yield i - L if i >= L else i

    def exhausted_after(self, probes):
        return probes >= self.slot_count


class DeterministicArray(_FlatArray):
    name = "det"

    def probe_sequence(self, rng=None):
        return iter(range(self.slot_count))

    def exhausted_after(self, probes):
        return probes >= self.slot_count

    def get(self, rng=None, tag=None):
        tas = self.cells.test_and_set
        for cell in range(self.slot_count):
            if tas(cell, tag):
                return self._won(cell, cell + 1, tag)
        raise CapacityExhausted(f"det: all {self.slot_count} cells held")


def random_get(array: RandomArray, rng, tag=None):
    return array.get(rng, tag)


def linear_probe_get(array: LinearProbeArray, rng, tag=None):
    return array.get(rng, tag)


def deterministic_get(array: DeterministicArray, tag=None):
    return array.get(None, tag)


ALGORITHMS = ("level", "random", "linear", "det")


def make_algorithm(algo: str, slots: int, *, cells: str = "lock", probe_counts=1,
                   pad: bool = False, debug: bool = False) -> RenamingArray:
    """Build algorithm ``algo`` over ``slots`` cells of main storage.

    For ``level`` the slot budget ``L`` maps to a capacity of ``L // 2``
    (rounded up to a power of two), so the main region is at most ``L``-ish
    cells as in the flat baselines.
    """
    if algo == "level":
        return LevelArray(max(2, slots // 2), probe_counts, cells, pad=pad, debug=debug)
    cls = {"random": RandomArray, "linear": LinearProbeArray, "det": DeterministicArray}.get(algo)
    if cls is None:
        raise InvalidConfiguration(f"unknown algorithm {algo!r}; expected one of {ALGORITHMS}")
    return cls(slots, cells, pad=pad, debug=debug)
