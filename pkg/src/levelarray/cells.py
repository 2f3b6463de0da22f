"""Arrays of atomically acquirable cells.

Every renaming structure in the package is written against the small
interface below; the memory behind it is chosen per use:

``LockCells``
    one ``threading.Lock`` per cell.  ``acquire(blocking=False)`` is a real
    non-blocking test-and-set and ``release`` is the reset, so these cells
    are safe for concurrent callers.  This is the production memory.
``TaggedCells``
    a cell stores its holder's tag, installed with a single atomic
    ``dict.setdefault`` (a compare-and-swap from empty).  Readers observe
    the tag together with the occupancy, which is what the collect
    validity checker needs.
``FlagCells``
    a ``bytearray`` of 0/1 flags for single-threaded use (the simulator).
"""
from __future__ import annotations

import threading
from typing import Any

from .errors import InvalidConfiguration, MisuseError

__all__ = ["Cells", "LockCells", "TaggedCells", "FlagCells", "CELL_KINDS", "make_cells"]

CACHE_LINE = 64


class Cells:
    """Interface: ``size``, ``test_and_set``, ``reset``, ``is_held``."""

    size: int

    def test_and_set(self, i: int, tag: Any = None) -> bool:
        raise NotImplementedError

    def reset(self, i: int) -> None:
        raise NotImplementedError

    def is_held(self, i: int) -> bool:
        raise NotImplementedError

    def read_tag(self, i: int) -> Any:
        """Tag of the current holder, ``True`` if held but untagged, ``None`` if free."""
        return True if self.is_held(i) else None

    def held_count(self) -> int:
        return sum(1 for i in range(self.size) if self.is_held(i))

    def __len__(self) -> int:
        return self.size


class LockCells(Cells):
    def __init__(self, size: int, pad: bool = False) -> None:
        self.size = size
        self.padded = pad
        if pad:
            # interleave cache-line sized spacers so neighbouring locks land on distinct lines
            locks, spacers = [], []
            for _ in range(size):
                locks.append(threading.Lock())
                spacers.append(bytearray(CACHE_LINE))
            self._spacers = spacers
        else:
            locks = [threading.Lock() for _ in range(size)]
        self._locks = locks

    def test_and_set(self, i, tag=None):
        return self._locks[i].acquire(False)

    def reset(self, i):
        try:
            self._locks[i].release()
        except RuntimeError:
            raise MisuseError(f"cell {i} is not held") from None

    def is_held(self, i):
        return self._locks[i].locked()


class TaggedCells(Cells):
    def __init__(self, size: int) -> None:
        self.size = size
        self._owner: dict[int, Any] = {}

    def test_and_set(self, i, tag=None):
        if tag is None:
            # each acquisition needs a distinct tag, otherwise a caller could "win" its own cell
            tag = object()
        return self._owner.setdefault(i, tag) is tag

    def reset(self, i):
        try:
            del self._owner[i]
        except KeyError:
            raise MisuseError(f"cell {i} is not held") from None

    def reset_if_owner(self, i: int, tag: Any) -> None:
        if self._owner.get(i) is not tag:
            raise MisuseError(f"cell {i} is not held by this caller")
        del self._owner[i]

    def is_held(self, i):
        return i in self._owner

    def read_tag(self, i):
        return self._owner.get(i)


class FlagCells(Cells):
    def __init__(self, size: int) -> None:
        self.size = size
        self.flags = bytearray(size)

    def test_and_set(self, i, tag=None):
        flags = self.flags
        if flags[i]:
            return False
        flags[i] = 1
        return True

    def reset(self, i):
        if not self.flags[i]:
            raise MisuseError(f"cell {i} is not held")
        self.flags[i] = 0

    def is_held(self, i):
        return bool(self.flags[i])

    def held_count(self):
        return self.flags.count(1)


CELL_KINDS = {"lock": LockCells, "tagged": TaggedCells, "flag": FlagCells}


def make_cells(kind: str, size: int, pad: bool = False) -> Cells:
    if kind == "lock":
        return LockCells(size, pad=pad)
    try:
        return CELL_KINDS[kind](size)
    except KeyError:
        raise InvalidConfiguration(f"unknown cell kind {kind!r}") from None
