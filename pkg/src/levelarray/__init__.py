"""Randomized long-lived renaming with a batched activity array.

Quick start::

    >>> from levelarray import LevelArray, RngSpec
    >>> arr = LevelArray(16)
    >>> rng = RngSpec("lehmer", 7).stream()
    >>> name, stats = arr.get(rng)
    >>> arr.collect() == {name}
    True
    >>> arr.free(name)
"""
from .baselines import DeterministicArray, LinearProbeArray, RandomArray, make_algorithm
from .cells import FlagCells, LockCells, TaggedCells
from .core import (
    BACKUP,
    BatchLayout,
    LevelArray,
    ProbeStats,
    RenamingArray,
    batch_of,
    build_layout,
)
from .errors import (
    CapacityExhausted,
    InvalidConfiguration,
    InvalidName,
    InvalidRange,
    LevelArrayError,
    MisuseError,
    ScheduleError,
)
from .rng import Lehmer, RngSpec, XorShift64

__version__ = "0.1.0"

__all__ = [
    "BACKUP",
    "BatchLayout",
    "CapacityExhausted",
    "DeterministicArray",
    "FlagCells",
    "InvalidConfiguration",
    "InvalidName",
    "InvalidRange",
    "LevelArray",
    "LevelArrayError",
    "Lehmer",
    "LinearProbeArray",
    "LockCells",
    "MisuseError",
    "ProbeStats",
    "RandomArray",
    "RenamingArray",
    "RngSpec",
    "ScheduleError",
    "TaggedCells",
    "XorShift64",
    "batch_of",
    "build_layout",
    "make_algorithm",
]
