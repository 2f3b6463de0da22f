"""Exception hierarchy shared by every module of the package."""


class LevelArrayError(Exception):
    """Base class for all errors raised by this package."""


class InvalidConfiguration(LevelArrayError, ValueError):
    """A structure, experiment or benchmark was configured with bad parameters."""


class InvalidRange(LevelArrayError, ValueError):
    """``next_in_range`` was asked for an empty or oversized range."""


class InvalidName(LevelArrayError, ValueError):
    """A name does not decode to any slot of the layout."""


class CapacityExhausted(LevelArrayError, RuntimeError):
    """Every slot was held; only reachable with more holders than the capacity."""


class MisuseError(LevelArrayError, RuntimeError):
    """A name was freed that the caller does not hold."""


class ScheduleError(LevelArrayError, ValueError):
    """A schedule is malformed.  ``index`` locates the offending entry when known."""

    def __init__(self, message: str, index: int | None = None) -> None:
        super().__init__(message if index is None else f"{message} (at index {index})")
        self.index = index
