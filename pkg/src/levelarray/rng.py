"""Seedable pseudo-random streams.

Two generator families are provided: the Park-Miller "minimal standard"
Lehmer generator and Marsaglia's 64-bit xorshift.  Both expose
``next_in_range(lo, hi)`` which draws uniformly from the closed range
``[lo, hi]`` using rejection sampling, so there is no modulo bias.

Per-caller streams are derived from one master seed: the caller index is
XOR-ed into the seed and the result is passed through one splitmix64
finalisation round (see :func:`derive_seed`).
"""
from __future__ import annotations

from dataclasses import dataclass

from .errors import InvalidConfiguration, InvalidRange

__all__ = [
    "LEHMER",
    "MARSAGLIA",
    "RNG_KINDS",
    "Lehmer",
    "XorShift64",
    "RngSpec",
    "derive_seed",
    "make_rng",
    "scramble64",
]

LEHMER = "lehmer-park-miller"
MARSAGLIA = "marsaglia-xorshift"

_ALIASES = {
    "lehmer": LEHMER,
    "park-miller": LEHMER,
    LEHMER: LEHMER,
    "marsaglia": MARSAGLIA,
    "xorshift": MARSAGLIA,
    MARSAGLIA: MARSAGLIA,
}
RNG_KINDS = (LEHMER, MARSAGLIA)

_MASK64 = (1 << 64) - 1


def scramble64(x: int) -> int:
    """One splitmix64 finalisation round over a 64-bit word."""
    x = (x + 0x9E3779B97F4A7C15) & _MASK64
    x = ((x ^ (x >> 30)) * 0xBF58476D1CE4E5B9) & _MASK64
    x = ((x ^ (x >> 27)) * 0x94D049BB133111EB) & _MASK64
    return x ^ (x >> 31)


def derive_seed(master: int, index: int) -> int:
    """Seed of the ``index``-th per-caller stream under ``master``."""
    return scramble64((master ^ index) & _MASK64)


class _Stream:
    # raw outputs are uniform over [1, _span]
    _span: int

    def next_raw(self) -> int:
        raise NotImplementedError

    def next_in_range(self, lo: int, hi: int) -> int:
        if lo > hi:
            raise InvalidRange(f"empty range [{lo}, {hi}]")
        width = hi - lo + 1
        if width == 1:
            return lo
        span = self._span
        if width > span:
            raise InvalidRange(f"range width {width} exceeds generator span {span}")
        limit = span - span % width
        while True:
            r = self.next_raw() - 1
            if r < limit:
                return lo + r % width

    def randbelow(self, k: int) -> int:
        """Uniform integer in ``[0, k)``."""
        return self.next_in_range(0, k - 1)


class Lehmer(_Stream):
    """Park-Miller generator, modulus 2**31 - 1 and multiplier 48271."""

    MODULUS = 2**31 - 1
    MULTIPLIER = 48271
    _span = MODULUS - 1

    def __init__(self, seed: int) -> None:
        state = seed % self.MODULUS
        if state == 0:
            raise InvalidConfiguration("Lehmer seed must not be a multiple of 2**31 - 1")
        self.state = state

    def next_raw(self) -> int:
        self.state = (self.state * self.MULTIPLIER) % self.MODULUS
        return self.state

    def next_in_range(self, lo: int, hi: int) -> int:
        # inlined copy of the base-class loop; this is the hot path of every probe
        if lo > hi:
            raise InvalidRange(f"empty range [{lo}, {hi}]")
        width = hi - lo + 1
        if width == 1:
            return lo
        span = 2147483646
        if width > span:
            raise InvalidRange(f"range width {width} exceeds generator span {span}")
        limit = span - span % width
        s = self.state
        while True:
            s = (s * 48271) % 2147483647
            if s - 1 < limit:
                self.state = s
                return lo + (s - 1) % width


class XorShift64(_Stream):
    """Marsaglia xorshift64 with the (13, 7, 17) shift triple."""

    _span = _MASK64

    def __init__(self, seed: int) -> None:
        state = seed & _MASK64
        if state == 0:
            raise InvalidConfiguration("xorshift seed must be non-zero modulo 2**64")
        self.state = state

    def next_raw(self) -> int:
        x = self.state
        x ^= (x << 13) & _MASK64
        x ^= x >> 7
        x ^= (x << 17) & _MASK64
        self.state = x
        return x


def _canonical_kind(kind: str) -> str:
    try:
        return _ALIASES[kind.lower()]
    except KeyError:
        raise InvalidConfiguration(f"unknown rng kind {kind!r}") from None


def make_rng(kind: str, seed: int) -> _Stream:
    kind = _canonical_kind(kind)
    if kind == LEHMER:
        return Lehmer(seed)
    return XorShift64(seed)


@dataclass(frozen=True)
class RngSpec:
    """Generator family plus seed; identical specs give identical streams."""

    kind: str = LEHMER
    seed: int = 1

    def __post_init__(self) -> None:
        object.__setattr__(self, "kind", _canonical_kind(self.kind))
        # fail early on absorbing seeds
        make_rng(self.kind, self.seed)

    def stream(self, index: int | None = None) -> _Stream:
        """The master stream, or the derived stream of caller ``index``."""
        if index is None:
            return make_rng(self.kind, self.seed)
        seed = derive_seed(self.seed, index)
        modulus = Lehmer.MODULUS if self.kind == LEHMER else 1 << 64
        if seed % modulus == 0:
            # the scrambled seed landed on the absorbing state; 1 is an arbitrary fixed substitute
            seed = 1
        return make_rng(self.kind, seed)

    def to_dict(self) -> dict:
        return {"kind": self.kind, "seed": self.seed}

    @classmethod
    def parse(cls, text: str) -> "RngSpec":
        """Parse ``kind:seed`` (e.g. ``lehmer:42``)."""
        kind, _, seed = text.partition(":")
        if not seed:
            raise InvalidConfiguration(f"expected kind:seed, got {text!r}")
        return cls(kind.strip(), int(seed, 0))
