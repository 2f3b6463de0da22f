"""Closed-form constants and probability bounds for the batched array.

Thresholds are exact :class:`fractions.Fraction` values because
overcrowding is a sharp integer comparison; floats appear only in reports.

Batch-reach bounds: ``pi(0) = 1`` and ``pi(j) = 2**-(2**j + 5)`` for
``j >= 1``.  A batch ``j >= 1`` is overcrowded once it holds at least
``16 * pi(j) * n = n / 2**(2**j + 1)`` names.  Batch 0 uses
``16 * pi(0) * n = 16n``, more than its size, so it is never overcrowded.
"""
from __future__ import annotations

import csv
import io
import json
import math
from dataclasses import dataclass, field
from fractions import Fraction

from scipy import stats as _stats

from .errors import InvalidConfiguration

__all__ = [
    "BETA_DEFAULT",
    "BoundConstants",
    "FailBound",
    "batch0_fail_bound",
    "batch_fail_bound",
    "binomial_upper_confidence",
    "bound_constants",
    "hold_bound",
    "log2_exact",
    "min_probe_count_for_whp",
    "monitored_batches",
    "mu",
    "overcrowd_threshold",
    "pi",
]

# strictly below the 1/(45 * 2**5) ceiling on the tail exponent constant
BETA_DEFAULT = Fraction(1, 45 * 2**5 + 1)


def log2_exact(n: int) -> int:
    if n < 1 or n & (n - 1):
        raise InvalidConfiguration(f"{n} is not a power of two")
    return n.bit_length() - 1


def pi(j: int) -> Fraction:
    """Bound on the probability that a get reaches batch ``j``."""
    if j < 0:
        raise ValueError("batch index must be non-negative")
    if j == 0:
        return Fraction(1)
    return Fraction(1, 2 ** (2**j + 5))


def overcrowd_threshold(n: int, j: int) -> Fraction:
    """Occupancy at which batch ``j`` counts as overcrowded."""
    log2_exact(n)
    return 16 * pi(j) * n


def is_vacuous(n: int, j: int) -> bool:
    """Thresholds below one slot carry no information."""
    return overcrowd_threshold(n, j) < 1


def monitored_batches(n: int) -> range:
    """Batches ``0 .. floor(log2 log2 n) - 1`` over which balance is defined."""
    k = log2_exact(n)
    if k < 2:
        return range(0)
    return range(int(math.floor(math.log2(k))))


def hold_bound(j: int, c: int) -> Fraction:
    """Upper bound ``c * pi(j)`` on the chance a process holds a name in batch ``j``."""
    return c * pi(j)


def batch0_fail_bound(c0: int) -> Fraction:
    """Chance all ``c0`` batch-0 trials fail while at most ``n - 1`` other names are held."""
    return Fraction(2, 3) ** c0


@dataclass(frozen=True)
class FailBound:
    k: int
    c: int
    bound: Fraction
    pi: Fraction

    @property
    def satisfied(self) -> bool:
        """Whether the bound certifies regularity (``bound <= pi(k)``)."""
        return self.bound <= self.pi

    @property
    def theory_mode(self) -> bool:
        return self.c >= 16


def batch_fail_bound(k: int, c_k: int) -> FailBound:
    """Bound on reaching batch ``k`` when every earlier batch is not overcrowded.

    ``k = 1`` uses the batch-0 argument, ``(2/3)**c``; ``k >= 2`` uses
    ``(1/2)**(c * (2**(k-1) - k + 1))``.
    """
    if k < 1:
        raise ValueError("reach bounds start at batch 1")
    if c_k < 1:
        raise ValueError("probe count must be positive")
    if k == 1:
        bound = batch0_fail_bound(c_k)
    else:
        bound = Fraction(1, 2 ** (c_k * (2 ** (k - 1) - k + 1)))
    return FailBound(k, c_k, bound, pi(k))


def min_probe_count_for_whp(alpha: float, gamma: float) -> int:
    """Smallest integer probe count ``>= 2 (alpha + gamma + 1)``."""
    if alpha < 1 or gamma < 1:
        raise ValueError("alpha and gamma must both be >= 1")
    return math.ceil(2 * (Fraction(alpha) + Fraction(gamma) + 1))


def mu(n: int, B: float, beta: Fraction = BETA_DEFAULT) -> float:
    """``n**B * log log n / 2**(beta * sqrt n)`` as a float (reporting only)."""
    loglog = math.log2(math.log2(n)) if n > 2 else 0.0
    log2_mu = B * math.log2(n) + (math.log2(loglog) if loglog > 0 else -math.inf) \
        - float(beta) * math.sqrt(n)
    return 2.0 ** log2_mu if log2_mu < 1024 else math.inf


def binomial_upper_confidence(successes: int, trials: int, confidence: float = 0.99) -> float:
    """One-sided Clopper-Pearson upper bound on a binomial proportion."""
    if trials <= 0:
        raise ValueError("need at least one trial")
    if successes >= trials:
        return 1.0
    return float(_stats.beta.ppf(confidence, successes + 1, trials - successes))


def _frac(x: Fraction) -> str:
    num, den = x.numerator, x.denominator
    if den == 1:
        return str(num)
    if den.bit_length() > 64 and den & (den - 1) == 0:
        # tiny tail bounds: keep them exact without printing thousands of digits
        return f"{num}/2^{den.bit_length() - 1}"
    return f"{num}/{den}"


@dataclass
class BoundConstants:
    n: int
    probe_counts: tuple[int, ...]
    alpha: float = 1
    gamma: float = 1
    B: float = 2
    beta: Fraction = BETA_DEFAULT
    rows: list[dict] = field(default_factory=list)

    @property
    def min_probe_count(self) -> int:
        return min_probe_count_for_whp(self.alpha, self.gamma)

    @property
    def mu(self) -> float:
        return mu(self.n, self.B, self.beta)

    def pi(self, j: int) -> Fraction:
        return pi(j)

    def threshold(self, j: int) -> Fraction:
        return overcrowd_threshold(self.n, j)

    def hold_bound(self, j: int) -> Fraction:
        return hold_bound(j, self.probe_counts[j])

    def to_dict(self) -> dict:
        return {
            "n": self.n,
            "alpha": self.alpha,
            "gamma": self.gamma,
            "B": self.B,
            "beta": _frac(self.beta),
            "mu": self.mu,
            "min_probe_count_for_whp": {
                "alpha": self.alpha, "gamma": self.gamma, "value": self.min_probe_count,
            },
            "monitored_batches": list(monitored_batches(self.n)),
            "batches": self.rows,
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2)

    def to_csv(self) -> str:
        buf = io.StringIO()
        cols = ["batch", "pi", "n_j", "threshold", "c", "hold_bound", "reach_bound",
                "reach_bound_ok", "monitored", "vacuous"]
        w = csv.DictWriter(buf, fieldnames=cols, lineterminator="\n")
        w.writeheader()
        for row in self.rows:
            w.writerow({k: row[k] for k in cols})
        return buf.getvalue()


def bound_constants(n: int, c: int | tuple[int, ...] = 16, *, alpha: float = 1, gamma: float = 1,
                    B: float = 2, beta: Fraction = BETA_DEFAULT) -> BoundConstants:
    """Table of per-batch constants for capacity ``n`` (a power of two)."""
    m = log2_exact(n)
    counts = (c,) * m if isinstance(c, int) else tuple(c)
    if len(counts) != m:
        raise InvalidConfiguration(f"expected {m} probe counts, got {len(counts)}")
    monitored = set(monitored_batches(n))
    rows = []
    for j in range(m):
        p = pi(j)
        thr = overcrowd_threshold(n, j)
        hb = hold_bound(j, counts[j])
        if j == 0:
            reach, reach_ok = Fraction(1), True
        else:
            fb = batch_fail_bound(j, counts[j - 1])
            reach, reach_ok = fb.bound, fb.satisfied
        rows.append({
            "batch": j,
            "pi": _frac(p),
            "pi_float": float(p),
            "n_j": _frac(p * n),
            "threshold": _frac(thr),
            "threshold_float": float(thr),
            "c": counts[j],
            "hold_bound": _frac(hb),
            "reach_bound": _frac(reach),
            "reach_bound_float": float(reach),
            "reach_bound_ok": reach_ok,
            "monitored": j in monitored,
            "vacuous": thr < 1,
        })
    return BoundConstants(n, counts, alpha, gamma, B, beta, rows)
