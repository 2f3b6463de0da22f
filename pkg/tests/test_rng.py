import numpy as np
import pytest
from scipy import stats

from levelarray.errors import InvalidConfiguration, InvalidRange
from levelarray.rng import (
    LEHMER,
    MARSAGLIA,
    Lehmer,
    RngSpec,
    XorShift64,
    derive_seed,
    make_rng,
    scramble64,
)


def test_lehmer_minimal_standard_check_value():
    # 10000th output from seed 1 for multiplier 48271 is a published constant
    r = Lehmer(1)
    for _ in range(10_000):
        v = r.next_raw()
    assert v == 399268537


def test_xorshift_reference_output():
    assert XorShift64(88172645463325252).next_raw() == 8748534153485358512


@pytest.mark.parametrize("kind", [LEHMER, MARSAGLIA])
def test_singleton_range(kind):
    r = make_rng(kind, 3)
    assert all(r.next_in_range(5, 5) == 5 for _ in range(100))


@pytest.mark.parametrize("kind", [LEHMER, MARSAGLIA])
def test_empty_range_rejected(kind):
    with pytest.raises(InvalidRange):
        make_rng(kind, 3).next_in_range(6, 5)


@pytest.mark.parametrize("kind", [LEHMER, MARSAGLIA])
def test_chi_square_uniform_0_7(kind):
    r = make_rng(kind, 12345)
    draws = np.fromiter((r.next_in_range(0, 7) for _ in range(1_000_000)), dtype=np.int64)
    counts = np.bincount(draws, minlength=8)
    assert counts.size == 8
    assert stats.chisquare(counts).pvalue > 0.001


@pytest.mark.parametrize("kind", [LEHMER, MARSAGLIA])
def test_same_spec_same_stream(kind):
    a, b = RngSpec(kind, 99).stream(), RngSpec(kind, 99).stream()
    assert [a.next_in_range(0, 10**6) for _ in range(1000)] == \
        [b.next_in_range(0, 10**6) for _ in range(1000)]


def test_derived_streams_differ_and_are_stable():
    spec = RngSpec("lehmer", 7)
    first = [spec.stream(i).next_in_range(0, 2**30) for i in range(50)]
    assert len(set(first)) == 50
    assert first == [spec.stream(i).next_in_range(0, 2**30) for i in range(50)]


def test_derive_seed_is_scrambled_xor():
    assert derive_seed(10, 3) == scramble64(10 ^ 3)
    assert derive_seed(10, 3) != derive_seed(10, 4)


def test_absorbing_seeds_rejected():
    with pytest.raises(InvalidConfiguration):
        RngSpec("lehmer", 0)
    with pytest.raises(InvalidConfiguration):
        RngSpec("lehmer", 2**31 - 1)
    with pytest.raises(InvalidConfiguration):
        RngSpec("marsaglia", 0)


def test_kind_aliases_and_parse():
    assert RngSpec("park-miller", 1).kind == LEHMER
    assert RngSpec("xorshift", 1).kind == MARSAGLIA
    spec = RngSpec.parse("marsaglia:42")
    assert spec == RngSpec(MARSAGLIA, 42)
    assert spec.to_dict() == {"kind": MARSAGLIA, "seed": 42}
    with pytest.raises(InvalidConfiguration):
        RngSpec("mersenne", 1)


def test_lehmer_fast_path_matches_generic_loop():
    from levelarray.rng import _Stream
    fast, slow = Lehmer(77), Lehmer(77)
    for width in (2, 3, 7, 1000, 2**20 + 3):
        for _ in range(500):
            assert fast.next_in_range(-5, width - 6) == _Stream.next_in_range(slow, -5, width - 6)
