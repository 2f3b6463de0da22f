import pytest

from levelarray.core import BACKUP, batch_of, build_layout, next_power_of_two
from levelarray.errors import InvalidConfiguration, InvalidName


def materialize(n, c):
    """Independent oracle: lay the batches down cell by cell."""
    sizes = [n + n // 2]
    half = n
    for _ in range(1, n.bit_length() - 1):
        half //= 2
        sizes.append(half // 2)
    owner = []
    for b, size in enumerate(sizes):
        owner.extend([b] * size)
    offsets = [owner.index(b) if size else len(owner) for b, size in enumerate(sizes)]
    prefix = [0]
    for _ in sizes:
        prefix.append(prefix[-1] + c)
    return sizes, offsets, prefix, owner


@pytest.mark.parametrize("k", range(1, 21))
def test_layout_matches_brute_force(k):
    n = 2**k
    lay = build_layout(n, 3)
    sizes, offsets, prefix, owner = materialize(n, 3)
    assert list(lay.batch_sizes) == sizes
    assert list(lay.batch_offsets) == offsets
    assert list(lay.probe_prefix) == prefix
    assert lay.main_size == len(owner) <= 2 * n
    assert lay.backup_size == n
    assert lay.batch_count == k
    step = 1 if n <= 2**14 else 97
    for cell in range(0, len(owner), step):
        assert lay.batch_of_cell(cell) == owner[cell]
    for off in offsets:
        for cell in (off - 1, off):
            if 0 <= cell < len(owner):
                assert lay.batch_of_cell(cell) == owner[cell]
    assert lay.batch_of_cell(lay.main_size) == BACKUP


def test_n16_example():
    lay = build_layout(16)
    assert list(lay.batch_sizes) == [24, 4, 2, 1]
    assert lay.main_size == 31 and lay.backup_size == 16


def test_n2_example():
    lay = build_layout(2)
    assert list(lay.batch_sizes) == [3]
    assert lay.main_size == 3 and lay.backup_size == 2


def test_prefix_example():
    assert build_layout(1024, 16).probe_prefix[3] == 48


def test_batch_of_examples():
    lay = build_layout(16)
    assert batch_of(lay, 0) == 0
    assert batch_of(lay, 24) == 1
    assert batch_of(lay, 33) == BACKUP
    with pytest.raises(InvalidName):
        batch_of(lay, 31)       # gap between main region and backup names
    with pytest.raises(InvalidName):
        batch_of(lay, 48)


def test_backup_names_round_trip():
    lay = build_layout(64)
    for i in range(lay.backup_size):
        name = lay.name_of(lay.main_size + i)
        assert name == 128 + i
        assert lay.cell_of(name) == lay.main_size + i


@pytest.mark.parametrize("bad", [0, 1, -4, 2.0, True])
def test_bad_capacity(bad):
    with pytest.raises(InvalidConfiguration):
        build_layout(bad)


def test_bad_probe_counts():
    with pytest.raises(InvalidConfiguration):
        build_layout(16, 0)
    with pytest.raises(InvalidConfiguration):
        build_layout(16, [1, 1, 1])
    assert build_layout(16, [1, 2, 3, 4]).probe_prefix == (0, 1, 3, 6, 10)


def test_non_power_of_two_rounds_up():
    lay = build_layout(1000)
    assert lay.capacity == 1024 and lay.requested_capacity == 1000
    assert next_power_of_two(1) == 1 and next_power_of_two(5) == 8 and next_power_of_two(8) == 8


def test_max_probes():
    lay = build_layout(16, 2)
    assert lay.max_probes == 2 * 4 + 16
