"""Property-based checks of the structural invariants."""
from fractions import Fraction

from hypothesis import assume, given
from hypothesis import strategies as st
from hypothesis.stateful import Bundle, RuleBasedStateMachine, invariant, rule

from levelarray import BACKUP, LevelArray
from levelarray.analysis import overcrowd_threshold, pi
from levelarray.baselines import make_algorithm
from levelarray.core import build_layout
from levelarray.rng import RngSpec
from levelarray.simulator import (
    Schedule,
    SimConfig,
    check_collect_validity,
    check_conservation,
    check_uniqueness,
    dump_config,
    parse_config,
    run_schedule,
)


@given(st.integers(2, 2**20), st.integers(1, 40))
def test_layout_invariants(n, c):
    lay = build_layout(n, c)
    cap = lay.capacity
    assert cap >= n and cap & (cap - 1) == 0 and cap < 2 * n
    assert lay.batch_sizes[0] == 3 * cap // 2
    for i in range(1, lay.batch_count):
        assert lay.batch_sizes[i] == cap // 2 ** (i + 1)
    assert lay.main_size == sum(lay.batch_sizes) <= 2 * cap
    for i in range(lay.batch_count - 1):
        assert lay.batch_offsets[i] + lay.batch_sizes[i] == lay.batch_offsets[i + 1]
    assert lay.probe_prefix[0] == 0
    assert all(lay.probe_prefix[j + 1] == lay.probe_prefix[j] + c for j in range(lay.batch_count))


@given(st.integers(1, 16), st.data())
def test_name_cell_round_trip(k, data):
    lay = build_layout(2**k)
    cell = data.draw(st.integers(0, lay.cell_count - 1))
    name = lay.name_of(cell)
    assert lay.cell_of(name) == cell
    b = lay.batch_of_cell(cell)
    if b == BACKUP:
        assert name >= 2 * lay.capacity
    else:
        assert cell in lay.batch_range(b) and name < 2 * lay.capacity


@given(st.sampled_from(["lehmer", "marsaglia"]), st.integers(1, 2**40),
       st.integers(-10**9, 10**9), st.integers(0, 10**6))
def test_next_in_range_bounds(kind, seed, lo, width):
    assume(kind == "marsaglia" or seed % (2**31 - 1))
    r = RngSpec(kind, seed).stream()
    for _ in range(20):
        v = r.next_in_range(lo, lo + width)
        assert lo <= v <= lo + width


@given(st.integers(1, 6), st.integers(2, 64))
def test_threshold_identity(j, k):
    n = 2**k
    assert overcrowd_threshold(n, j) == 16 * pi(j) * n == Fraction(n, 2 ** (2**j + 1))


def _well_formed(ops):
    out, holding = [], False
    for op in ops:
        if op == "G" and holding:
            op = "F"
        elif op == "F" and not holding:
            op = "G"
        if op == "G":
            holding = True
        elif op == "F":
            holding = False
        out.append(op)
    return "".join(out)


schedules = st.integers(1, 8).flatmap(lambda P: st.tuples(
    st.just(P),
    st.lists(st.text("GFC.", max_size=12).map(_well_formed), min_size=P, max_size=P),
    st.lists(st.integers(0, P - 1), max_size=600),
))


@given(schedules, st.sampled_from(["level", "random", "linear", "det"]), st.integers(1, 10**6))
def test_random_schedules_keep_invariants(sched, algo, seed):
    P, inputs, steps = sched
    n = 8
    arr = LevelArray(n, cells="flag") if algo == "level" else make_algorithm(algo, 2 * n, cells="flag")
    trace = run_schedule(arr, Schedule(n, steps, inputs), RngSpec("lehmer", seed), sample_every=1)
    assert check_uniqueness(trace) is None
    assert check_collect_validity(trace) == []
    assert check_conservation(trace) == []
    assert arr.occupancy() == len(trace.final_holders)


@given(schedules, st.integers(1, 1000))
def test_config_text_round_trip(sched, seed):
    P, inputs, steps = sched
    cfg = SimConfig(Schedule(8, steps, inputs, B=2), RngSpec("marsaglia", seed))
    again = parse_config(dump_config(cfg))
    assert again.schedule.inputs == inputs
    assert list(again.schedule.steps) == steps
    assert again.rng == cfg.rng and again.schedule.B == 2


class GetFreeMachine(RuleBasedStateMachine):
    """The array agrees with a set model under any get/free interleaving."""

    names = Bundle("names")

    def __init__(self):
        super().__init__()
        self.array = LevelArray(16, cells="flag")
        self.rng = RngSpec("lehmer", 3).stream()
        self.model: set[int] = set()

    @rule(target=names)
    def get(self):
        if len(self.model) >= 16:
            return None
        name, stats = self.array.get(self.rng)
        assert name not in self.model
        assert stats.probes >= 1
        self.model.add(name)
        return name

    @rule(name=names)
    def free(self, name):
        if name in self.model:
            self.array.free(name)
            self.model.discard(name)

    @invariant()
    def collect_matches_model(self):
        assert self.array.collect() == self.model
        assert self.array.occupancy() == len(self.model)


TestGetFree = GetFreeMachine.TestCase
