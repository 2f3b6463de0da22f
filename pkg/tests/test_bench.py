import csv
import io
import json
import warnings

import jsonschema
import pytest

from levelarray.bench import (
    CSV_HEADER,
    RESULT_SCHEMA,
    BenchConfig,
    emit_results,
    run_bench,
    run_sweep,
)
from levelarray.errors import InvalidConfiguration

pytestmark = pytest.mark.filterwarnings("ignore:.*hardware thread")


def quick(**kw):
    base = dict(threads=2, emulated=200, ops=4000, warmup=0, seed=7)
    base.update(kw)
    return BenchConfig(**base)


def test_csv_header_exact():
    res = run_bench(quick())
    text = emit_results(res, "csv")
    assert text.splitlines()[0] == \
        "algo,threads,N,L,prefill,throughput,avg_probes,stddev_probes,max_probes,backup_uses"
    assert tuple(text.splitlines()[0].split(",")) == CSV_HEADER


def test_json_validates_and_round_trips(tmp_path):
    res = run_bench(quick(debug=True))
    out = tmp_path / "r.json"
    emit_results(res, "json", out)
    doc = json.loads(out.read_text())
    jsonschema.validate(doc, RESULT_SCHEMA)
    r = doc["results"][0]
    assert r["config"]["N"] == 200 and r["config"]["L"] == 400
    assert r["total_ops"] >= 4000 and r["violations"] == 0
    with pytest.raises(jsonschema.ValidationError):
        bad = dict(doc)
        bad["results"] = [dict(r, avg_probes=-1)]
        jsonschema.validate(bad, RESULT_SCHEMA)


def test_sweep_rows():
    results = run_sweep(quick(ops=800), threads=[1, 2, 4, 8], algos=["level", "random"])
    rows = list(csv.reader(io.StringIO(emit_results(results, "csv"))))[1:]
    assert len(rows) == 8
    assert [r[0] for r in rows] == ["level"] * 4 + ["random"] * 4
    assert [int(r[1]) for r in rows[:4]] == [1, 2, 4, 8]


def test_result_invariants():
    res = run_bench(quick(algo="level", prefill=50))
    assert res.avg_probes >= 1
    assert res.global_max_probes >= res.max_probes >= res.avg_probes
    assert sum(res.probe_histogram.values()) == res.total_gets
    assert sum(res.batch_histogram) == res.total_gets
    assert res.stddev_probes >= 0


def test_config_validation():
    with pytest.raises(InvalidConfiguration):
        run_bench(quick(slots=100))
    with pytest.raises(InvalidConfiguration):
        run_bench(quick(prefill=120))
    with pytest.raises(InvalidConfiguration):
        run_bench(quick(algo="cuckoo"))
    with pytest.raises(InvalidConfiguration):
        run_bench(quick(emulated=1, threads=2))
    with pytest.raises(InvalidConfiguration):
        run_bench(quick(ops=None, seconds=0))
    with pytest.raises(InvalidConfiguration):
        emit_results(run_bench(quick(ops=100)), "xml")


def test_emulated_rounds_up_to_thread_multiple():
    cfg = quick(emulated=202, threads=4, slots=404)
    assert cfg.per_thread == 51 and cfg.effective_emulated == 204
    with pytest.raises(InvalidConfiguration):
        cfg.validate()


def test_timed_run_with_warmup():
    res = run_bench(quick(ops=None, seconds=0.3, warmup=0.1))
    assert res.total_ops > 0 and res.throughput > 0
    assert 0.2 < res.elapsed < 2.0


def test_single_thread_is_reproducible():
    a = run_bench(quick(threads=1))
    b = run_bench(quick(threads=1))
    assert a.probe_histogram == b.probe_histogram


def test_det_average_grows_with_prefill():
    avgs = [run_bench(quick(algo="det", threads=1, prefill=p)).avg_probes for p in (0, 50, 90)]
    assert avgs[0] < avgs[1] < avgs[2]


def test_backup_unused_at_standard_parameters():
    res = run_bench(quick(threads=4, emulated=2000, ops=100_000, prefill=50))
    assert res.backup_uses == 0


def test_level_histogram_decreasing_over_runs():
    total = None
    for seed in range(1, 11):
        res = run_bench(quick(threads=2, emulated=2000, ops=20_000, seed=seed))
        h = res.batch_histogram
        total = h if total is None else [a + b for a, b in zip(total, h)]
    nonzero = [x for x in total[:-1] if x]
    assert nonzero == sorted(nonzero, reverse=True)


def test_warns_when_oversubscribed(monkeypatch):
    monkeypatch.setattr("os.cpu_count", lambda: 1)
    with warnings.catch_warnings(record=True) as caught:
        warnings.simplefilter("always")
        res = run_bench(quick(threads=2, ops=100))
    assert any("hardware thread" in str(w.message) for w in caught)
    assert res.notes


def test_repetitions_average_per_thread_max():
    res = run_bench(quick(repetitions=3, ops=2000))
    assert len(res.per_thread) == 6
    assert res.max_probes == pytest.approx(sum(p["max_probes"] for p in res.per_thread) / 6)
