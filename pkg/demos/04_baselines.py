"""Batched array against the flat baselines.

All four algorithms run the same register/deregister loop at 90% prefill
(each worker holds between 90% and 100% of its share of N names).  The
flat random array averages about as few probes as the batched one but has a
longer tail; linear probing clusters; the deterministic scan pays for the
whole prefix on every get.
"""
import warnings

from levelarray.bench import BenchConfig, emit_results, run_bench

warnings.simplefilter("ignore", RuntimeWarning)   # fewer cores than threads is fine here

rows = []
for algo, ops in (("level", 400_000), ("random", 400_000), ("linear", 400_000), ("det", 2000)):
    cfg = BenchConfig(algo=algo, threads=4, emulated=2000, prefill=90, ops=ops, warmup=0)
    rows.append(run_bench(cfg))

print(emit_results(rows, "csv"))
for r in rows:
    print(f"{r.config.algo:>6}: global worst {r.global_max_probes:>5}, "
          f"probe histogram head {sorted(r.probe_histogram.items())[:4]}")
