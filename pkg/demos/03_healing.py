"""Self-healing from an overcrowded start.

Batch 0 starts a quarter full and batch 1 half full, which is past the
overcrowding threshold of batch 1.  Every injected name belongs to a
process that soon releases it and then keeps churning under a compact
random schedule.  Snapshots every 4000 operations show the occupancy
drifting back to the balanced profile.

Half of batch 1 is exactly its threshold, so the balance flag clears at
the first batch-1 release.  The slower story is the drain: the
``held`` column counts injected names still in place.
"""
from levelarray.rng import RngSpec
from levelarray.simulator import CompactnessSpec, parse_fill, run_healing_experiment

rep = run_healing_experiment(2**16, parse_fill("b0=0.25,b1=0.5"), CompactnessSpec(2),
                             total_ops=80_000, snapshot_interval=4000,
                             rng_spec=RngSpec("lehmer", 1))

print("processes", rep.processes, "injected", rep.injected)
print(f"{'ops':>7} {'batch0':>7} {'batch1':>7} {'batch2':>7} {'batch3':>7} {'held':>7}  balanced")
for s in rep.snapshots:
    print(f"{s.op_count:>7} " + " ".join(f"{x:>7}" for x in s.occupancy[:4])
          + f" {s.injected_held:>7}  {s.fully_balanced}")

print("fully balanced from op", rep.convergence_op, "(step", rep.convergence_time, ")")
print("injected names released by then:", rep.injected_freed_by_convergence)
print("every injected name released by op", rep.drained_op)

# the same data as a long-format CSV for plotting elsewhere
print(rep.histogram_csv().splitlines()[:3])
