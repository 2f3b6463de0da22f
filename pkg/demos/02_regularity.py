"""How often does a get reach the later batches?

With 16 trials per batch and a balanced array, the chance of reaching
batch k is bounded by pi_k.  We build the most crowded balanced state
that has n - 1 holders, fire fresh gets at it, and compare the observed
reach frequencies (with a 99% upper confidence bound) to the bounds.
"""
from levelarray.analysis import batch_fail_bound, pi
from levelarray.rng import RngSpec
from levelarray.simulator import regularity_experiment, worst_balanced_fill

n = 2**16
print("background occupancy per batch:", worst_balanced_fill(n)[:5], "...")

res = regularity_experiment(n, probe_counts=16, trials=100_000, rng_spec=RngSpec("lehmer", 4))
print(f"{'batch':>5} {'reached':>8} {'fraction':>10} {'99% upper':>10} {'analytic':>10} {'pi_k':>10}")
for k in range(1, 4):
    fb = batch_fail_bound(k, 16)
    print(f"{k:>5} {res.reached[k]:>8} {res.fraction(k):>10.2e} {res.upper(k):>10.2e} "
          f"{float(fb.bound):>10.2e} {float(pi(k)):>10.2e}")

# one trial per batch is what the benchmarks use; regularity is no longer guaranteed
res1 = regularity_experiment(n, probe_counts=1, trials=100_000, rng_spec=RngSpec("lehmer", 4))
print("c = 1: fraction reaching batch 1 =", res1.fraction(1), "vs pi_1 =", float(pi(1)))
