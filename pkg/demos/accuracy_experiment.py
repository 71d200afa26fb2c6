"""Monte Carlo check of the estimator's accuracy guarantees.

Replays one fixed categorical stream through many independently seeded
counters and compares the empirical error against the configured target:
the relative mean squared error must stay below sigma^2, and the mean
estimate must sit on the true counts.
"""

import math

from veccount import CategoricalStream, CounterConfig, ExperimentSpec, run_trials

N = 10**4
SIGMA = 0.3
TRIALS = 20000

spec = ExperimentSpec(
    algo="veccount",
    stream_limit=N,
    dim=4,
    rel_error=SIGMA,
    trials=TRIALS,
    base_seed=20260816,
    source=CategoricalStream(dim=4, probs=(0.5, 0.25, 0.125, 0.125), length=N),
)
config = CounterConfig.derive(N, 4, SIGMA)
print(f"n={N} d=4 sigma={SIGMA}: accuracy a={config.accuracy}, "
      f"budget M={config.symbol_budget}, scale cap {config.scale_cap}")

stats = run_trials(spec)

print()
print(f"{TRIALS} trials")
print(f"true counts     {stats.x}")
print("mean estimate   " + " ".join(f"{m:9.2f}" for m in stats.mean_estimate))
print("4 x stderr      " + " ".join(f"{4 * e:9.2f}" for e in stats.mean_estimate_stderr))

print()
print(f"relative MSE    {stats.relative_mse:.6f}")
print(f"target sigma^2  {SIGMA**2:.6f}")
print(f"fail rate       {stats.fail_count / TRIALS:.2e} (budgeted at sigma^2/2 = {SIGMA**2 / 2})")

print()
print("final scale histogram:")
for u in sorted(stats.u_histogram):
    count = stats.u_histogram[u]
    bar = "#" * max(1, round(60 * count / TRIALS))
    print(f"  U={u:2d}  {count:7d}  {bar}")

# the tail of U decays geometrically past log2(n/(ad) + 1)
base = math.log2(N / (config.accuracy * 4) + 1)
print()
print("P(U >= r + log2(n/(ad)+1)) vs 2^-r:")
for r in range(1, 5):
    threshold = math.ceil(r + base)
    rate = sum(c for u, c in stats.u_histogram.items() if u >= threshold) / TRIALS
    print(f"  r={r}: {rate:.5f} <= {2.0**-r:.5f}")
