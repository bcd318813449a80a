"""Variance stabilization at a glance.

For each (n, K) the cGA runs ceil(100*sqrt(n)*K + 100*K^2) iterations with no
optimum stopping; we then look at the final sampling variance.  On Cliff the
model hovers at the slope boundary and the variance stays well above the
all-at-the-borders floor of 1 - 1/n; dividing by sqrt(K) roughly collapses
the medium-K curves.
"""

import math

from cga_lab import engine, experiments, fitness

BASE_SEED = 2718281828

print(f"{'fit':<7} {'n':>4} {'K':>10} {'horizon':>8} {'mean V':>8} "
      f"{'V/sqrtK':>8} {'floor':>7}")
for kind, n_values in (("cliff", (99, 150, 201)), ("onemax", (100, 150, 200))):
    for n in n_values:
        f = fitness.make(kind, n)
        for formula in ("log n", "n^0.45"):
            k = experiments.resolve_k(formula, n)
            horizon = experiments.variance_horizon(n, k)
            specs = [engine.BatchSpec(k=k, stream_key=(n, 0, run), seed_tag=0,
                                      max_iterations=horizon)
                     for run in range(10)]
            results = engine.run_batch(n, f, BASE_SEED, specs, stop_at_optimum=False)
            mean_v = sum(r.final_variance for r in results) / len(results)
            print(f"{kind:<7} {n:>4} {formula:>10} {horizon:>8} {mean_v:>8.3f} "
                  f"{mean_v / math.sqrt(k):>8.3f} {1 - 1 / n:>7.4f}")
