"""The runtime phase transition on Cliff, shrunk to seconds.

Runs a small grid of update strengths at n=12 and prints the evaluation
medians next to the reference scales (3/2)^n, 2^n and n^(n/3).  Small K
behaves like random search (~2^n), medium K gets trapped by the negative
drift at the cliff, and just past the transition the runtime collapses to
roughly (3/2)^n.
"""

from cga_lab import engine, fitness

BASE_SEED = 2718281828
n, runs, budget = 12, 60, 5_000_000
f = fitness.cliff(n)

print(f"n={n}: (3/2)^n = {1.5 ** n:.0f},  2^n = {2 ** n},  n^(n/3) = {float(n) ** (n / 3):.0f}")
print(f"{'K':>6} {'median':>10} {'q90':>10} {'max':>10} {'censored':>9}")
for j in range(9):
    k = 2.0 ** j
    specs = [engine.BatchSpec(k=k, stream_key=(n, j, run), seed_tag=0,
                              max_evaluations=budget) for run in range(runs)]
    results = engine.run_batch(n, f, BASE_SEED, specs)
    evals = sorted(r.evaluations for r in results)
    print(f"{int(k):>6} {evals[runs // 2]:>10} {evals[int(runs * 0.9)]:>10} "
          f"{evals[-1]:>10} {sum(r.censored for r in results):>9}")
