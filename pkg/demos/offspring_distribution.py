"""The offspring one-bit count and its exact distribution.

A cGA offspring flips each bit i independently with probability freqs[i], so
the number of ones follows a Poisson-binomial law.  This demo builds that law
exactly, checks its moment identities, cross-checks it against brute-force
enumeration, and shows the tail probability that drives the slope events.
"""

import numpy as np

from cga_lab import analytics, engine

rng = np.random.default_rng(7)

# A small model with uneven frequencies, away from the uniform start.
n = 12
freqs = np.clip(rng.random(n), 1 / n, 1 - 1 / n)
model = engine.FrequencyModel(n, 10.0, freqs)

pb = analytics.pb_distribution(freqs)
print("frequencies:", np.round(freqs, 3))
print("exact P(ones = j):")
for j, p in enumerate(pb.probs):
    bar = "#" * int(round(60 * p))
    print(f"  j={j:2d}  {p:8.5f}  {bar}")

print(f"\nmean  = {pb.mean():.10f}  (potential  = {analytics.potential(model):.10f})")
print(f"var   = {pb.variance():.10f}  (sampling variance = "
      f"{analytics.sampling_variance(model):.10f})")

# The quadratic-time convolution agrees with enumerating all 2^n strings.
brute = analytics.brute_force_ones_distribution(freqs)
print(f"max |convolution - enumeration| = {np.max(np.abs(pb.probs - brute.probs)):.2e}")

# Tail mass above the slope boundary 2n/3 and the induced event split.
threshold = 2 * n // 3
p_r = analytics.p_right(pb, threshold)
prob_l, prob_r, prob_m = analytics.event_probs(p_r)
print(f"\nP(ones > {threshold}) = {p_r:.6f}")
print(f"both-left {prob_l:.4f}, both-right {prob_r:.4f}, mixed {prob_m:.4f} "
      f"(sum {prob_l + prob_r + prob_m:.6f})")
