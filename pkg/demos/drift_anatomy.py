"""Why the model stalls below the cliff: anatomy of the one-step drift.

Runs the cGA on Cliff until the potential enters the window just below the
slope boundary, freezes that state, and decomposes the expected one-step
potential change by slope event.  Mixed events (one offspring on each slope)
reinforce the left offspring and drag the potential DOWN; both-on-one-slope
events push it up a little.  Near the boundary the mixed case wins and the
net drift is negative, which is what keeps the model from crossing.
"""

import math


from cga_lab import analytics, engine, fitness

n, k_formula = 150, "n^0.45"
k = float(n) ** 0.45
f = fitness.cliff(n)
threshold = 2 * n // 3
epsilon = 0.25

model = engine.init_model(n, k)
rng = engine.run_stream(2718281828, 99)
for t in range(200_000):
    rec = engine.step(model, f, rng)
    width = rec.variance_after ** (0.5 - epsilon)
    if threshold - width <= rec.potential_after <= threshold:
        print(f"entered the drift window after {t + 1} iterations")
        break

pot = analytics.potential(model)
var = analytics.sampling_variance(model)
print(f"snapshot: potential={pot:.3f} (boundary {threshold}), variance={var:.3f}, "
      f"sigma={math.sqrt(var):.3f}")

pred = analytics.predicted_drift(model, threshold)
print("\nnormal-approximation prediction:")
print(f"  P(offspring right of boundary) = {pred.p_right:.4f}")
print(f"  event probabilities     L={pred.prob_L:.4f} R={pred.prob_R:.4f} M={pred.prob_M:.4f}")
print(f"  drift | mixed           {pred.drift_M:+.5f}")
print(f"  drift | same slope (<=) {pred.drift_same_slope:+.5f}")
print(f"  total predicted         {pred.drift_total:+.5f}"
      f"   (border correction bound {pred.correction_bound:.4f})")

est = analytics.empirical_drift(model, f, threshold, 100_000,
                                engine.run_stream(2718281828, 100))
print("\nMonte-Carlo over 10^5 one-step replays:")
print(f"  mean drift {est.mean:+.5f} +- {est.stderr:.5f}")
for event in ("L", "R", "M"):
    share = est.event_counts[event] / est.samples
    print(f"  event {event}: share {share:.4f}, mean {est.event_means[event]:+.5f}")

exact_p_r = analytics.p_right(analytics.pb_distribution(model.freqs), threshold)
print(f"\nexact P(right) from the offspring law: {exact_p_r:.4f} "
      f"(normal approx {pred.p_right:.4f})")
print(f"empirical/predicted drift ratio: {est.mean / pred.drift_total:.3f}")
