"""Analytic quantities for the cGA's offspring distribution.

The number of one-bits in an offspring follows a Poisson-binomial law with
the current frequencies as success probabilities.  This module computes that
law exactly (quadratic-time convolution plus a brute-force enumeration
cross-check for small n), its conditional means around a slope boundary, the
matching truncated-normal approximations, and the resulting one-step drift
prediction and tail bound for the potential.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.special import erfcx, ndtr

from . import engine as engine_mod
from . import fitness as fit_mod

SQRT_2_OVER_PI = math.sqrt(2.0 / math.pi)

BRUTE_FORCE_MAX_N = 20
PB_MAX_N = 2000


def _freqs_of(model_or_freqs) -> np.ndarray:
    freqs = getattr(model_or_freqs, "freqs", model_or_freqs)
    return np.asarray(freqs, dtype=np.float64)


def potential(model) -> float:
    """Sum of frequencies: expected one-bits in a sampled offspring."""
    return math.fsum(_freqs_of(model).tolist())


def sampling_variance(model) -> float:
    """Sum of p(1-p): variance of the one-bit count of an offspring."""
    p = _freqs_of(model)
    return math.fsum((p * (1.0 - p)).tolist())


@dataclass(frozen=True)
class PBDistribution:
    """Exact law of the one-bit count: probs[j] = P(exactly j ones)."""

    n: int
    probs: np.ndarray

    def mean(self) -> float:
        j = np.arange(self.n + 1, dtype=np.float64)
        return math.fsum((j * self.probs).tolist())

    def variance(self) -> float:
        j = np.arange(self.n + 1, dtype=np.float64)
        m = self.mean()
        return math.fsum(((j - m) ** 2 * self.probs).tolist())

    def total(self) -> float:
        return math.fsum(self.probs.tolist())


def pb_distribution(freqs) -> PBDistribution:
    """Exact Poisson-binomial distribution by iterated convolution, O(n^2)."""
    p = _freqs_of(freqs)
    if p.ndim != 1 or p.size == 0:
        raise ValueError("freqs must be a non-empty 1-d vector")
    if p.size > PB_MAX_N:
        raise ValueError(f"n={p.size} exceeds the exact-distribution guard ({PB_MAX_N})")
    if np.any((p < 0.0) | (p > 1.0)):
        raise ValueError("frequencies must lie in [0, 1]")
    probs = np.zeros(p.size + 1)
    probs[0] = 1.0
    for pi in p.tolist():
        probs[1:] = probs[1:] * (1.0 - pi) + probs[:-1] * pi
        probs[0] *= 1.0 - pi
    return PBDistribution(int(p.size), probs)


def brute_force_ones_distribution(freqs) -> PBDistribution:
    """Independent oracle: enumerate all 2^n bit strings (n <= 20)."""
    p = _freqs_of(freqs)
    n = p.size
    if n > BRUTE_FORCE_MAX_N:
        raise ValueError(f"enumeration oracle is gated to n <= {BRUTE_FORCE_MAX_N}")
    probs = np.zeros(n + 1)
    masks = np.arange(2 ** n, dtype=np.int64)
    for start in range(0, masks.size, 1 << 14):
        chunk = masks[start:start + (1 << 14)]
        bits = (chunk[:, None] >> np.arange(n)) & 1
        weight = np.where(bits == 1, p, 1.0 - p).prod(axis=1)
        probs += np.bincount(bits.sum(axis=1), weights=weight, minlength=n + 1)
    return PBDistribution(int(n), probs)


def p_right(pb: PBDistribution, threshold: int) -> float:
    """P(one-bit count > threshold) under the exact distribution."""
    if not 0 <= threshold <= pb.n:
        raise ValueError(f"threshold {threshold} outside [0, {pb.n}]")
    return math.fsum(pb.probs[threshold + 1:].tolist())


def event_probs(p_r: float) -> tuple[float, float, float]:
    """(P(L), P(R), P(M)) for two independent offspring given p_r = P(right slope)."""
    if not 0.0 <= p_r <= 1.0:
        raise ValueError("p_right must lie in [0, 1]")
    return (1.0 - p_r) ** 2, p_r ** 2, 2.0 * p_r * (1.0 - p_r)


def inverse_mills(x: float) -> float:
    """phi(x)/Phi(x), stable over the whole real line.

    For x >= 0 the direct ratio is safe (Phi >= 1/2).  For x < 0 both phi and
    Phi underflow together, so the ratio is rewritten through the scaled
    complementary error function: phi(x)/Phi(x) = sqrt(2/pi)/erfcx(-x/sqrt(2)).
    """
    x = float(x)
    if x >= 0.0:
        density = math.exp(-0.5 * x * x) / math.sqrt(2.0 * math.pi)
        return density / float(ndtr(x))
    return SQRT_2_OVER_PI / float(erfcx(-x / math.sqrt(2.0)))


def truncated_normal_mean(mu: float, sigma: float, t: float, side: str) -> float:
    """Mean of N(mu, sigma^2) conditioned on X <= t ('below') or X >= t ('above')."""
    if sigma <= 0:
        raise ValueError("sigma must be positive")
    z = (t - mu) / sigma
    if side == "below":
        return mu - sigma * inverse_mills(z)
    if side == "above":
        # phi(z)/(1 - Phi(z)) equals the inverse Mills ratio at -z.
        return mu + sigma * inverse_mills(-z)
    raise ValueError("side must be 'below' or 'above'")


@dataclass(frozen=True)
class DriftPrediction:
    """Expected one-step potential change, decomposed by slope events.

    ``drift_M`` is the predicted change when the two offspring straddle the
    boundary (the left one wins and is reinforced); ``drift_same_slope``
    bounds the change when both land on one slope.  ``correction_bound`` is
    the unmodelled border-clamping slack, reported separately rather than
    folded into the total.
    """

    p_right: float
    prob_L: float
    prob_R: float
    prob_M: float
    drift_M: float
    drift_same_slope: float
    drift_total: float
    correction_bound: float


def drift_prediction_from_moments(pot: float, var: float, k: float,
                                  threshold: float) -> DriftPrediction:
    """Normal-approximation drift prediction from (potential, variance, K)."""
    if var <= 0:
        raise ValueError("variance must be positive")
    if k <= 0:
        raise ValueError("K must be positive")
    sd = math.sqrt(var)
    z = (threshold - pot) / sd
    p_r = float(ndtr(-z))
    prob_l, prob_r, prob_m = event_probs(p_r)
    mean_below = pot - sd * inverse_mills(z)
    mean_above = pot + sd * inverse_mills(-z)
    drift_m = -(mean_above - mean_below) / k
    drift_same = math.sqrt((2.0 / math.pi) * var) / k
    total = (prob_l + prob_r) * drift_same + prob_m * drift_m
    return DriftPrediction(p_r, prob_l, prob_r, prob_m, drift_m, drift_same,
                           total, 2.0 / k)


def predicted_drift(model, threshold: float) -> DriftPrediction:
    """Drift prediction at the model's current potential and variance."""
    return drift_prediction_from_moments(potential(model), sampling_variance(model),
                                         model.k, threshold)


def exact_conditional_means(pb: PBDistribution, threshold: int) -> tuple[float, float]:
    """Exact E[X | X <= threshold] and E[X | X > threshold].

    A conditioning event of probability zero yields nan for its side; the
    other side is still exact.
    """
    j = np.arange(pb.n + 1, dtype=np.float64)
    below = pb.probs[: threshold + 1]
    above = pb.probs[threshold + 1:]
    w_below = math.fsum(below.tolist())
    w_above = math.fsum(above.tolist())
    mean_below = math.fsum((j[: threshold + 1] * below).tolist()) / w_below \
        if w_below > 0.0 else math.nan
    mean_above = math.fsum((j[threshold + 1:] * above).tolist()) / w_above \
        if w_above > 0.0 else math.nan
    return mean_below, mean_above


_DRIFT_CHUNK = 8192


@dataclass(frozen=True)
class DriftEstimate:
    """Monte-Carlo one-step drift from a frozen model, split by event."""

    mean: float
    stderr: float
    samples: int
    event_counts: dict[str, int]
    event_means: dict[str, float]

    def event_prob(self, event: str) -> float:
        return self.event_counts[event] / self.samples


def empirical_drift(model, f: fit_mod.UnitationFunction, threshold: int,
                    samples: int, rng: np.random.Generator) -> DriftEstimate:
    """Average potential change over independent one-step replays.

    Every replay starts from the same frozen frequency vector; the model is
    never mutated.  Events are classified by the passed threshold: L if
    neither offspring exceeds it, R if both do, M otherwise.
    """
    if samples < 1:
        raise ValueError("samples must be at least 1")
    p = _freqs_of(model).copy()
    k = float(model.k)
    n = p.size
    total = 0.0
    total_sq = 0.0
    sums = {e: 0.0 for e in (engine_mod.EVENT_LEFT, engine_mod.EVENT_RIGHT,
                             engine_mod.EVENT_MIXED)}
    counts = {e: 0 for e in sums}
    remaining = samples
    while remaining > 0:
        m = min(remaining, _DRIFT_CHUNK)
        u = rng.random((m, 2 * n))
        delta, ones_x, ones_y = engine_mod.one_step_ensemble(p, k, f, u)
        x_right = ones_x > threshold
        y_right = ones_y > threshold
        mixed = x_right ^ y_right
        right = x_right & y_right
        left = ~(mixed | right)
        total += float(delta.sum())
        total_sq += float((delta * delta).sum())
        for event, mask in ((engine_mod.EVENT_LEFT, left),
                            (engine_mod.EVENT_RIGHT, right),
                            (engine_mod.EVENT_MIXED, mixed)):
            counts[event] += int(mask.sum())
            sums[event] += float(delta[mask].sum())
        remaining -= m
    mean = total / samples
    var = max(0.0, (total_sq - samples * mean * mean) / max(1, samples - 1))
    stderr = math.sqrt(var / samples)
    means = {e: (sums[e] / counts[e] if counts[e] else math.nan) for e in sums}
    return DriftEstimate(mean, stderr, samples, counts, means)


def tail_bound(lam: float, v: float) -> float:
    """Upper bound on P(|one-step potential change| >= lam/K): 2 exp(-min(lam^2/V, lam)/3)."""
    if lam < 0:
        raise ValueError("lambda must be nonnegative")
    if v <= 0:
        raise ValueError("variance must be positive")
    return 2.0 * math.exp(-min(lam * lam / v, lam) / 3.0)


@dataclass(frozen=True)
class DriftExponentCheck:
    """Exponent of the negative-drift time bound plus its scaling condition.

    When log(r/epsilon) <= 0 the upper limit on r^2 is vacuous; the check
    then only requires r^2 >= 1 and flags the vacuous log term.
    """

    exponent: float
    condition3_ok: bool
    log_term_vacuous: bool


def drift_theorem_exponent(epsilon: float, ell: float, r: float) -> DriftExponentCheck:
    """exponent = epsilon*ell/(132 r^2); checks 1 <= r^2 <= epsilon*ell/(132 log(r/epsilon))."""
    if epsilon <= 0 or ell <= 0 or r <= 0:
        raise ValueError("all arguments must be positive")
    exponent = epsilon * ell / (132.0 * r * r)
    log_term = math.log(r / epsilon)
    if log_term <= 0:
        return DriftExponentCheck(exponent, r * r >= 1.0, True)
    ok = 1.0 <= r * r <= epsilon * ell / (132.0 * log_term)
    return DriftExponentCheck(exponent, ok, False)
