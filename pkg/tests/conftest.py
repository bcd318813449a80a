"""Shared test helpers: forced random streams and a naive reference stepper."""

from __future__ import annotations

import numpy as np


class ForcedRng:
    """Stub random stream returning queued arrays from ``random(n)``.

    Queue entries are uniform vectors; to force bit i to 1 against frequency
    p_i, supply a value < p_i (use 0.0), and to force 0 supply a value >= p_i
    (use 1.0 when p_i < 1).
    """

    def __init__(self, *vectors):
        self._queue = [np.asarray(v, dtype=float) for v in vectors]

    def random(self, size=None):
        vec = self._queue.pop(0)
        if size is not None and vec.shape != ((size,) if isinstance(size, int) else tuple(size)):
            raise AssertionError(f"forced vector of shape {vec.shape}, requested {size}")
        return vec


def bits_to_uniforms(bits):
    """Uniform vector that samples exactly these bits for any p in (0, 1)."""
    return np.where(np.asarray(bits) == 1, 0.0, 1.0)


def naive_one_step(freqs, k, values, u_x, u_y):
    """Reference cGA iteration, scalar Python, straight from the update rule.

    Samples x then y from the uniforms, swaps on strictly better y, moves each
    frequency by 1/k toward the winner where the offspring disagree, clamps to
    [1/n, 1-1/n].  Returns (new_freqs, ones_x_raw, ones_y_raw, swapped).
    """
    n = len(freqs)
    lo, hi = 1.0 / n, 1.0 - 1.0 / n
    x = [1 if u_x[i] < freqs[i] else 0 for i in range(n)]
    y = [1 if u_y[i] < freqs[i] else 0 for i in range(n)]
    fx, fy = values[sum(x)], values[sum(y)]
    swapped = fx < fy
    winner, loser = (y, x) if swapped else (x, y)
    out = []
    for i in range(n):
        p = freqs[i]
        if winner[i] > loser[i]:
            p = p + 1.0 / k
        elif winner[i] < loser[i]:
            p = p - 1.0 / k
        out.append(min(max(p, lo), hi))
    return np.array(out), sum(x), sum(y), swapped
