"""Unitation fitness functions: OneMax and Cliff.

Both functions depend only on the number of one-bits, so each is stored as a
lookup table of n+1 values indexed by that count.  Cliff rewards climbing up
to 2n/3 ones, then drops every value on the second slope below the top of the
first one; only the all-ones string beats the local optima.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

ONEMAX = "onemax"
CLIFF = "cliff"

FIRST_SLOPE = "first"
SECOND_SLOPE = "second"


@dataclass(frozen=True)
class UnitationFunction:
    """A fitness function of unitation with a precomputed value table.

    ``values[j]`` is the fitness of any string with exactly j one-bits.  The
    unique global optimum of both kinds is the all-ones string.
    """

    kind: str
    n: int
    values: np.ndarray = field(repr=False)

    @property
    def threshold(self) -> int:
        """Largest one-bit count on the first slope (2n/3 for Cliff)."""
        return 2 * self.n // 3

    def value_at(self, ones: int) -> float:
        if not 0 <= ones <= self.n:
            raise ValueError(f"one-bit count {ones} outside [0, {self.n}]")
        return float(self.values[ones])


def one_max(n: int) -> UnitationFunction:
    """OneMax: fitness equals the number of one-bits."""
    if n < 1:
        raise ValueError("n must be at least 1")
    return UnitationFunction(ONEMAX, n, np.arange(n + 1, dtype=np.float64))


def cliff(n: int) -> UnitationFunction:
    """Cliff: counts ones up to 2n/3, then drops by n/3 - 1/2.

    Requires n divisible by 3 so the slope boundary 2n/3 and the drop n/3 are
    exact integers; other n are rejected rather than rounded.
    """
    if n < 3 or n % 3 != 0:
        raise ValueError("n must be divisible by 3")
    ones = np.arange(n + 1, dtype=np.float64)
    values = np.where(ones <= 2 * n // 3, ones, ones - n // 3 + 0.5)
    return UnitationFunction(CLIFF, n, values)


def make(kind: str, n: int) -> UnitationFunction:
    """Construct a fitness function by kind name ('onemax' or 'cliff')."""
    kind = kind.strip().lower()
    if kind == ONEMAX:
        return one_max(n)
    if kind == CLIFF:
        return cliff(n)
    raise ValueError(f"unknown fitness kind {kind!r}")


def evaluate(f: UnitationFunction, x) -> float:
    """Fitness of a sampled bit string (see engine.Bitstring)."""
    if len(x.bits) != f.n:
        raise ValueError(f"bit string has length {len(x.bits)}, expected {f.n}")
    return f.value_at(x.ones)


def is_global_optimum(f: UnitationFunction, x) -> bool:
    """True iff x is the all-ones string."""
    if len(x.bits) != f.n:
        raise ValueError(f"bit string has length {len(x.bits)}, expected {f.n}")
    return x.ones == f.n


def slope_of(f: UnitationFunction, ones: int) -> str:
    """Which Cliff slope a one-bit count lies on ('first' or 'second')."""
    if f.kind != CLIFF:
        raise ValueError("slopes are only defined for Cliff")
    if not 0 <= ones <= f.n:
        raise ValueError(f"one-bit count {ones} outside [0, {f.n}]")
    return FIRST_SLOPE if ones <= f.threshold else SECOND_SLOPE
