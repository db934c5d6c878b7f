"""Seeded random generators for exact-rational valuations and profiles.

Used by the test suite, the acceptance sweeps, and the demo scripts.  All
outputs are built from small-denominator Fractions so that downstream
mechanism runs stay fast while remaining exact.
"""

from __future__ import annotations

from fractions import Fraction
from random import Random

from cakecut.cake import PiecewiseConstantValuation, Profile, normalized


def random_valuation(rng: Random, max_breakpoints: int = 2, denom: int = 12,
                     hungry: bool = False) -> PiecewiseConstantValuation:
    """A normalized step function with at most `max_breakpoints` interior
    breakpoints drawn from the 1/denom grid."""
    m = rng.randrange(0, max_breakpoints + 1)
    points = sorted({Fraction(rng.randrange(1, denom), denom) for _ in range(m)})
    low = 1 if hungry else 0
    weights = [Fraction(rng.randrange(low, 5)) for _ in range(len(points) + 1)]
    if all(w == 0 for w in weights):
        weights[rng.randrange(len(weights))] = Fraction(1)
    return normalized(points, weights)


def random_profile(rng: Random, n: int, max_breakpoints: int = 2,
                   denom: int = 12, hungry: bool = False) -> Profile:
    return Profile.of(
        random_valuation(rng, max_breakpoints, denom, hungry) for _ in range(n))
