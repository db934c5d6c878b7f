"""Simulated Robertson-Webb query oracles, valuation learning, and lifting.

A mechanism in the query model never sees a valuation function; it interacts
through ``eval`` (value of an interval) and ``cut`` (leftmost point
accumulating a target value).  The oracles here answer those queries exactly
from a backing step function and count them.  Query accounting counts
distinct oracle queries: repeats of an already-answered query are served from
a memo and not recounted, while any cuts the center computes for itself are
free.

On top of the oracle sits the valuation learner: with ``floor(2k/eps)`` cut
queries it builds a unit-mass step function w whose value differs from the
hidden valuation's by at most eps/2 on every piece of cake (k must bound the
hidden interior breakpoint count).  Feeding learned valuations to a direct-
revelation mechanism lifts it into the query model with at most
``n * floor(2k/eps)`` queries in total.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence

from cakecut.cake import (
    Allocation,
    ONE,
    PiecewiseConstantValuation,
    Profile,
    RationalLike,
    ZERO,
    frac,
)
from cakecut.mechanisms import Mechanism


class RWOracle:
    """Answers eval/cut queries for a hidden valuation, with a query log.

    Single-owner mutable state; use one oracle per agent per run.  Distinct
    oracles are independent.
    """

    def __init__(self, hidden: PiecewiseConstantValuation):
        self.hidden = hidden
        self.log: list[tuple[str, tuple[Fraction, ...], Fraction]] = []
        self._memo: dict[tuple[str, Fraction, Fraction], Fraction] = {}

    @property
    def query_count(self) -> int:
        return len(self.log)

    @property
    def function(self) -> PiecewiseConstantValuation:
        """The valuation all answers are consistent with."""
        return self.hidden

    def _ask(self, kind: str, x: Fraction, y: Fraction) -> Fraction:
        key = (kind, x, y)
        if key not in self._memo:
            if kind == "eval":
                answer = self.hidden.value_between(x, y)
            else:
                answer = self.hidden.cut_point(x, y)
            self._memo[key] = answer
            self.log.append((kind, (x, y), answer))
        return self._memo[key]

    def eval(self, x: RationalLike, y: RationalLike) -> Fraction:
        """Exact value of [x, y]."""
        x, y = frac(x), frac(y)
        if not (ZERO <= x <= y <= ONE):
            raise ValueError(f"eval range [{x}, {y}] not within [0, 1]")
        return self._ask("eval", x, y)

    def cut(self, x: RationalLike, r: RationalLike) -> Fraction:
        """Leftmost y with value of [x, y] equal to r; cut(x, 0) == x.

        Raises InfeasibleCutError when r exceeds the value of [x, 1]; callers
        must only issue feasible cuts.
        """
        x, r = frac(x), frac(r)
        return self._ask("cut", x, r)


class StrategicOracle(RWOracle):
    """An oracle answering every query per a fixed misreported valuation."""

    def __init__(self, reported: PiecewiseConstantValuation,
                 true_valuation: PiecewiseConstantValuation):
        super().__init__(reported)
        self.true_valuation = true_valuation

    @property
    def reported(self) -> PiecewiseConstantValuation:
        return self.hidden


@dataclass(frozen=True)
class LearnedValuation:
    """Result of the cut-query learner: a unit-mass approximation."""

    valuation: PiecewiseConstantValuation
    queries_used: int
    epsilon: Fraction
    k: int


def query_budget(k: int, epsilon: Fraction) -> int:
    return math.floor(Fraction(2 * k) / epsilon)


def approximate_valuation(oracle: RWOracle, k: int,
                          epsilon: RationalLike) -> LearnedValuation:
    """Learn a step function w from cut queries alone.

    Issues exactly floor(2k/eps) cuts, each advancing by an eps/(2k) slice of
    value; each learned segment carries that slice as its mass, and whatever
    lies right of the last cut carries the remainder.  The result has total
    mass exactly 1 and approximates the hidden valuation within eps/2 on
    every piece of cake.
    """
    epsilon = frac(epsilon)
    if epsilon <= 0 or k < 1:
        raise ValueError("need epsilon > 0 and k >= 1")
    if len(oracle.function.breakpoints) > k:
        raise ValueError(
            f"k={k} below the hidden breakpoint count {len(oracle.function.breakpoints)}")
    slice_mass = epsilon / (2 * k)
    n_queries = query_budget(k, epsilon)
    before = oracle.query_count
    xs = [ZERO]
    for _ in range(n_queries):
        x = oracle.cut(xs[-1], slice_mass)
        if not x > xs[-1]:
            raise AssertionError(f"cut did not advance past {xs[-1]}")
        xs.append(x)
    points = xs[1:]
    masses = [slice_mass] * n_queries
    if not points or points[-1] != ONE:
        masses.append(1 - n_queries * slice_mass)
    else:
        points = points[:-1]
    w = PiecewiseConstantValuation.from_masses(points, masses)
    used = oracle.query_count - before
    if used != n_queries:
        raise AssertionError(f"issued {used} queries, budget {n_queries}")
    return LearnedValuation(w, used, epsilon, k)


@dataclass(frozen=True)
class LiftRun:
    allocation: Allocation
    learned: Profile
    queries: int


@dataclass(frozen=True)
class LiftedMechanism:
    """A query-model mechanism: learn every agent, then run the base."""

    base: Mechanism
    k: int
    epsilon: Fraction

    @property
    def name(self) -> str:
        return f"{self.base.name}@rw(k={self.k},eps={self.epsilon})"

    @property
    def kind(self) -> str:
        return "query-driven"

    def run_on_oracles(self, oracles: Sequence[RWOracle]) -> Allocation:
        learned = Profile.of(
            approximate_valuation(o, self.k, self.epsilon).valuation for o in oracles)
        return self.base.run(learned)

    def run_profile(self, profile: Profile) -> LiftRun:
        """Convenience wrapper: make truthful oracles, learn, and run."""
        oracles = [RWOracle(v) for v in profile]
        learned = Profile.of(
            approximate_valuation(o, self.k, self.epsilon).valuation for o in oracles)
        allocation = self.base.run(learned)
        return LiftRun(allocation, learned, sum(o.query_count for o in oracles))


def lift_direct_to_rw(mechanism: Mechanism, k: int,
                      epsilon: RationalLike) -> LiftedMechanism:
    """Lift a direct-revelation mechanism into the query model.

    Total queries are at most n * floor(2k/eps).  Properties degrade by the
    learning error: a proportional base guarantees every agent a true value
    of at least 1/n - eps/2, an envy-free base bounds true envy by eps.
    """
    return LiftedMechanism(mechanism, k, frac(epsilon))
