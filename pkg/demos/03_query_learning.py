"""Learning valuations through cut queries and lifting a mechanism.

A query-model mechanism only sees answers to eval/cut queries.  The learner
spends floor(2k/eps) cuts per agent to build a unit-mass approximation that
is within eps/2 of the hidden valuation on every piece of cake; feeding the
learned profile to a direct-revelation mechanism lifts it into the query
model with that query budget and an eps/2 loss in proportionality.
"""

from fractions import Fraction

from cakecut import (
    PiecewiseConstantValuation,
    Profile,
    RWOracle,
    approximate_valuation,
    lift_direct_to_rw,
    query_budget,
)
from cakecut.mechanisms import MODIFIED_EVEN_PAZ

hidden = PiecewiseConstantValuation.of(["1/3", "3/4"], ["2", "1/2", "1/2"])
oracle = RWOracle(hidden)

print("hidden valuation:", list(hidden.segments()))
print(f"eval(0, 1/2)  -> {oracle.eval(0, '1/2')}")
print(f"cut(0, 1/2)   -> {oracle.cut(0, '1/2')}   (leftmost half-value point)")
print(f"queries so far: {oracle.query_count}\n")

k, eps = 2, Fraction(1, 4)
learner_oracle = RWOracle(hidden)
learned = approximate_valuation(learner_oracle, k, eps)
print(f"learned with k={k}, eps={eps}: {learned.queries_used} cut queries "
      f"(budget floor(2k/eps) = {query_budget(k, eps)})")
print("learned segments:")
for lo, hi, density in learned.valuation.segments():
    print(f"  [{lo}, {hi}] -> {density}")

grid = sorted(set(hidden.bounds) | set(learned.valuation.bounds))
worst = max(abs(learned.valuation.value_between(a, b) - hidden.value_between(a, b))
            for a, b in zip(grid, grid[1:]))
print(f"worst single-cell error {worst} (guarantee per piece: {eps / 2})\n")

lifted = lift_direct_to_rw(MODIFIED_EVEN_PAZ, k=2, epsilon="1/5")
profile = Profile.of([hidden, PiecewiseConstantValuation.uniform()])
run = lifted.run_profile(profile)
print(f"lifted {MODIFIED_EVEN_PAZ.name}: {run.queries} total queries")
for i, piece in enumerate(run.allocation.pieces):
    value = profile[i].value(piece)
    print(f"  agent {i} true value {value}  (floor: 1/2 - 1/10 = 2/5)")
