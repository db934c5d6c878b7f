"""Exact cake arithmetic: pieces, step-function valuations, and values.

Every quantity below is a fractions.Fraction; nothing is ever rounded.
"""

from cakecut import Piece, PiecewiseConstantValuation, Profile, validate_allocation
from cakecut.cake import Allocation

# A valuation is a step-function density over [0, 1] with total mass 1.
# This agent ignores the bottom half and concentrates on the top fifth.
picky = PiecewiseConstantValuation.of(["1/2", "4/5"], ["1", "0", "5/2"])
uniform = PiecewiseConstantValuation.uniform()

print("picky agent's density segments:")
for lo, hi, density in picky.segments():
    print(f"  [{lo}, {hi}] -> {density}")

top_fifth = Piece.interval("4/5", "1")
print(f"\nvalue of [4/5, 1] to the picky agent: {picky.value(top_fifth)}")
print(f"value of the whole cake (always 1):   {picky.value(Piece.whole())}")
print(f"is the picky agent hungry? {picky.is_hungry}")
print(f"is the uniform agent hungry? {uniform.is_hungry}")

# Pieces form a little measure algebra with exact measures.
a = Piece.interval(0, "1/2")
b = Piece.interval("1/4", "3/4")
print(f"\n[0,1/2] union [1/4,3/4]     = {a.union(b)}")
print(f"[0,1/2] intersect [1/4,3/4] = {a.intersect(b)}")
print(f"[0,1/2] minus [1/4,3/4]     = {a.subtract(b)}")
print(f"measures: |a|={a.measure} |b|={b.measure} |a∪b|={a.union(b).measure}")

# The leftmost-point cut: where does the picky agent's value reach 1/2?
print(f"\npicky cut(0, 1/2) = {picky.cut_point(0, '1/2')}")
print(f"picky cut(0, 3/4) = {picky.cut_point(0, '3/4')}")

# Allocations are validated exactly: disjointness, coverage, free disposal.
profile = Profile.of([picky, uniform])
good = Allocation.of([Piece.interval("1/2", 1), Piece.interval(0, "1/2")])
bad = Allocation.of([Piece.interval("1/2", 1), Piece.interval("1/4", "3/4")])
print(f"\nviolations in a clean allocation: {validate_allocation(good, profile)}")
print("violations in a broken allocation:")
for problem in validate_allocation(bad, profile):
    print(f"  {problem}")
