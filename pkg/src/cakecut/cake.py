"""Exact-arithmetic primitives for cake cutting over the unit interval.

The cake is [0, 1].  Everything here is computed with ``fractions.Fraction``:
interval endpoints, step-function densities, measures, and values.  No floats
enter any computation, so every comparison made by mechanisms, checkers, and
counterexample chains downstream is an exact decision.

Values are immutable after construction and all operations are pure, so they
may be freely shared between threads.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Iterator, Sequence, Union

RationalLike = Union[Fraction, int, str]

ZERO = Fraction(0)
ONE = Fraction(1)


class InfeasibleCutError(ValueError):
    """Raised when a cut query asks for more value than remains to the right."""


def frac(x: RationalLike) -> Fraction:
    """Coerce an int, Fraction, or exact string ("3/4", "0.8") to Fraction."""
    if isinstance(x, Fraction):
        return x
    if isinstance(x, float):
        raise TypeError(f"refusing inexact float {x!r}; pass a string or Fraction")
    return Fraction(x)


@dataclass(frozen=True, order=True)
class Interval:
    """A closed subinterval [lo, hi] of the cake, possibly degenerate."""

    lo: Fraction
    hi: Fraction

    def __post_init__(self) -> None:
        if not (ZERO <= self.lo <= self.hi <= ONE):
            raise ValueError(f"interval [{self.lo}, {self.hi}] not within [0, 1]")

    @property
    def length(self) -> Fraction:
        return self.hi - self.lo

    def __repr__(self) -> str:
        return f"[{self.lo}, {self.hi}]"


def ival(lo: RationalLike, hi: RationalLike) -> Interval:
    return Interval(frac(lo), frac(hi))


@dataclass(frozen=True)
class Piece:
    """A finite union of intervals, kept in canonical form.

    Canonical form: intervals sorted by left endpoint, pairwise disjoint with
    no shared endpoints (touching intervals are merged), and no zero-length
    intervals.  Sets differing on finitely many points are therefore
    identified, and equality is structural.
    """

    intervals: tuple[Interval, ...] = ()

    @staticmethod
    def of(intervals: Iterable[Interval]) -> "Piece":
        merged: list[list[Fraction]] = []
        for iv in sorted(intervals, key=lambda i: (i.lo, i.hi)):
            if iv.length == 0:
                continue
            if merged and iv.lo <= merged[-1][1]:
                merged[-1][1] = max(merged[-1][1], iv.hi)
            else:
                merged.append([iv.lo, iv.hi])
        return Piece(tuple(Interval(lo, hi) for lo, hi in merged))

    @staticmethod
    def interval(lo: RationalLike, hi: RationalLike) -> "Piece":
        return Piece.of([ival(lo, hi)])

    @staticmethod
    def empty() -> "Piece":
        return Piece()

    @staticmethod
    def whole() -> "Piece":
        return Piece((Interval(ZERO, ONE),))

    @property
    def measure(self) -> Fraction:
        return sum((iv.length for iv in self.intervals), ZERO)

    @property
    def is_empty(self) -> bool:
        return not self.intervals

    @property
    def is_contiguous(self) -> bool:
        """True when the piece is a single interval (or empty)."""
        return len(self.intervals) <= 1

    def boundaries(self) -> list[Fraction]:
        out = []
        for iv in self.intervals:
            out.append(iv.lo)
            out.append(iv.hi)
        return out

    def union(self, other: "Piece") -> "Piece":
        return Piece.of(self.intervals + other.intervals)

    def intersect(self, other: "Piece") -> "Piece":
        out = []
        for a in self.intervals:
            for b in other.intervals:
                lo, hi = max(a.lo, b.lo), min(a.hi, b.hi)
                if lo < hi:
                    out.append(Interval(lo, hi))
        return Piece.of(out)

    def subtract(self, other: "Piece") -> "Piece":
        return self.intersect(other.complement())

    def complement(self) -> "Piece":
        """The closure of [0,1] minus this piece."""
        out = []
        cursor = ZERO
        for iv in self.intervals:
            if cursor < iv.lo:
                out.append(Interval(cursor, iv.lo))
            cursor = max(cursor, iv.hi)
        if cursor < ONE:
            out.append(Interval(cursor, ONE))
        return Piece.of(out)

    def contains_measure_of(self, other: "Piece") -> bool:
        """True iff `other` is contained in this piece up to measure zero."""
        return other.subtract(self).measure == 0

    def __repr__(self) -> str:
        if not self.intervals:
            return "{}"
        return " ∪ ".join(repr(iv) for iv in self.intervals)


@dataclass(frozen=True)
class PiecewiseConstantValuation:
    """A normalized step-function density over the cake.

    ``bounds`` is the full breakpoint sequence 0 = b_0 < ... < b_{m+1} = 1 and
    ``densities`` holds one non-negative density per segment [b_j, b_{j+1}].
    Canonical form merges adjacent segments of equal density, so the interior
    breakpoint count is exact.  Total mass must be exactly 1; non-normalized
    input is rejected (use :func:`normalized` to rescale fixtures).
    """

    bounds: tuple[Fraction, ...]
    densities: tuple[Fraction, ...]

    def __post_init__(self) -> None:
        if len(self.bounds) < 2 or self.bounds[0] != ZERO or self.bounds[-1] != ONE:
            raise ValueError("bounds must run from 0 to 1")
        if len(self.densities) != len(self.bounds) - 1:
            raise ValueError("need one density per segment")
        for a, b in zip(self.bounds, self.bounds[1:]):
            if not a < b:
                raise ValueError("bounds must be strictly increasing")
        if any(d < 0 for d in self.densities):
            raise ValueError("densities must be non-negative")
        # canonical form: no adjacent segments with the same density
        for d, e in zip(self.densities, self.densities[1:]):
            if d == e:
                raise ValueError("adjacent equal densities; construct via of()")
        total = sum(d * (b - a) for a, b, d in self.segments())
        if total != 1:
            raise ValueError(f"valuation has total mass {total}, expected exactly 1")

    @staticmethod
    def of(breakpoints: Sequence[RationalLike], densities: Sequence[RationalLike]
           ) -> "PiecewiseConstantValuation":
        """Build from interior breakpoints and per-segment densities."""
        bounds = [ZERO] + [frac(b) for b in breakpoints] + [ONE]
        dens = [frac(d) for d in densities]
        if len(dens) != len(bounds) - 1:
            raise ValueError("need one density per segment")
        merged_b = [bounds[0]]
        merged_d: list[Fraction] = []
        for b, d in zip(bounds[1:], dens):
            if merged_d and d == merged_d[-1]:
                merged_b[-1] = b
            else:
                merged_b.append(b)
                merged_d.append(d)
        return PiecewiseConstantValuation(tuple(merged_b), tuple(merged_d))

    @staticmethod
    def from_masses(points: Sequence[RationalLike], masses: Sequence[RationalLike]
                    ) -> "PiecewiseConstantValuation":
        """Build from interior breakpoints and per-segment total masses."""
        bounds = [ZERO] + [frac(p) for p in points] + [ONE]
        dens = [frac(m) / (b - a) for a, b, m in zip(bounds, bounds[1:], masses)]
        return PiecewiseConstantValuation.of(bounds[1:-1], dens)

    @staticmethod
    def on_piece(piece: Piece) -> "PiecewiseConstantValuation":
        """The uniform indicator valuation: density 1/|piece| on the piece."""
        if piece.measure == 0:
            raise ValueError("cannot spread unit mass over a null piece")
        d = 1 / piece.measure
        bounds: list[Fraction] = [ZERO]
        dens: list[Fraction] = []
        for iv in piece.intervals:
            if iv.lo > bounds[-1]:
                bounds.append(iv.lo)
                dens.append(ZERO)
            bounds.append(iv.hi)
            dens.append(d)
        if bounds[-1] < ONE:
            bounds.append(ONE)
            dens.append(ZERO)
        return PiecewiseConstantValuation.of(bounds[1:-1], dens)

    @staticmethod
    def uniform() -> "PiecewiseConstantValuation":
        return PiecewiseConstantValuation((ZERO, ONE), (ONE,))

    @property
    def breakpoints(self) -> tuple[Fraction, ...]:
        """Interior breakpoints only."""
        return self.bounds[1:-1]

    def segments(self) -> Iterator[tuple[Fraction, Fraction, Fraction]]:
        for a, b, d in zip(self.bounds, self.bounds[1:], self.densities):
            yield a, b, d

    @property
    def is_hungry(self) -> bool:
        """True iff the density is strictly positive everywhere."""
        return all(d > 0 for d in self.densities)

    def density_at(self, x: Fraction) -> Fraction:
        """Density on the segment containing x (right-continuous; at 1, last)."""
        for a, b, d in self.segments():
            if a <= x < b:
                return d
        return self.densities[-1]

    def value_between(self, x: RationalLike, y: RationalLike) -> Fraction:
        """Exact value of the interval [x, y]."""
        x, y = frac(x), frac(y)
        if not (ZERO <= x <= y <= ONE):
            raise ValueError(f"interval [{x}, {y}] not within [0, 1]")
        total = ZERO
        for a, b, d in self.segments():
            lo, hi = max(a, x), min(b, y)
            if lo < hi:
                total += d * (hi - lo)
        return total

    def value(self, piece: Piece) -> Fraction:
        """Exact value of a piece; additive over its intervals."""
        return sum((self.value_between(iv.lo, iv.hi) for iv in piece.intervals), ZERO)

    def cut_point(self, x: RationalLike, r: RationalLike) -> Fraction:
        """Leftmost y >= x with value_between(x, y) == r.

        Walks segments exactly; cut_point(x, 0) == x by the leftmost
        convention.  Raises InfeasibleCutError if r exceeds the value of
        [x, 1].
        """
        x, r = frac(x), frac(r)
        if r < 0 or not (ZERO <= x <= ONE):
            raise ValueError("need 0 <= x <= 1 and r >= 0")
        if r == 0:
            return x
        acc = ZERO
        for a, b, d in self.segments():
            lo = max(a, x)
            if lo >= b:
                continue
            mass = d * (b - lo)
            if d > 0 and acc + mass >= r:
                return lo + (r - acc) / d
            acc += mass
        raise InfeasibleCutError(f"requested value {r} exceeds remaining {acc}")

    def positive_support(self) -> Piece:
        """The piece on which the density is strictly positive."""
        return Piece.of(Interval(a, b) for a, b, d in self.segments() if d > 0)

    def zero_support(self) -> Piece:
        return Piece.of(Interval(a, b) for a, b, d in self.segments() if d == 0)


def normalized(breakpoints: Sequence[RationalLike], densities: Sequence[RationalLike]
               ) -> PiecewiseConstantValuation:
    """Rescale raw densities to unit total mass (fixture helper).

    Construction through PiecewiseConstantValuation.of rejects non-normalized
    input on purpose; this helper is the explicit opt-in.
    """
    bounds = [ZERO] + [frac(b) for b in breakpoints] + [ONE]
    dens = [frac(d) for d in densities]
    total = sum(d * (b - a) for a, b, d in zip(bounds, bounds[1:], dens))
    if total <= 0:
        raise ValueError("cannot normalize a zero valuation")
    return PiecewiseConstantValuation.of(bounds[1:-1], [d / total for d in dens])


@dataclass(frozen=True)
class Profile:
    """An ordered tuple of n >= 2 normalized valuations."""

    valuations: tuple[PiecewiseConstantValuation, ...]

    def __post_init__(self) -> None:
        if len(self.valuations) < 2:
            raise ValueError("a profile needs at least two agents")

    @staticmethod
    def of(valuations: Iterable[PiecewiseConstantValuation]) -> "Profile":
        return Profile(tuple(valuations))

    @property
    def n(self) -> int:
        return len(self.valuations)

    def __getitem__(self, i: int) -> PiecewiseConstantValuation:
        return self.valuations[i]

    def __iter__(self) -> Iterator[PiecewiseConstantValuation]:
        return iter(self.valuations)

    def replace(self, i: int, v: PiecewiseConstantValuation) -> "Profile":
        vals = list(self.valuations)
        vals[i] = v
        return Profile(tuple(vals))

    def grid(self, *extra: Fraction) -> list[Fraction]:
        """Sorted union of all agents' bounds plus any extra points."""
        pts = {ZERO, ONE, *extra}
        for v in self.valuations:
            pts.update(v.bounds)
        return sorted(pts)


@dataclass(frozen=True)
class Allocation:
    """One piece per agent plus the discarded remainder."""

    pieces: tuple[Piece, ...]
    discarded: Piece

    @staticmethod
    def of(pieces: Sequence[Piece]) -> "Allocation":
        """Build with the discarded piece inferred as the uncovered remainder."""
        covered = Piece.empty()
        for p in pieces:
            covered = covered.union(p)
        return Allocation(tuple(pieces), Piece.whole().subtract(covered))

    @property
    def n(self) -> int:
        return len(self.pieces)

    @property
    def is_contiguous(self) -> bool:
        return all(p.is_contiguous for p in self.pieces)

    def boundaries(self) -> list[Fraction]:
        pts = {ZERO, ONE}
        for p in self.pieces:
            pts.update(p.boundaries())
        return sorted(pts)


def validate_allocation(allocation: Allocation, profile: Profile) -> list[str]:
    """Check allocation invariants against a profile; [] means valid.

    Verifies pairwise interior-disjointness, coverage of the whole cake by
    agent pieces plus the discarded remainder, and the free-disposal rule:
    discarded cake must have zero density under every agent's valuation.
    """
    if allocation.n != profile.n:
        raise ValueError(f"allocation has {allocation.n} pieces for {profile.n} agents")
    problems = []
    for i in range(allocation.n):
        for j in range(i + 1, allocation.n):
            overlap = allocation.pieces[i].intersect(allocation.pieces[j])
            if overlap.measure > 0:
                problems.append(f"overlap between agents {i} and {j} on {overlap}")
    covered = Piece.of(
        iv for p in (*allocation.pieces, allocation.discarded) for iv in p.intervals)
    missing = Piece.whole().subtract(covered)
    if missing.measure > 0:
        problems.append(f"uncovered cake {missing}")
    for i, v in enumerate(profile):
        wanted = allocation.discarded.intersect(v.positive_support())
        if wanted.measure > 0:
            problems.append(f"free-disposal violation: agent {i} values discarded {wanted}")
    return problems
