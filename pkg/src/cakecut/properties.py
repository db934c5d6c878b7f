"""Exact fairness/efficiency checkers and manipulation-gain search.

The checkers compute proportionality deficit, envy, wasted measure, and
contiguity as exact rationals.  The gain engines search for profitable
misreports and return self-verifying certificates: every certificate's
values are recomputed by re-running the mechanism on the truthful and the
deviated profile, so a certificate can never overstate a gain.

Both engines produce LOWER bounds on the true supremum gain.  The grid
engine enumerates misreports over a breakpoint/mass grid.  The cut-point
engine, specific to the recursive-halving mechanisms, enumerates where the
manipulator's report can sit relative to the other agents' (fixed) cuts at
every recursion node, takes the best path by dynamic programming, and then
builds an actual misreport realizing that path.  Candidate evaluation is
embarrassingly parallel in principle; selection is a pure reduction (max
gain, ties broken by the lexicographically smallest misreport encoding).
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from fractions import Fraction
from random import Random
from typing import Iterable, Optional

from cakecut.cake import (
    Allocation,
    Interval,
    ONE,
    Piece,
    PiecewiseConstantValuation,
    Profile,
    ZERO,
)
from cakecut.mechanisms import MECHANISMS, Mechanism


# ---------------------------------------------------------------------------
# property checking


@dataclass(frozen=True)
class PropertyReport:
    """Exact slack of an allocation against the standard properties.

    deficit == 0 iff proportional; envy == 0 iff envy-free; wasted_measure
    is the measure of cake desired by someone yet held by an agent with zero
    density there (or discarded).
    """

    proportionality_deficit: Fraction
    envy: Fraction
    wasted_measure: Fraction
    contiguous: bool


def report_for(profile: Profile, allocation: Allocation) -> PropertyReport:
    n = profile.n
    share = Fraction(1, n)
    deficit = max(
        [max(ZERO, share - v.value(allocation.pieces[i])) for i, v in enumerate(profile)])
    envy = ZERO
    for i, v in enumerate(profile):
        own = v.value(allocation.pieces[i])
        for j in range(n):
            if j != i:
                envy = max(envy, v.value(allocation.pieces[j]) - own)
    envy = max(envy, ZERO)

    points: set[Fraction] = set(allocation.boundaries())
    points.update(allocation.discarded.boundaries())
    for v in profile:
        points.update(v.bounds)
    wasted = ZERO
    grid = sorted(points)
    for p, q in zip(grid, grid[1:]):
        mid = (p + q) / 2
        if not any(v.density_at(mid) > 0 for v in profile):
            continue
        holder = next((i for i, piece in enumerate(allocation.pieces)
                       if any(iv.lo <= mid <= iv.hi for iv in piece.intervals)), None)
        if holder is None or profile[holder].density_at(mid) == 0:
            wasted += q - p
    return PropertyReport(deficit, envy, wasted, allocation.is_contiguous)


def check_properties(mechanism: Mechanism, profile: Profile) -> PropertyReport:
    """Run the mechanism once and measure every property exactly."""
    return report_for(profile, mechanism.run(profile))


# ---------------------------------------------------------------------------
# gain certificates


@dataclass(frozen=True)
class GainCertificate:
    """A verified manipulation: misreport plus exact before/after values.

    gain == deviated_value - truthful_value, both recomputed from mechanism
    runs; verify() re-derives every field and reports any mismatch.
    """

    mechanism: str
    profile: Profile
    agent: int
    misreport: PiecewiseConstantValuation
    truthful_value: Fraction
    deviated_value: Fraction
    gain: Fraction

    def verify(self, mechanism: Optional[Mechanism] = None) -> bool:
        mech = mechanism if mechanism is not None else MECHANISMS[self.mechanism]
        fresh = evaluate_misreport(mech, self.profile, self.agent, self.misreport)
        return (fresh.truthful_value == self.truthful_value
                and fresh.deviated_value == self.deviated_value
                and fresh.gain == self.gain)


def evaluate_misreport(mechanism: Mechanism, profile: Profile, agent: int,
                       misreport: PiecewiseConstantValuation) -> GainCertificate:
    """Score one fixed misreport by running the mechanism on both profiles."""
    true_v = profile[agent]
    truthful = true_v.value(mechanism.run(profile).pieces[agent])
    deviated = true_v.value(mechanism.run(profile.replace(agent, misreport)).pieces[agent])
    return GainCertificate(mechanism.name, profile, agent, misreport,
                           truthful, deviated, deviated - truthful)


def _encoding(v: PiecewiseConstantValuation) -> tuple:
    return (v.bounds, v.densities)


def _best_certificate(certs: Iterable[GainCertificate]) -> GainCertificate:
    return min(certs, key=lambda c: (-c.gain, _encoding(c.misreport)))


# ---------------------------------------------------------------------------
# grid search over misreports


@dataclass(frozen=True)
class SearchConfig:
    """Budget knobs for the grid engine.

    Breakpoint candidates come from the agents' true breakpoints and the cut
    points observed in the truthful run, plus offsets on both sides of each
    (the base offset is 1/64 of the smallest candidate gap, halved per
    round).  Masses range over the simplex grid with the given denominator,
    so every candidate misreport is normalized by construction.
    """

    mass_denominator: int = 4
    max_breakpoints: int = 2
    offset_rounds: int = 1
    max_candidates: Optional[int] = 64
    seed: int = 0


def _candidate_points(profile: Profile, truthful: Allocation,
                      cfg: SearchConfig) -> list[Fraction]:
    base: set[Fraction] = set()
    for v in profile:
        base.update(v.breakpoints)
    base.update(p for p in truthful.boundaries() if ZERO < p < ONE)
    anchored = sorted(base | {ZERO, ONE})
    gaps = [q - p for p, q in zip(anchored, anchored[1:]) if q > p]
    gamma = min(gaps) / 64 if gaps else Fraction(1, 64)
    points = set(base)
    for _ in range(cfg.offset_rounds):
        for p in list(base):
            for off in (p - gamma, p + gamma):
                if ZERO < off < ONE:
                    points.add(off)
        gamma /= 2
    return sorted(points)


def _compositions(total: int, parts: int) -> Iterable[tuple[int, ...]]:
    if parts == 1:
        yield (total,)
        return
    for head in range(total + 1):
        for rest in _compositions(total - head, parts - 1):
            yield (head, *rest)


def best_response_gain(mechanism: Mechanism, profile: Profile, agent: int,
                       cfg: SearchConfig = SearchConfig()) -> GainCertificate:
    """Grid search for a profitable misreport by one agent.

    Enumerates candidate misreports (breakpoint subsets x mass simplex),
    deterministically subsamples to the configured budget, evaluates each by
    running the mechanism, and returns the best verified certificate.  The
    truthful report is always among the candidates, so the result never has
    negative gain.  This is a lower bound on the supremum gain, never an
    upper-bound claim.
    """
    true_v = profile[agent]
    truthful_alloc = mechanism.run(profile)
    truthful_value = true_v.value(truthful_alloc.pieces[agent])
    pool = _candidate_points(profile, truthful_alloc, cfg)
    descriptors: list[tuple[tuple[Fraction, ...], tuple[int, ...]]] = []
    d = cfg.mass_denominator
    for size in range(0, cfg.max_breakpoints + 1):
        for points in itertools.combinations(pool, size):
            for masses in _compositions(d, size + 1):
                descriptors.append((points, masses))
    if cfg.max_candidates is not None and len(descriptors) > cfg.max_candidates:
        rng = Random(cfg.seed)
        descriptors = rng.sample(descriptors, cfg.max_candidates)
    seen: set[tuple] = set()
    candidates = [profile[agent]]
    for points, masses in descriptors:
        try:
            cand = PiecewiseConstantValuation.from_masses(
                points, [Fraction(m, d) for m in masses])
        except (ValueError, ZeroDivisionError):
            continue
        key = _encoding(cand)
        if key not in seen:
            seen.add(key)
            candidates.append(cand)
    best: Optional[tuple[Fraction, tuple, PiecewiseConstantValuation, Fraction]] = None
    for cand in candidates:
        deviated = true_v.value(
            mechanism.run(profile.replace(agent, cand)).pieces[agent])
        key = (-(deviated - truthful_value), _encoding(cand))
        if best is None or key < best[:2]:
            best = (*key, cand, deviated)
    assert best is not None
    _, _, winner, deviated = best
    return GainCertificate(mechanism.name, profile, agent, winner,
                           truthful_value, deviated, deviated - truthful_value)


# ---------------------------------------------------------------------------
# cut-point best response for the recursive-halving family


@dataclass(frozen=True)
class _Step:
    """One recursion node along the manipulator's planned path."""

    side: str                 # "left" or "right"
    share: Fraction           # floor(k/2)/k at this node
    rest_lo: Fraction         # left branches: where the non-recursing mass starts
    hi: Fraction              # node right endpoint


def _others_cuts(profile: Profile, agent: int, a: Fraction, b: Fraction,
                 agents: list[int]) -> list[tuple[Fraction, int]]:
    k = len(agents)
    out = []
    for i in agents:
        if i != agent:
            target = Fraction(k // 2, k) * profile[i].value_between(a, b)
            out.append((profile[i].cut_point(a, target), i))
    return sorted(out)


def _node_candidates(a: Fraction, b: Fraction, others: list[tuple[Fraction, int]],
                     own: PiecewiseConstantValuation,
                     own_cut: Fraction) -> list[Fraction]:
    anchors = {a, b, own_cut}
    anchors.update(c for c, _ in others)
    anchors.update(p for p in own.bounds if a < p < b)
    pts = sorted(anchors)
    cands: set[Fraction] = set(pts)
    for p, q in zip(pts, pts[1:]):
        gap = q - p
        if gap > 0:
            cands.add(p + gap / 2)
            cands.add(q - gap / 64)
    cands.discard(b)
    return sorted(cands)


def _dp_best_path(profile: Profile, agent: int, a: Fraction, b: Fraction,
                  agents: list[int], middles: bool
                  ) -> tuple[Fraction, list[_Step], Interval]:
    """Best true value the manipulator can steer its recursion piece to.

    At each node the manipulator either pins the left boundary to a candidate
    cut of its own (left branch; realizable exactly) or joins the right
    group (right branch; its realized cut may drift inside the right piece
    without changing the split).  With `middles` (the middle-sharing
    mechanism) the manipulator's plan places no mass on middle pieces, so
    middle shares contribute nothing to the planned value, and the
    right branch requires another agent between it and the middle.
    """
    true_v = profile[agent]
    if len(agents) == 1:
        return true_v.value_between(a, b), [], Interval(a, b)
    k = len(agents)
    half = k // 2
    share = Fraction(half, k)
    others = _others_cuts(profile, agent, a, b, agents)

    best: Optional[tuple[Fraction, list[_Step], Interval]] = None

    def consider(value: Fraction, steps: list[_Step], leaf: Interval) -> None:
        nonlocal best
        if best is None or value > best[0]:
            best = (value, steps, leaf)

    own_cut = true_v.cut_point(a, share * true_v.value_between(a, b))
    for c in _node_candidates(a, b, others, true_v, own_cut):
        order = sorted(others + [(c, agent)])
        if order[half - 1] != (c, agent):
            continue  # manipulator does not pin the boundary; drift would move it
        d_hi = order[half][0]
        left = [i for _, i in order[:half]]
        rest_lo = d_hi if middles else c
        value, steps, leaf = _dp_best_path(profile, agent, a, c, left, middles)
        consider(value, [_Step("left", share, rest_lo, b)] + steps, leaf)

    # single right branch: the manipulator sits beyond the split however it
    # reports, so only the resulting child matters
    if not middles:
        d_lo = others[half - 1][0]
        right = [agent] + [i for _, i in others[half:]]
        value, steps, leaf = _dp_best_path(profile, agent, d_lo, b, right, middles)
        consider(value, [_Step("right", share, d_lo, b)] + steps, leaf)
    elif k - half >= 2:
        d_hi = others[half][0]
        right = [agent] + [i for _, i in others[half:]]
        value, steps, leaf = _dp_best_path(profile, agent, d_hi, b, right, middles)
        consider(value, [_Step("right", share, d_hi, b)] + steps, leaf)

    assert best is not None
    return best


def _realize_path(steps: list[_Step], leaf: Interval) -> PiecewiseConstantValuation:
    """Build a misreport whose node cuts walk the planned path exactly.

    Works upward from the leaf: a left step keeps a `share` fraction of the
    mass in the child (so the prefix reaches the target precisely at the
    child's right edge) and spreads the remainder beyond the recursion
    boundary; a right step leaves the child mass alone, letting the realized
    cut fall harmlessly inside the right piece.
    """
    if leaf.length == 0:
        raise ValueError("cannot realize a path ending in a null piece")
    chunks: list[tuple[Fraction, Fraction, Fraction]] = [(leaf.lo, leaf.hi, Fraction(1))]
    for step in reversed(steps):
        if step.side == "left":
            if not step.rest_lo < step.hi:
                raise AssertionError("left step has nowhere to park the rest mass")
            chunks = [(lo, hi, m * step.share) for lo, hi, m in chunks]
            chunks.append((step.rest_lo, step.hi, 1 - step.share))
    chunks.sort()
    bounds: list[Fraction] = [ZERO]
    densities: list[Fraction] = []
    for lo, hi, mass in chunks:
        if lo > bounds[-1]:
            bounds.append(lo)
            densities.append(ZERO)
        bounds.append(hi)
        densities.append(mass / (hi - lo))
    if bounds[-1] < ONE:
        bounds.append(ONE)
        densities.append(ZERO)
    return PiecewiseConstantValuation.of(bounds[1:-1], densities)


def ep_cutpoint_best_response(mechanism: Mechanism, profile: Profile, agent: int,
                              cfg: SearchConfig = SearchConfig(),
                              grid_certificate: Optional[GainCertificate] = None
                              ) -> GainCertificate:
    """Best response for the recursive-halving family via path enumeration.

    Plans the manipulator's position among the other agents' fixed cut
    points over the whole recursion tree, realizes the best plan as an
    actual misreport, and verifies it by running the mechanism.  The grid
    engine's candidates (same config) are also evaluated, so the result
    never falls below best_response_gain on the same instance; pass a
    previously computed grid certificate for the same instance to skip the
    duplicate search.
    """
    if mechanism.name not in ("even-paz", "modified-ep"):
        raise ValueError(f"{mechanism.name!r} is not in the recursive-halving family")
    middles = mechanism.name == "modified-ep"
    truthful_value = profile[agent].value(mechanism.run(profile).pieces[agent])
    if grid_certificate is None:
        grid_certificate = best_response_gain(mechanism, profile, agent, cfg)
    certificates = [grid_certificate]
    planned, steps, leaf = _dp_best_path(
        profile, agent, ZERO, ONE, list(range(profile.n)), middles)
    if planned > truthful_value:
        misreport = _realize_path(steps, leaf)
        cert = evaluate_misreport(mechanism, profile, agent, misreport)
        if cert.deviated_value < planned:
            raise AssertionError(
                f"realized value {cert.deviated_value} below planned {planned}")
        certificates.append(cert)
    return _best_certificate(certificates)
