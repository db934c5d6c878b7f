"""Acceptance criteria for the package, one test per criterion.

Every tolerance is exact (Fraction comparisons, zero slack unless the
criterion itself names one).  Each test prints a PASS line on success so a
`pytest -s` run reads as a checklist.
"""

import json
import random
from fractions import Fraction

import pytest

from cakecut.cake import Piece, PiecewiseConstantValuation as PCV, Profile
from cakecut.chains import (
    ChainParameters,
    discussion_example,
    ep_worstcase_fixture,
    prop1_chain,
    thm1_chain,
    thm2_chain,
)
from cakecut.cli import do_verify
from cakecut.io import gain_certificate_to_json, witness_to_json
from cakecut.mechanisms import (
    EQUAL_SPLIT,
    EVEN_PAZ,
    MODIFIED_EVEN_PAZ,
    even_paz,
    modified_even_paz,
)
from cakecut.properties import (
    SearchConfig,
    best_response_gain,
    ep_cutpoint_best_response,
    evaluate_misreport,
)
from cakecut.queries import (
    RWOracle,
    approximate_valuation,
    lift_direct_to_rw,
    query_budget,
)
from cakecut.sampling import random_profile, random_valuation

F = Fraction

# search budget for the randomized sweeps; exactness of the *comparisons*
# does not depend on the budget
SWEEP_CFG = SearchConfig(mass_denominator=3, max_breakpoints=1,
                         offset_rounds=0, max_candidates=24)


def prop4_bound(n: int) -> F:
    if n in (2, 4):
        return F(1, 2)
    if n in (3, 5):
        return F(2, 3)
    return 1 - F(2, n)


def thm3_bound(n: int) -> F:
    bound = 1 - F(3, 2 * n)
    if n % 2 == 1:
        bound += F(1, 2 * n * n)
    return bound


def test_criterion_1_even_paz_proportional():
    rng = random.Random(101)
    for n in range(2, 9):
        for _ in range(1000):
            profile = random_profile(rng, n)
            alloc = even_paz(profile)
            for i, v in enumerate(profile):
                assert v.value(alloc.pieces[i]) >= F(1, n)
    print("PASS criterion 1: even-paz exactly proportional on 1000 profiles "
          "for each n in 2..8")


def test_criterion_2_modified_ep_proportional():
    rng = random.Random(102)
    for n in range(2, 9):
        for _ in range(1000):
            profile = random_profile(rng, n)
            alloc = modified_even_paz(profile)
            for i, v in enumerate(profile):
                assert v.value(alloc.pieces[i]) >= F(1, n)
    print("PASS criterion 2: modified even-paz exactly proportional on 1000 "
          "profiles for each n in 2..8")


def test_criterion_3_even_paz_gain_bounds():
    rng = random.Random(103)
    for n in range(2, 9):
        bound = prop4_bound(n)
        for trial in range(500):
            profile = random_profile(rng, n)
            agent = trial % n
            grid = best_response_gain(EVEN_PAZ, profile, agent, SWEEP_CFG)
            exact = ep_cutpoint_best_response(EVEN_PAZ, profile, agent, SWEEP_CFG,
                                              grid_certificate=grid)
            assert grid.gain <= bound
            assert exact.gain <= bound
            assert exact.gain >= grid.gain
    print("PASS criterion 3: searched even-paz gains within 1/2, 2/3, 1-2/n "
          "bounds over 500 profiles per n in 2..8 (both engines)")


def test_criterion_4_near_tightness():
    for n in (2, 3):
        profile, agent, lie, bound = ep_worstcase_fixture(n, F(1, 50))
        cert = evaluate_misreport(EVEN_PAZ, profile, agent, lie)
        assert cert.verify(EVEN_PAZ)
        assert cert.gain >= bound
        assert cert.gain >= (1 - F(1, n)) - F(1, 25)
    print("PASS criterion 4: worst-case fixtures reach gain >= (1 - 1/n) - 1/25 "
          "for n in {2, 3}")


def test_criterion_5_modified_ep_gain_bounds():
    rng = random.Random(105)
    for n in range(2, 7):
        bound = thm3_bound(n)
        for trial in range(500):
            profile = random_profile(rng, n)
            agent = trial % n
            exact = ep_cutpoint_best_response(MODIFIED_EVEN_PAZ, profile,
                                              agent, SWEEP_CFG)
            assert exact.gain <= bound
    assert thm3_bound(2) == F(1, 4)
    assert thm3_bound(3) == F(5, 9)
    print("PASS criterion 5: searched modified-even-paz gains within "
          "1-3/(2n) (+1/(2n^2) odd) over 500 profiles per n in 2..6")


def test_criterion_6_learner_guarantees():
    rng = random.Random(106)
    cases = 0
    while cases < 500:
        for k in range(1, 6):
            for eps in (F(1), F(1, 2), F(1, 5)):
                hidden = random_valuation(rng, max_breakpoints=k, denom=10)
                learned = approximate_valuation(RWOracle(hidden), k, eps)
                w = learned.valuation
                assert w.value(Piece.whole()) == 1
                assert learned.queries_used == query_budget(k, eps)
                pts = sorted(set(hidden.bounds) | set(w.bounds))
                over = under = F(0)
                for a, b in zip(pts, pts[1:]):
                    diff = w.value_between(a, b) - hidden.value_between(a, b)
                    if diff > 0:
                        over += diff
                    else:
                        under -= diff
                assert max(over, under) <= eps / 2
                cases += 1
    print("PASS criterion 6: learner keeps unit mass, exact floor(2k/eps) "
          "queries, and eps/2 error on every grid piece over 500+ cases")


def test_criterion_7_lifting_bounds():
    rng = random.Random(107)
    lifted = {n: lift_direct_to_rw(MODIFIED_EVEN_PAZ, 3, F(1, 5))
              for n in (2, 3, 4)}
    for trial in range(200):
        n = (2, 3, 4)[trial % 3]
        profile = random_profile(rng, n, max_breakpoints=3)
        run = lifted[n].run_profile(profile)
        assert run.queries <= n * 30
        for i, v in enumerate(profile):
            assert v.value(run.allocation.pieces[i]) >= F(1, n) - F(1, 10)
    print("PASS criterion 7: lifted modified even-paz stays within n*floor(2k/eps) "
          "queries and 1/n - eps/2 proportionality on 200 profiles")


def test_criterion_8_discussion_example_exact():
    (truthful, deviated), witness = discussion_example()
    cert = witness.certificate
    assert cert.truthful_value == F(1, 2)
    assert cert.deviated_value == 1
    assert cert.gain == F(1, 2)
    assert witness.verify()
    assert deviated[1] == cert.misreport
    print("PASS criterion 8: reallocation-stage example reproduced exactly "
          "(truthful 1/2, deviated 1, gain 1/2)")


def _chain_witnesses():
    witnesses = []
    for n in (2, 3, 4):
        witnesses.append(thm1_chain(EQUAL_SPLIT, ChainParameters.of(n)))
    for eps1 in (F(0), F(1, 5), F(2, 5)):
        witnesses.append(prop1_chain(EVEN_PAZ, ChainParameters.of(2, eps1, 0)))
    for n in (3, 4):
        witnesses.append(thm2_chain(EVEN_PAZ, ChainParameters.of(n)))
    return witnesses


def test_criterion_9_chains_terminate_with_witnesses():
    for witness in _chain_witnesses():
        assert witness.verify()
        assert witness.certificate is not None
    print("PASS criterion 9: thm1 (n in 2..4), prop1 (eps1 in {0,1/5,2/5}), and "
          "thm2 (n in {3,4}) chains all end in self-verified witnesses")


def test_criterion_10_witness_integrity():
    witnesses = _chain_witnesses()
    _, disc = discussion_example()
    witnesses.append(disc)
    for witness in witnesses:
        payload = json.loads(json.dumps(witness_to_json(witness)))
        out, verified = do_verify(payload)
        assert verified, out
        assert out["stored"] == out["recomputed"]
    rng = random.Random(110)
    cert = best_response_gain(EVEN_PAZ, random_profile(rng, 3), 0, SWEEP_CFG)
    payload = json.loads(json.dumps(gain_certificate_to_json(cert)))
    out, verified = do_verify(payload)
    assert verified
    print("PASS criterion 10: every emitted witness/certificate re-verifies "
          "byte-for-byte through the verify path")
