import random
from fractions import Fraction

import pytest

from cakecut.cake import (
    Allocation,
    Piece,
    PiecewiseConstantValuation as PCV,
    Profile,
)
from cakecut.chains import (
    ChainError,
    ChainParameters,
    InfeasibleParameters,
    discussion_example,
    ep_worstcase_fixture,
    mirror_valuation,
    prop1_chain,
    prop1_default_deltas,
    thm1_chain,
    thm1_delta_bound,
    thm2_b_point,
    thm2_chain,
)
from cakecut.mechanisms import EQUAL_SPLIT, EVEN_PAZ, Mechanism
from cakecut.properties import evaluate_misreport

F = Fraction
U = PCV.uniform()

WASTEFUL = Mechanism(
    "wasteful-halver",
    lambda p: Allocation.of(
        [Piece.interval(F(i, 2 * p.n), F(i + 1, 2 * p.n)) for i in range(p.n)]),
    frozenset())

# contiguous, ignores reports, hands agent 0 the right piece
RIGHT_DICTATOR = Mechanism(
    "right-dictator",
    lambda p: Allocation.of([Piece.interval("1/3", 1), Piece.interval(0, "1/3")]),
    frozenset({"contiguous"}))


class TestParameters:
    def test_thm1_delta_bound_example(self):
        bound = thm1_delta_bound(2, F(1, 12), F(1, 12))
        assert bound == F(2, 9)

    def test_thm1_default_is_midpoint(self):
        witness = thm1_chain(EQUAL_SPLIT, ChainParameters.of(2, "1/12", "1/12"))
        assert ("delta", F(1, 9)) in witness.parameters

    def test_thm1_rejects_infeasible(self):
        with pytest.raises(InfeasibleParameters):
            thm1_chain(EQUAL_SPLIT, ChainParameters.of(2, "1/6", 0))
        with pytest.raises(InfeasibleParameters):
            thm1_chain(EQUAL_SPLIT, ChainParameters.of(2, 0, 0, delta=1))

    def test_prop1_default_deltas_match_hand_run(self):
        d = prop1_default_deltas(F(1, 2), F(2, 5), F(0))
        assert d["delta3"] == F(1, 40)
        assert d["delta5"] == F(1, 20)

    def test_prop1_defaults_feasible_everywhere(self):
        rng = random.Random(70)
        from cakecut.chains import _prop1_validate
        for _ in range(300):
            eps1 = F(rng.randrange(0, 50), 100)
            eps2 = F(rng.randrange(0, 50 - 100 * eps1.numerator // eps1.denominator
                                   if eps1 < F(1, 2) else 1), 100)
            if eps1 + eps2 >= F(1, 2):
                continue
            c1 = F(1, 2) + F(rng.randrange(0, 51), 102)
            _prop1_validate(c1, eps1, eps2, prop1_default_deltas(c1, eps1, eps2))

    def test_thm2_b_point_example(self):
        assert thm2_b_point(F(1, 2), F(2, 3), 3, F(0)) == F(11, 18)

    def test_thm2_band_valuation(self):
        witness = thm2_chain(EVEN_PAZ, ChainParameters.of(3))
        band = witness.profiles[0][2]
        assert band.value_between("1/9", "4/9") == 1
        assert band.density_at(F(2, 9)) == 3


class TestThm1Chain:
    @pytest.mark.parametrize("n", [2, 3, 4])
    def test_equal_split_yields_witness(self, n):
        witness = thm1_chain(EQUAL_SPLIT, ChainParameters.of(n))
        assert witness.chain == "thm1"
        assert witness.violated == "strategyproofness"
        assert witness.certificate.gain > 0
        assert witness.verify(EQUAL_SPLIT)

    def test_wasteful_mechanism_caught_at_first_profile(self):
        witness = thm1_chain(WASTEFUL, ChainParameters.of(2))
        assert witness.violated in ("free-disposal", "non-wastefulness")
        assert len(witness.profiles) == 1
        assert witness.verify(WASTEFUL)

    def test_profiles_recorded(self):
        witness = thm1_chain(EQUAL_SPLIT, ChainParameters.of(3))
        assert 2 <= len(witness.profiles) <= 3
        front = witness.profiles[0][0]
        assert front.value_between(0, F(2, 3)) == 1


class TestProp1Chain:
    @pytest.mark.parametrize("eps1", [F(0), F(1, 5), F(2, 5)])
    def test_even_paz_yields_witness(self, eps1):
        witness = prop1_chain(EVEN_PAZ, ChainParameters.of(2, eps1, 0))
        assert witness.chain == "prop1"
        assert witness.violated == "strategyproofness"
        assert witness.certificate.gain > eps1
        assert witness.verify(EVEN_PAZ)

    def test_mirror_and_swap_path(self):
        witness = prop1_chain(RIGHT_DICTATOR, ChainParameters.of(2, 0, 0))
        assert witness.verify(RIGHT_DICTATOR)

    def test_requires_two_agents(self):
        with pytest.raises(InfeasibleParameters):
            prop1_chain(EVEN_PAZ, ChainParameters.of(3))

    def test_noncontiguous_mechanism_reported(self):
        scatter = Mechanism(
            "scatter",
            lambda p: Allocation.of([
                Piece.of([*Piece.interval(0, "1/4").intervals,
                          *Piece.interval("1/2", "3/4").intervals]),
                Piece.of([*Piece.interval("1/4", "1/2").intervals,
                          *Piece.interval("3/4", 1).intervals])]),
            frozenset())
        witness = prop1_chain(scatter, ChainParameters.of(2))
        assert witness.violated == "contiguity"
        assert witness.verify(scatter)


class TestThm2Chain:
    @pytest.mark.parametrize("n", [3, 4])
    def test_even_paz_yields_witness(self, n):
        witness = thm2_chain(EVEN_PAZ, ChainParameters.of(n))
        assert witness.chain == "thm2"
        assert witness.violated == "strategyproofness"
        assert witness.certificate.gain > 0
        assert witness.verify(EVEN_PAZ)

    def test_rejects_small_n_and_nonzero_eps1(self):
        with pytest.raises(InfeasibleParameters):
            thm2_chain(EVEN_PAZ, ChainParameters.of(2))
        with pytest.raises(InfeasibleParameters):
            thm2_chain(EVEN_PAZ, ChainParameters.of(3, eps1="1/10"))


class TestDiscussionExample:
    def test_exact_certificate(self):
        (truthful, deviated), witness = discussion_example()
        cert = witness.certificate
        assert cert.truthful_value == F(1, 2)
        assert cert.deviated_value == 1
        assert cert.gain == F(1, 2)
        assert witness.verify()
        assert deviated[1] == cert.misreport

    def test_profiles_are_the_published_ones(self):
        (truthful, _), _ = discussion_example()
        assert truthful[0].density_at(F(3, 4)) == 2
        assert truthful[1].density_at(F(9, 10)) == F(5, 2)


class TestWorstCaseFixture:
    def test_two_agent_gain(self):
        profile, agent, lie, bound = ep_worstcase_fixture(2, "1/50")
        assert bound == F(1, 2) - F(1, 50)
        cert = evaluate_misreport(EVEN_PAZ, profile, agent, lie)
        assert cert.gain == F(2401, 4950)
        assert cert.gain >= bound
        assert cert.gain >= F(1, 2) - F(1, 25)

    def test_three_agent_gain(self):
        profile, agent, lie, bound = ep_worstcase_fixture(3, "1/50")
        cert = evaluate_misreport(EVEN_PAZ, profile, agent, lie)
        assert cert.gain == F(2, 3) - F(1, 50)
        assert cert.gain >= bound
        assert cert.gain >= F(2, 3) - F(1, 25)

    def test_gap_validation(self):
        with pytest.raises(ValueError):
            ep_worstcase_fixture(2, "1/2")
        with pytest.raises(ValueError):
            ep_worstcase_fixture(4, "1/50")


class TestMirrorHelpers:
    def test_mirror_involution(self):
        rng = random.Random(71)
        from cakecut.sampling import random_valuation
        for _ in range(100):
            v = random_valuation(rng, 3)
            assert mirror_valuation(mirror_valuation(v)) == v

    def test_mirror_preserves_values(self):
        v = PCV.of(["1/4"], [2, F(2, 3)])
        assert mirror_valuation(v).value_between("3/4", 1) == v.value_between(0, "1/4")
