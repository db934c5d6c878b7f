import random
from fractions import Fraction

import pytest

from cakecut.cake import (
    InfeasibleCutError,
    Piece,
    PiecewiseConstantValuation as PCV,
    Profile,
    ival,
)
from cakecut.mechanisms import MODIFIED_EVEN_PAZ
from cakecut.queries import (
    LearnedValuation,
    RWOracle,
    StrategicOracle,
    approximate_valuation,
    lift_direct_to_rw,
    query_budget,
)
from cakecut.sampling import random_profile, random_valuation

F = Fraction
U = PCV.uniform()
FRONT = PCV.of(["1/2"], [2, 0])


def approximation_gap(v: PCV, w: PCV) -> F:
    """Exact max over all pieces X of |W(X) - V(X)|.

    Both functions are constant on the cells of their combined breakpoint
    grid, so the worst piece is the union of all cells where one function
    exceeds the other; the two signed cell sums give the exact maximum.
    """
    pts = sorted(set(v.bounds) | set(w.bounds))
    over = under = F(0)
    for a, b in zip(pts, pts[1:]):
        diff = w.value_between(a, b) - v.value_between(a, b)
        if diff > 0:
            over += diff
        else:
            under -= diff
    return max(over, under)


class TestOracle:
    def test_eval_whole(self):
        assert RWOracle(U).eval(0, 1) == 1

    def test_eval_middle(self):
        assert RWOracle(U).eval("1/4", "3/4") == F(1, 2)

    def test_eval_past_support(self):
        assert RWOracle(FRONT).eval("1/4", 1) == F(1, 2)

    def test_cut_median(self):
        assert RWOracle(U).cut(0, "1/2") == F(1, 2)

    def test_cut_front_loaded(self):
        assert RWOracle(FRONT).cut(0, "1/2") == F(1, 4)

    def test_cut_zero_target(self):
        assert RWOracle(FRONT).cut("1/2", 0) == F(1, 2)

    def test_infeasible_cut(self):
        with pytest.raises(InfeasibleCutError):
            RWOracle(FRONT).cut("1/2", "1/10")

    def test_counts_distinct_queries_only(self):
        o = RWOracle(U)
        o.eval(0, "1/2")
        o.eval(0, "1/2")
        o.cut(0, "1/4")
        o.eval(0, "1/2")
        assert o.query_count == 2
        assert len(o.log) == 2

    def test_log_consistent_with_hidden(self):
        rng = random.Random(20)
        o = RWOracle(random_valuation(rng, 3))
        for _ in range(30):
            x = F(rng.randrange(0, 10), 10)
            y = x + F(rng.randrange(0, 11 - 10 * x.numerator // x.denominator if x < 1 else 1), 10) * (1 - x)
            o.eval(x, min(y, F(1)))
        for kind, args, answer in o.log:
            assert o.hidden.value_between(*args) == answer

    def test_cut_eval_consistency(self):
        rng = random.Random(21)
        for _ in range(150):
            o = RWOracle(random_valuation(rng, 3))
            x = F(rng.randrange(0, 12), 12)
            y = x + F(rng.randrange(0, 13), 12) * (1 - x)
            r = o.eval(x, y)
            cut = o.cut(x, r)
            assert cut <= y
            if r > 0 and o.hidden.value_between(x, y) == r:
                assert o.eval(x, cut) == r

    def test_strategic_oracle_answers_report(self):
        o = StrategicOracle(reported=FRONT, true_valuation=U)
        assert o.cut(0, "1/2") == F(1, 4)
        assert o.true_valuation.value_between(0, o.cut(0, "1/2")) == F(1, 4)


class TestLearner:
    def test_uniform_k1_eps1(self):
        o = RWOracle(U)
        learned = approximate_valuation(o, k=1, epsilon=1)
        assert learned.queries_used == 2
        assert learned.valuation == U
        assert o.query_count == 2

    def test_front_loaded_recovered_exactly(self):
        o = RWOracle(FRONT)
        learned = approximate_valuation(o, k=1, epsilon=1)
        assert [args for kind, args, _ in o.log] == [(F(0), F(1, 2)), (F(1, 4), F(1, 2))]
        assert learned.valuation == FRONT
        assert learned.queries_used == 2

    def test_budget_and_bound_two_breakpoints(self):
        rng = random.Random(22)
        hits = 0
        for _ in range(40):
            v = random_valuation(rng, max_breakpoints=2, denom=10)
            learned = approximate_valuation(RWOracle(v), k=2, epsilon="1/5")
            assert learned.queries_used == 20
            assert learned.valuation.value(Piece.whole()) == 1
            assert approximation_gap(v, learned.valuation) <= F(1, 10)
            hits += 1
        assert hits == 40

    def test_random_piece_error_bound(self):
        rng = random.Random(23)
        v = random_valuation(rng, max_breakpoints=2, denom=10)
        w = approximate_valuation(RWOracle(v), k=2, epsilon="1/5").valuation
        for _ in range(1000):
            cuts = sorted(F(rng.randrange(0, 61), 60) for _ in range(4))
            x = Piece.of([ival(cuts[0], cuts[1]), ival(cuts[2], cuts[3])])
            assert abs(w.value(x) - v.value(x)) <= F(1, 10)

    def test_per_slice_cell_bound(self):
        # within each learned cell both functions carry the same slice of
        # mass, so any sub-piece deviates by at most eps/(2k)
        rng = random.Random(24)
        for _ in range(30):
            v = random_valuation(rng, max_breakpoints=3, denom=8)
            k, eps = 3, F(1, 2)
            learned = approximate_valuation(RWOracle(v), k, eps)
            w = learned.valuation
            slice_mass = eps / (2 * k)
            bounds = [F(0)]
            for _ in range(learned.queries_used):
                bounds.append(v.cut_point(bounds[-1], slice_mass))
            for a, b in zip(bounds, bounds[1:]):
                assert w.value_between(a, b) == v.value_between(a, b) == slice_mass
                mid = (a + b) / 2
                assert abs(w.value_between(a, mid) - v.value_between(a, mid)) <= slice_mass

    def test_mass_exactly_one_always(self):
        rng = random.Random(25)
        for _ in range(100):
            v = random_valuation(rng, max_breakpoints=4, denom=9)
            for eps in (F(1), F(1, 2), F(2, 7)):
                learned = approximate_valuation(RWOracle(v), 4, eps)
                assert learned.valuation.value(Piece.whole()) == 1
                assert learned.queries_used == query_budget(4, eps)

    def test_k_below_breakpoints_rejected(self):
        v = PCV.of(["1/4", "1/2", "3/4"], [1, 2, 0, 1])
        with pytest.raises(ValueError, match="below the hidden breakpoint count"):
            approximate_valuation(RWOracle(v), k=2, epsilon=1)


class TestLifting:
    def test_query_accounting_exact(self):
        # three agents, k=4, eps=1/2: 16 cuts each, 48 in total
        rng = random.Random(26)
        lifted = lift_direct_to_rw(MODIFIED_EVEN_PAZ, k=4, epsilon="1/2")
        profile = random_profile(rng, 3)
        run = lifted.run_profile(profile)
        assert run.queries == 48

    def test_uniform_agents_lift_exactly(self):
        lifted = lift_direct_to_rw(MODIFIED_EVEN_PAZ, k=2, epsilon="1/5")
        profile = Profile.of([U, U])
        run = lifted.run_profile(profile)
        assert run.learned == profile
        assert run.allocation == MODIFIED_EVEN_PAZ.run(profile)

    def test_lifted_proportionality_bound(self):
        rng = random.Random(27)
        lifted = lift_direct_to_rw(MODIFIED_EVEN_PAZ, k=2, epsilon="1/5")
        for _ in range(60):
            profile = random_profile(rng, 2, max_breakpoints=2)
            run = lifted.run_profile(profile)
            assert run.queries <= 2 * 20
            for i, v in enumerate(profile):
                assert v.value(run.allocation.pieces[i]) >= F(1, 2) - F(1, 10)

    def test_run_on_oracles_counts_visible_to_caller(self):
        lifted = lift_direct_to_rw(MODIFIED_EVEN_PAZ, k=1, epsilon=1)
        oracles = [RWOracle(U), RWOracle(FRONT)]
        allocation = lifted.run_on_oracles(oracles)
        assert [o.query_count for o in oracles] == [2, 2]
        assert allocation.n == 2

    def test_strategic_oracles_shift_outcome(self):
        lifted = lift_direct_to_rw(MODIFIED_EVEN_PAZ, k=2, epsilon="1/5")
        truthful = lifted.run_on_oracles([RWOracle(D) for D in (U, FRONT)])
        strategic = lifted.run_on_oracles(
            [RWOracle(U), StrategicOracle(reported=U, true_valuation=FRONT)])
        assert truthful != strategic
