import random

import pytest

from patrolsynth.buchi import Guard, lasso_accepts, to_buchi
from patrolsynth.ltl import Not, eval_lasso, parse_ltl

from test_ltl import MISSION, random_formula, random_lasso


def agree_on_random_lassos(formula, rng, props, count=300):
    ba = to_buchi(formula)
    for _ in range(count):
        prefix, cycle = random_lasso(rng, props)
        want = eval_lasso(formula, prefix, cycle)
        got = lasso_accepts(ba, prefix, cycle)
        if want != got:
            return formula, prefix, cycle, want, got
    return None


class TestGuard:
    def test_admits(self):
        g = Guard(("a",), ("b",))
        assert g.admits({"a"})
        assert g.admits({"a", "c"})
        assert not g.admits({"a", "b"})
        assert not g.admits(set())

    def test_true_guard(self):
        assert Guard((), ()).admits(set())


class TestAutomatonShapes:
    def test_true_is_one_state(self):
        ba = to_buchi(parse_ltl("true"))
        assert ba.n_states == 1
        assert ba.accepting == {0}
        assert ba.sink is None

    def test_gfa_is_small(self):
        ba = to_buchi(parse_ltl("G F a"))
        assert ba.n_states <= 4

    def test_mission_formula_within_bound(self):
        ba = to_buchi(parse_ltl(MISSION))
        assert ba.n_states <= 32

    def test_totality(self):
        # after completion every state has a move on every letter
        for text in ("true", "G a", "F a", "a U b", "G (a -> X b)", MISSION):
            formula = parse_ltl(text)
            ba = to_buchi(formula)
            props = sorted(ba.ap)
            for q in ba.states:
                for mask in range(1 << len(props)):
                    letter = {p for i, p in enumerate(props) if mask >> i & 1}
                    assert ba.enabled(q, letter, include_sink=True)

    def test_unsatisfiable_formula_accepts_nothing(self):
        ba = to_buchi(parse_ltl("a & !a"))
        rng = random.Random(0)
        for _ in range(50):
            prefix, cycle = random_lasso(rng, ["a"])
            assert not lasso_accepts(ba, prefix, cycle)


class TestAcceptanceExamples:
    def test_eventually_prefix_hit(self):
        ba = to_buchi(parse_ltl("F a"))
        assert lasso_accepts(ba, [{"a"}], [set()])
        assert lasso_accepts(ba, [], [set(), {"a"}])
        assert not lasso_accepts(ba, [set()], [set()])

    def test_always_empty_cycle_rejected(self):
        ba = to_buchi(parse_ltl("G a"))
        assert not lasso_accepts(ba, [], [set()])
        assert lasso_accepts(ba, [], [{"a"}])

    def test_gf_lasso(self):
        ba = to_buchi(parse_ltl("G F a"))
        assert lasso_accepts(ba, [], [set(), {"a"}])
        assert not lasso_accepts(ba, [], [set()])

    def test_next_alignment(self):
        ba = to_buchi(parse_ltl("X a"))
        assert lasso_accepts(ba, [set()], [{"a"}])
        assert not lasso_accepts(ba, [], [{"a"}, set()])

    def test_empty_cycle_rejected(self):
        ba = to_buchi(parse_ltl("true"))
        with pytest.raises(ValueError):
            lasso_accepts(ba, [set()], [])


class TestSoundness:
    def test_mission_conjuncts(self):
        rng = random.Random(1234)
        for text in (
            "G (a -> X (!a U b))",
            "G (b -> X (!b U a))",
            "G F c",
            "G !u",
            "G F sur",
            MISSION,
        ):
            formula = parse_ltl(text)
            props = sorted(set(map(str, formula_atoms(formula)))) or ["a"]
            failure = agree_on_random_lassos(formula, rng, props, count=250)
            assert failure is None, failure

    def test_random_formulas(self):
        rng = random.Random(20_240_811)
        props = ["p", "q", "r"]
        for _ in range(40):
            formula = random_formula(rng, props, 3)
            failure = agree_on_random_lassos(formula, rng, props, count=150)
            assert failure is None, failure

    def test_self_duality(self):
        rng = random.Random(77)
        props = ["p", "q"]
        for _ in range(25):
            formula = random_formula(rng, props, 2)
            pos = to_buchi(formula)
            neg = to_buchi(Not(formula))
            for _ in range(60):
                prefix, cycle = random_lasso(rng, props)
                assert lasso_accepts(pos, prefix, cycle) != lasso_accepts(
                    neg, prefix, cycle
                )

    def test_conjunction_soundness(self):
        rng = random.Random(88)
        props = ["p", "q"]
        for _ in range(25):
            left = random_formula(rng, props, 2)
            right = random_formula(rng, props, 2)
            both = to_buchi(left & right)
            ba_left = to_buchi(left)
            ba_right = to_buchi(right)
            for _ in range(40):
                prefix, cycle = random_lasso(rng, props)
                if lasso_accepts(both, prefix, cycle):
                    assert lasso_accepts(ba_left, prefix, cycle)
                    assert lasso_accepts(ba_right, prefix, cycle)


def formula_atoms(formula):
    from patrolsynth.ltl import atoms

    return atoms(formula)
