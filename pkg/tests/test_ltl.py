import random

import pytest

from patrolsynth.ltl import (
    FALSE,
    TRUE,
    Always,
    And,
    Atom,
    Eventually,
    LtlSyntaxError,
    Next,
    Not,
    Or,
    Release,
    Until,
    atoms,
    conjuncts,
    eval_lasso,
    negation_normal_form,
    parse_ltl,
)

MISSION = "G (a -> X (!a U b)) & G (b -> X (!b U a)) & G F c & G !u & G F sur"


class TestParser:
    def test_nested_unary(self):
        assert parse_ltl("G F c") == Always(Eventually(Atom("c")))

    def test_until_right_associative(self):
        f = parse_ltl("a U b U c")
        assert f == Until(Atom("a"), Until(Atom("b"), Atom("c")))

    def test_precedence_or_and_until(self):
        f = parse_ltl("a | b & c U d")
        assert f == Or(Atom("a"), And(Atom("b"), Until(Atom("c"), Atom("d"))))

    def test_implication_desugars(self):
        assert parse_ltl("a -> b") == Or(Not(Atom("a")), Atom("b"))

    def test_implication_right_associative(self):
        f = parse_ltl("a -> b -> c")
        assert f == Or(Not(Atom("a")), Or(Not(Atom("b")), Atom("c")))

    def test_constants(self):
        assert parse_ltl("true") is TRUE
        assert parse_ltl("false") is FALSE

    def test_mission_formula_has_five_conjuncts(self):
        f = parse_ltl(MISSION)
        parts = conjuncts(f)
        assert len(parts) == 5
        assert atoms(f) == {"a", "b", "c", "u", "sur"}

    def test_syntax_error_position(self):
        with pytest.raises(LtlSyntaxError) as err:
            parse_ltl("a & ) b")
        assert "position" in str(err.value)

    def test_dangling_operator(self):
        with pytest.raises(LtlSyntaxError):
            parse_ltl("a U")

    def test_trailing_junk(self):
        with pytest.raises(LtlSyntaxError):
            parse_ltl("a b")

    def test_unexpected_character(self):
        with pytest.raises(LtlSyntaxError):
            parse_ltl("a + b")


class TestNormalForm:
    def test_negation_pushed_to_atoms(self):
        f = negation_normal_form(parse_ltl("!(a U (b | X c))"))
        assert f == Release(
            Not(Atom("a")), And(Not(Atom("b")), Next(Not(Atom("c"))))
        )

    def test_always_eventually_rewritten(self):
        f = negation_normal_form(parse_ltl("G F a"))
        assert f == Release(FALSE, Until(TRUE, Atom("a")))

    def test_double_negation(self):
        assert negation_normal_form(parse_ltl("!!a")) == Atom("a")

    def test_not_always(self):
        f = negation_normal_form(parse_ltl("!G a"))
        assert f == Until(TRUE, Not(Atom("a")))


def random_formula(rng, props, depth):
    if depth == 0 or rng.random() < 0.25:
        roll = rng.random()
        if roll < 0.8:
            return Atom(rng.choice(props))
        return TRUE if roll < 0.9 else FALSE
    ctor = rng.choice(["not", "and", "or", "next", "until", "always", "eventually"])
    if ctor == "not":
        return Not(random_formula(rng, props, depth - 1))
    if ctor == "next":
        return Next(random_formula(rng, props, depth - 1))
    if ctor == "always":
        return Always(random_formula(rng, props, depth - 1))
    if ctor == "eventually":
        return Eventually(random_formula(rng, props, depth - 1))
    left = random_formula(rng, props, depth - 1)
    right = random_formula(rng, props, depth - 1)
    return {"and": And, "or": Or, "until": Until}[ctor](left, right)


def random_lasso(rng, props, max_prefix=4, max_cycle=4):
    def letter():
        return frozenset(p for p in props if rng.random() < 0.5)

    prefix = [letter() for _ in range(rng.randrange(0, max_prefix + 1))]
    cycle = [letter() for _ in range(rng.randrange(1, max_cycle + 1))]
    return prefix, cycle


class TestLassoSemantics:
    def test_eventually(self):
        f = parse_ltl("F a")
        assert eval_lasso(f, [{"a"}], [set()])
        assert not eval_lasso(f, [set()], [set()])
        assert eval_lasso(f, [], [set(), {"a"}])

    def test_always(self):
        f = parse_ltl("G a")
        assert eval_lasso(f, [], [{"a"}])
        assert not eval_lasso(f, [{"a"}], [{"a"}, set()])

    def test_until_needs_left_to_hold(self):
        f = parse_ltl("a U b")
        assert eval_lasso(f, [{"a"}, {"a"}, {"b"}], [{"b"}])
        assert not eval_lasso(f, [{"a"}, set(), {"b"}], [{"b"}])

    def test_next_wraps_into_cycle(self):
        f = parse_ltl("X a")
        assert eval_lasso(f, [set()], [{"a"}])
        assert eval_lasso(f, [], [set(), {"a"}])
        assert not eval_lasso(f, [], [{"a"}, set()])

    def test_empty_cycle_rejected(self):
        with pytest.raises(ValueError):
            eval_lasso(TRUE, [set()], [])

    def test_release_via_negation(self):
        f = negation_normal_form(parse_ltl("!(true U !a)"))  # = G a
        assert eval_lasso(f, [], [{"a"}])
        assert not eval_lasso(f, [], [{"a"}, set()])

    def test_nnf_preserves_semantics_on_random_inputs(self):
        rng = random.Random(99)
        props = ["p", "q", "r"]
        for _ in range(300):
            f = random_formula(rng, props, 3)
            g = negation_normal_form(f)
            prefix, cycle = random_lasso(rng, props)
            assert eval_lasso(f, prefix, cycle) == eval_lasso(g, prefix, cycle)

    def test_unrolling_invariance(self):
        # evaluating on the lasso equals evaluating on the cycle unrolled once
        rng = random.Random(17)
        props = ["p", "q"]
        for _ in range(200):
            f = random_formula(rng, props, 3)
            prefix, cycle = random_lasso(rng, props, max_prefix=3, max_cycle=3)
            assert eval_lasso(f, prefix, cycle) == eval_lasso(f, prefix + cycle, cycle)
