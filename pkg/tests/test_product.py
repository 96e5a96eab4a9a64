import random
from itertools import product as iproduct

import pytest

from patrolsynth.buchi import to_buchi
from patrolsynth.ltl import parse_ltl
from patrolsynth.model import TransitionSystem
from patrolsynth.product import (
    EmptyProductError,
    UnsatisfiableError,
    accepting_sccs,
    build_product,
    product_document,
    project_run,
)

from test_ltl import MISSION


def loop_system(label):
    return TransitionSystem(["s"], [("s", "s", 1)], {"s": label}, "s", ap={"a", "sur"})


def random_labeled_system(rng, n_states=6):
    names = [f"s{i}" for i in range(n_states)]
    edges = {(names[i], names[(i + 1) % n_states]) for i in range(n_states)}
    for _ in range(8):
        edges.add((rng.choice(names), rng.choice(names)))
    triples = [(u, v, rng.randint(1, 3)) for u, v in sorted(edges)]
    labels = {}
    for s in names:
        props = set()
        if rng.random() < 0.5:
            props.add("a")
        if rng.random() < 0.4:
            props.add("sur")
        labels[s] = props
    return TransitionSystem(names, triples, labels, names[0], ap={"a", "sur"})


class TestBuildProduct:
    def test_single_loop_satisfying(self):
        product = build_product(loop_system({"a", "sur"}), to_buchi(parse_ltl("G a")))
        assert len(product.states) >= 1
        assert all(product.succ[x] for x in product.states)
        assert product.accepting

    def test_unsatisfiable_loop_is_empty(self):
        with pytest.raises(EmptyProductError):
            build_product(loop_system({"a"}), to_buchi(parse_ltl("G !a")))

    def test_weights_preserved(self):
        rng = random.Random(4)
        ts = random_labeled_system(rng)
        product = build_product(ts, to_buchi(parse_ltl("G F a")))
        for x in product.states:
            for y, w in product.succ[x].items():
                assert w == ts.weight(x[0], y[0])

    def test_transition_rule(self):
        # (x, y) is a product transition iff the system moves and the
        # automaton accepts the step on the source label
        rng = random.Random(9)
        ts = random_labeled_system(rng)
        ba = to_buchi(parse_ltl("G F a"))
        product = build_product(ts, ba)
        for x in product.states:
            s, q = x
            allowed = {
                (s2, q2)
                for q2 in ba.enabled(q, ts.label(s))
                for s2 in ts.successors(s)
            }
            got = set(product.succ[x])
            assert got <= allowed
            # anything allowed but absent must have been pruned as dead
            for y in allowed - got:
                assert y not in product.succ

    def test_mission_product_nonempty(self):
        from patrolsynth.gridworld import case_study

        ts, _field, formula, _params = case_study()
        product = build_product(ts, to_buchi(parse_ltl(formula), ap=ts.ap))
        comps = accepting_sccs(product, "sur")
        assert comps and any(c.surveillance for c in comps)


class TestProjection:
    def test_singleton(self):
        product = build_product(loop_system({"a", "sur"}), to_buchi(parse_ltl("G a")))
        assert project_run(product, [product.initial]) == (product.initial[0],)

    def test_projection_is_valid_run_and_weight_preserving(self):
        rng = random.Random(12)
        for _ in range(10):
            ts = random_labeled_system(rng)
            try:
                product = build_product(ts, to_buchi(parse_ltl("G F a")))
            except EmptyProductError:
                continue
            run = [product.initial]
            for _ in range(10):
                run.append(rng.choice(sorted(product.succ[run[-1]])))
            projected = project_run(product, run)
            for a, b in zip(projected, projected[1:]):
                assert ts.has_transition(a, b)
            product_weight = sum(product.weight(a, b) for a, b in zip(run, run[1:]))
            ts_weight = sum(ts.weight(a, b) for a, b in zip(projected, projected[1:]))
            assert product_weight == ts_weight

    def test_invalid_run_rejected(self):
        product = build_product(loop_system({"a", "sur"}), to_buchi(parse_ltl("G a")))
        with pytest.raises(ValueError):
            project_run(product, [("nope", 0)])


def brute_force_sccs(states, succ):
    # reachability closure per pair
    reach = {x: set() for x in states}
    for x in states:
        stack = [x]
        while stack:
            node = stack.pop()
            for nxt in succ.get(node, ()):
                if nxt not in reach[x]:
                    reach[x].add(nxt)
                    stack.append(nxt)
    comps = set()
    for x in states:
        members = frozenset(
            [x] + [y for y in states if y in reach[x] and x in reach[y]]
        )
        if len(members) > 1 or x in succ.get(x, ()):
            comps.add(members)
    return comps


class TestAcceptingComponents:
    def test_single_accepting_loop(self):
        product = build_product(loop_system({"a", "sur"}), to_buchi(parse_ltl("G a")))
        comps = accepting_sccs(product, "sur")
        assert len(comps) == 1
        assert comps[0].surveillance

    def test_transient_accepting_state_excluded(self):
        ts = TransitionSystem(
            ["a", "b"],
            [("a", "b", 1), ("b", "b", 1)],
            {"a": {"p"}, "b": set()},
            "a",
            ap={"p"},
        )
        ba = to_buchi(parse_ltl("F p"), ap={"p"})
        product = build_product(ts, ba)
        comps = accepting_sccs(product, "p")
        for comp in comps:
            for x in comp.states:
                assert comp.succ[x]  # members live on cycles

    def test_matches_brute_force_enumeration(self):
        rng = random.Random(31)
        checked = 0
        while checked < 12:
            ts = random_labeled_system(rng, n_states=5)
            try:
                product = build_product(ts, to_buchi(parse_ltl("G F a")))
            except EmptyProductError:
                continue
            plain = {x: set(row) for x, row in product.succ.items()}
            expected = {
                comp
                for comp in brute_force_sccs(product.states, plain)
                if comp & product.accepting
            }
            try:
                got = {c.states for c in accepting_sccs(product, "sur")}
            except UnsatisfiableError:
                got = set()
            assert got == expected
            checked += 1

    def test_components_disjoint_and_tail_confined(self):
        rng = random.Random(55)
        ts = random_labeled_system(rng)
        product = build_product(ts, to_buchi(parse_ltl("G F a")))
        comps = accepting_sccs(product, "sur")
        for i, a in enumerate(comps):
            for b in comps[i + 1 :]:
                assert not (a.states & b.states)
        # long random walks settle inside one component
        plain = {x: sorted(row) for x, row in product.succ.items()}
        walk = [product.initial]
        for _ in range(len(product.states) ** 2 + 10):
            walk.append(rng.choice(plain[walk[-1]]))
        tail = walk[len(walk) // 2 :]
        tail_set = set(tail)
        containing = [c for c in brute_force_sccs(product.states, {x: set(v) for x, v in plain.items()}) if tail_set <= c]
        assert containing

    def test_unsatisfiable_error(self):
        ts = TransitionSystem(
            ["a"], [("a", "a", 1)], {"a": set()}, "a", ap={"p"}
        )
        with pytest.raises((EmptyProductError, UnsatisfiableError)):
            product = build_product(ts, to_buchi(parse_ltl("G F p"), ap={"p"}))
            accepting_sccs(product, "p")


class TestDump:
    def test_document_shape(self):
        product = build_product(loop_system({"a", "sur"}), to_buchi(parse_ltl("G a")))
        doc = product_document(product)
        assert doc["format_version"] == 1
        assert set(doc) == {
            "format_version",
            "states",
            "ap",
            "labels",
            "transitions",
            "initial",
            "accepting",
        }
        assert doc["initial"] in doc["states"]
        assert set(doc["accepting"]) <= set(doc["states"])
