"""Translation of LTL formulas to Buchi automata and lasso acceptance checks.

The translation is the classic tableau construction: expand the formula into
a graph of obligation nodes, read off a generalized automaton with one
acceptance family per Until subformula, then degeneralize with a counter.
States that cannot reach an accepting cycle are dropped and behaviorally
identical states are merged; no further minimization is attempted.

Transitions carry guards (required / forbidden proposition sets) instead of
explicit alphabet letters.  Totality is restored at the end by routing
otherwise-stuck situations into a non-accepting sink.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass
from itertools import combinations

from . import ltl
from .graphs import tarjan_scc

_INIT = -1


@dataclass(frozen=True, order=True)
class Guard:
    """Conjunction of positive and negated propositions over one letter."""

    required: tuple[str, ...]
    forbidden: tuple[str, ...]

    def admits(self, letter) -> bool:
        return all(a in letter for a in self.required) and not any(
            a in letter for a in self.forbidden
        )

    def __str__(self):
        parts = list(self.required) + [f"!{a}" for a in self.forbidden]
        return " & ".join(parts) if parts else "true"


TRUE_GUARD = Guard((), ())


class BuchiAutomaton:
    """Nondeterministic Buchi automaton with guard-labeled transitions.

    States are integers, 0 is initial.  For every state and every letter at
    least one transition is enabled; when that required adding a rejecting
    sink, its id is recorded in `sink`.
    """

    def __init__(self, n_states, transitions, accepting, ap, sink=None):
        self.n_states: int = n_states
        self.initial: int = 0
        self.transitions: dict[int, tuple[tuple[Guard, int], ...]] = {
            q: tuple(transitions.get(q, ())) for q in range(n_states)
        }
        self.accepting: frozenset[int] = frozenset(accepting)
        self.ap: frozenset[str] = frozenset(ap)
        self.sink: int | None = sink

    @property
    def states(self) -> range:
        return range(self.n_states)

    def enabled(self, q: int, letter, include_sink: bool = False) -> list[int]:
        """Successor states on reading `letter`, in increasing order."""
        out = []
        for guard, dst in self.transitions[q]:
            if dst == self.sink and not include_sink:
                continue
            if guard.admits(letter) and dst not in out:
                out.append(dst)
        return sorted(out)

    @property
    def transition_count(self) -> int:
        return sum(len(v) for v in self.transitions.values())

    def __repr__(self):
        return (
            f"BuchiAutomaton({self.n_states} states, {self.transition_count} transitions, "
            f"{len(self.accepting)} accepting)"
        )


def _sort_key(f: ltl.Formula) -> str:
    return repr(f)


def _until_subformulas(f: ltl.Formula) -> list[ltl.Formula]:
    seen = set()
    out = []

    def walk(g):
        if g in seen:
            return
        seen.add(g)
        if isinstance(g, ltl.Until):
            out.append(g)
        if isinstance(g, (ltl.Not, ltl.Next)):
            walk(g.sub)
        elif isinstance(g, (ltl.And, ltl.Or, ltl.Until, ltl.Release)):
            walk(g.left)
            walk(g.right)

    walk(f)
    return sorted(out, key=_sort_key)


def _expand_tableau(root: ltl.Formula):
    """Obligation-node graph of the tableau construction.

    Returns (nodes, incoming) where nodes maps node id -> (old, next) frozen
    sets of formulas and incoming maps node id -> set of predecessor ids
    (_INIT marks the initial pseudo-state).
    """
    nodes: dict[tuple, int] = {}
    node_sets: dict[int, tuple[frozenset, frozenset]] = {}
    incoming: dict[int, set[int]] = {}
    queue: deque[tuple[frozenset, frozenset]] = deque()

    def covers(new_formulas) -> list[tuple[frozenset, frozenset]]:
        # Fully decompose a set of obligations into consistent (old, next)
        # alternatives; inconsistent branches are dropped.
        results = []
        stack = [(sorted(new_formulas, key=_sort_key), set(), set())]
        while stack:
            new, old, nxt = stack.pop()
            if not new:
                results.append((frozenset(old), frozenset(nxt)))
                continue
            eta = new[0]
            rest = new[1:]
            if isinstance(eta, ltl.FalseConst):
                continue
            if isinstance(eta, ltl.TrueConst):
                stack.append((rest, old, nxt))
                continue
            if isinstance(eta, (ltl.Atom, ltl.Not)):
                negated = eta.sub if isinstance(eta, ltl.Not) else ltl.Not(eta)
                if negated in old:
                    continue
                stack.append((rest, old | {eta}, nxt))
                continue
            if isinstance(eta, ltl.And):
                add = [g for g in (eta.left, eta.right) if g not in old]
                merged = sorted(set(rest) | set(add), key=_sort_key)
                stack.append((merged, old | {eta}, nxt))
                continue
            if isinstance(eta, ltl.Or):
                for branch in (eta.right, eta.left):
                    add = [] if branch in old else [branch]
                    merged = sorted(set(rest) | set(add), key=_sort_key)
                    stack.append((merged, old | {eta}, nxt))
                continue
            if isinstance(eta, ltl.Next):
                stack.append((rest, old | {eta}, nxt | {eta.sub}))
                continue
            if isinstance(eta, ltl.Until):
                # eta = l U r:  r  |  l and X(eta)
                add_now = [] if eta.right in old else [eta.right]
                stack.append((sorted(set(rest) | set(add_now), key=_sort_key), old | {eta}, nxt))
                add_cont = [] if eta.left in old else [eta.left]
                stack.append(
                    (sorted(set(rest) | set(add_cont), key=_sort_key), old | {eta}, nxt | {eta})
                )
                continue
            if isinstance(eta, ltl.Release):
                # eta = l R r:  r and l  |  r and X(eta)
                add_fin = [g for g in (eta.left, eta.right) if g not in old]
                stack.append((sorted(set(rest) | set(add_fin), key=_sort_key), old | {eta}, nxt))
                add_cont = [] if eta.right in old else [eta.right]
                stack.append(
                    (sorted(set(rest) | set(add_cont), key=_sort_key), old | {eta}, nxt | {eta})
                )
                continue
            raise TypeError(f"unexpected formula in tableau: {eta!r}")
        return results

    def attach(pred: int, new_formulas):
        for old, nxt in covers(new_formulas):
            key = (old, nxt)
            if key in nodes:
                incoming[nodes[key]].add(pred)
                continue
            node_id = len(node_sets)
            nodes[key] = node_id
            node_sets[node_id] = (old, nxt)
            incoming[node_id] = {pred}
            queue.append(node_id)

    attach(_INIT, {root})
    while queue:
        node_id = queue.popleft()
        attach(node_id, node_sets[node_id][1])

    return node_sets, incoming


def _literal_guard(old: frozenset) -> Guard:
    required = sorted(f.name for f in old if isinstance(f, ltl.Atom))
    forbidden = sorted(
        f.sub.name for f in old if isinstance(f, ltl.Not) and isinstance(f.sub, ltl.Atom)
    )
    return Guard(tuple(required), tuple(forbidden))


def _degeneralize(node_sets, incoming, untils):
    """Counter product over the until acceptance families.

    State (q, i) waits for family i; the counter advances when the source
    node fulfils family i, and acceptance is the wrap through family 0.
    """
    guards = {node: _literal_guard(old) for node, (old, _) in node_sets.items()}
    successors: dict[int, list[int]] = {q: [] for q in list(node_sets) + [_INIT]}
    for node, preds in incoming.items():
        for pred in preds:
            successors[pred].append(node)

    if not untils:
        fulfils = None
        k = 1
    else:
        fulfils = {}
        for node, (old, _) in node_sets.items():
            fulfils[node] = tuple(u not in old or u.right in old for u in untils)
        fulfils[_INIT] = tuple(True for _ in untils)
        k = len(untils)

    def advance(counter: int, source) -> int:
        if fulfils is None:
            return counter
        return (counter + 1) % k if fulfils[source][counter] else counter

    start = (_INIT, 0)
    trans: dict[tuple, list[tuple[Guard, tuple]]] = {}
    seen = {start}
    queue = deque([start])
    while queue:
        q, i = queue.popleft()
        j = advance(i, q)
        row = []
        for nxt in sorted(successors.get(q, ())):
            dst = (nxt, j)
            row.append((guards[nxt], dst))
            if dst not in seen:
                seen.add(dst)
                queue.append(dst)
        trans[(q, i)] = row

    if untils:
        accepting = {
            (q, i) for (q, i) in seen if i == 0 and q != _INIT and fulfils[q][0]
        }
    else:
        accepting = set(seen)
    return start, trans, accepting


def _prune_to_accepting_cycles(start, trans, accepting):
    """Keep the start plus states that can still reach an accepting cycle."""
    succ_plain = {q: {dst for _, dst in row} for q, row in trans.items()}
    order = sorted(succ_plain)
    live_cores = set()
    for comp in tarjan_scc(order, succ_plain):
        members = set(comp)
        nontrivial = len(comp) > 1 or any(
            q in succ_plain.get(q, ()) for q in comp
        )
        if nontrivial and members & accepting:
            live_cores |= members
    # backward closure towards the cores
    pred: dict = {}
    for q, row in succ_plain.items():
        for dst in row:
            pred.setdefault(dst, set()).add(q)
    keep = set(live_cores)
    queue = deque(live_cores)
    while queue:
        q = queue.popleft()
        for p in pred.get(q, ()):
            if p not in keep:
                keep.add(p)
                queue.append(p)
    keep.add(start)
    pruned = {
        q: [(g, dst) for g, dst in row if dst in keep]
        for q, row in trans.items()
        if q in keep
    }
    return pruned, accepting & keep


def _bisimulation_quotient(start, trans, accepting):
    """Merge states with identical acceptance and successor behavior."""
    states = sorted(trans)
    block = {q: (q in accepting) for q in states}
    while True:
        signature = {
            q: (block[q], frozenset((g, block[dst]) for g, dst in trans[q]))
            for q in states
        }
        mapping = {}
        for q in states:
            mapping.setdefault(signature[q], len(mapping))
        new_block = {q: mapping[signature[q]] for q in states}
        if all(
            (new_block[a] == new_block[b]) == (block[a] == block[b])
            for a, b in combinations(states, 2)
        ):
            block = new_block
            break
        block = new_block
    rep = {}
    for q in states:
        rep.setdefault(block[q], q)
    remap = {q: rep[block[q]] for q in states}
    merged = {}
    for q in states:
        r = remap[q]
        if r in merged:
            continue
        merged[r] = sorted({(g, remap[dst]) for g, dst in trans[q]})
    return remap[start], merged, {remap[q] for q in accepting if remap[q] in merged}


def _renumber(start, trans, accepting):
    order = {start: 0}
    queue = deque([start])
    while queue:
        q = queue.popleft()
        for _, dst in trans[q]:
            if dst not in order:
                order[dst] = len(order)
                queue.append(dst)
    out = {
        order[q]: tuple(sorted((g, order[dst]) for g, dst in row))
        for q, row in trans.items()
        if q in order
    }
    return len(order), out, {order[q] for q in accepting if q in order}


def _letters(ap):
    props = sorted(ap)
    for mask in range(1 << len(props)):
        yield frozenset(p for i, p in enumerate(props) if mask >> i & 1)


def _complete(n_states, trans, ap):
    """Add a rejecting sink wherever some letter has no enabled transition."""
    incomplete = []
    for q in range(n_states):
        row = trans.get(q, ())
        for letter in _letters(ap):
            if not any(g.admits(letter) for g, _ in row):
                incomplete.append(q)
                break
    if not incomplete:
        return n_states, trans, None
    sink = n_states
    out = {q: list(trans.get(q, ())) for q in range(n_states)}
    for q in incomplete:
        out[q].append((TRUE_GUARD, sink))
    out[sink] = [(TRUE_GUARD, sink)]
    return n_states + 1, {q: tuple(v) for q, v in out.items()}, sink


def to_buchi(formula: ltl.Formula | str, ap=None) -> BuchiAutomaton:
    """Build a Buchi automaton accepting exactly the words satisfying `formula`."""
    if isinstance(formula, str):
        formula = ltl.parse_ltl(formula)
    alphabet = frozenset(ap) if ap is not None else ltl.atoms(formula)
    nnf = ltl.negation_normal_form(formula)
    untils = _until_subformulas(nnf)
    node_sets, incoming = _expand_tableau(nnf)
    start, trans, accepting = _degeneralize(node_sets, incoming, untils)
    trans, accepting = _prune_to_accepting_cycles(start, trans, accepting)
    start, trans, accepting = _bisimulation_quotient(start, trans, accepting)
    n_states, trans, accepting = _renumber(start, trans, accepting)
    n_states, trans, sink = _complete(n_states, trans, ltl.atoms(formula))
    return BuchiAutomaton(n_states, trans, accepting, alphabet, sink=sink)


def lasso_accepts(ba: BuchiAutomaton, prefix, cycle) -> bool:
    """Whether some automaton run over prefix . cycle^omega is accepting.

    Decided on the product of the automaton with the lasso's position graph:
    accepting iff a reachable cycle of the product touches an accepting state.
    """
    cycle = [frozenset(a) for a in cycle]
    prefix = [frozenset(a) for a in prefix]
    if not cycle:
        raise ValueError("the cycle part of a lasso must be non-empty")
    word = prefix + cycle
    n = len(word)
    loop = len(prefix)

    def succ_pos(i: int) -> int:
        return i + 1 if i + 1 < n else loop

    adj: dict[tuple[int, int], set[tuple[int, int]]] = {}
    start = (ba.initial, 0)
    queue = deque([start])
    seen = {start}
    enabled_cache: dict[tuple[int, int], tuple[int, ...]] = {}
    while queue:
        q, pos = queue.popleft()
        key = (q, pos)
        if key not in enabled_cache:
            enabled_cache[key] = tuple(ba.enabled(q, word[pos]))
        nxt_pos = succ_pos(pos)
        targets = {(q2, nxt_pos) for q2 in enabled_cache[key]}
        adj[(q, pos)] = targets
        for t in targets:
            if t not in seen:
                seen.add(t)
                queue.append(t)

    for comp in tarjan_scc(sorted(seen), adj):
        members = set(comp)
        nontrivial = len(comp) > 1 or any(m in adj.get(m, ()) for m in comp)
        if nontrivial and any(q in ba.accepting for q, _ in comp):
            return True
    return False
