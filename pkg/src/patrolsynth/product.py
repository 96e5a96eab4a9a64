"""Product of an initialized transition system with a Buchi automaton.

Product states are (system state, automaton state) pairs.  Only the fragment
reachable from the initial pair is built, and states left without successors
are removed to a fixpoint, so a strategy over the product always has a move
and never commits to an unrepairable violation.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass, field

from .graphs import dijkstra, reachable_from, reverse_adjacency, tarjan_scc


class EmptyProductError(Exception):
    """The specification admits no run at all from the initial state."""


class UnsatisfiableError(Exception):
    """No reachable accepting component; the specification cannot be met."""


class Product:
    def __init__(self, ts, ba, states, succ, initial):
        self.ts = ts
        self.ba = ba
        self.states: tuple = tuple(sorted(states))
        self.succ: dict = {s: dict(sorted(succ[s].items())) for s in self.states}
        self.initial = initial
        self.accepting: frozenset = frozenset(
            x for x in self.states if x[1] in ba.accepting
        )
        self._pred = None

    @property
    def pred(self) -> dict:
        if self._pred is None:
            self._pred = reverse_adjacency(self.succ)
        return self._pred

    def successors(self, x) -> tuple:
        return tuple(self.succ[x])

    def weight(self, x, y) -> int:
        return self.succ[x][y]

    def label(self, x) -> frozenset:
        return self.ts.label(x[0])

    def has_transition(self, x, y) -> bool:
        return y in self.succ.get(x, ())

    @property
    def transition_count(self) -> int:
        return sum(len(row) for row in self.succ.values())

    def distance_to(self, targets) -> dict:
        """Minimum weighted distance from every state to the target set."""
        return dijkstra(self.pred, [t for t in targets if t in self.succ])

    def __repr__(self):
        return (
            f"Product({len(self.states)} states, {self.transition_count} transitions, "
            f"{len(self.accepting)} accepting)"
        )


def build_product(ts, ba) -> Product:
    """Synchronize `ts` with `ba`, reading the source state's label per move.

    Transitions into the automaton's rejecting sink are not materialized: a
    branch that has entered the sink can never satisfy the acceptance
    condition, so it contributes nothing.
    """
    initial = (ts.initial, ba.initial)
    succ: dict = {}
    queue = deque([initial])
    seen = {initial}
    while queue:
        s, q = queue.popleft()
        letter = ts.label(s)
        row = {}
        for q2 in ba.enabled(q, letter):
            for s2 in ts.successors(s):
                row[(s2, q2)] = ts.weight(s, s2)
        succ[(s, q)] = row
        for nxt in row:
            if nxt not in seen:
                seen.add(nxt)
                queue.append(nxt)

    # Remove dead ends, then re-restrict to the reachable part, to a fixpoint.
    while True:
        dead = [x for x, row in succ.items() if not row]
        if dead:
            dead_set = set(dead)
            succ = {
                x: {y: w for y, w in row.items() if y not in dead_set}
                for x, row in succ.items()
                if x not in dead_set
            }
            if initial not in succ:
                raise EmptyProductError(
                    "the specification admits no run from the initial state"
                )
            continue
        reachable = reachable_from(succ, initial)
        if len(reachable) != len(succ):
            succ = {
                x: {y: w for y, w in row.items() if y in reachable}
                for x, row in succ.items()
                if x in reachable
            }
            continue
        break

    if not succ:
        raise EmptyProductError("the specification admits no run from the initial state")
    return Product(ts, ba, succ.keys(), succ, initial)


def validate_product_run(product: Product, run) -> None:
    if not run:
        raise ValueError("a finite run must contain at least one state")
    for x in run:
        if x not in product.succ:
            raise ValueError(f"run visits unknown product state {x!r}")
    for a, b in zip(run, run[1:]):
        if not product.has_transition(a, b):
            raise ValueError(f"({a!r}, {b!r}) is not a product transition")


def project_run(product: Product, run) -> tuple:
    """First-component projection; a valid run of the underlying system."""
    validate_product_run(product, run)
    return tuple(x[0] for x in run)


@dataclass(frozen=True)
class AcceptingComponent:
    """A reachable strongly connected component containing accepting states.

    Carries the full internal transition structure, its accepting states, and
    its surveillance-labeled states.  Components without surveillance states
    cannot host a per-cycle optimum and are skipped by the synthesizer.
    """

    states: frozenset
    succ: dict = field(hash=False)
    accepting: frozenset
    surveillance: frozenset

    @property
    def min_state(self):
        return min(self.states)


def accepting_sccs(product: Product, surveillance_prop: str) -> list[AcceptingComponent]:
    """All accepting strongly connected components, smallest state first.

    Single states only count with a self-loop; an accepting state sitting in
    a transient position belongs to no component.  Raises when there is none.
    """
    plain = {x: set(row) for x, row in product.succ.items()}
    components = []
    for comp in tarjan_scc(product.states, plain):
        members = frozenset(comp)
        nontrivial = len(comp) > 1 or any(x in plain[x] for x in comp)
        if not nontrivial:
            continue
        accepting = members & product.accepting
        if not accepting:
            continue
        restricted = {
            x: {y: w for y, w in product.succ[x].items() if y in members} for x in comp
        }
        surveillance = frozenset(
            x for x in comp if surveillance_prop in product.label(x)
        )
        components.append(
            AcceptingComponent(members, restricted, accepting, surveillance)
        )
    if not components:
        raise UnsatisfiableError("no reachable accepting component")
    return sorted(components, key=lambda c: c.min_state)


def product_document(product: Product) -> dict:
    """JSON-ready graph dump mirroring the model format, plus acceptance."""

    def key(x):
        return f"{x[0]}|{x[1]}"

    return {
        "format_version": 1,
        "states": [key(x) for x in product.states],
        "ap": sorted(product.ts.ap),
        "labels": {key(x): sorted(product.label(x)) for x in product.states},
        "transitions": [
            [key(x), key(y), w]
            for x in product.states
            for y, w in product.succ[x].items()
        ],
        "initial": key(product.initial),
        "accepting": sorted(key(x) for x in product.accepting),
    }
