"""Per-surveillance-cycle reduction of an accepting component and the
minimum mean cycle over it.

The reduction eliminates non-surveillance states one by one, keeping for
every ordered pair of surviving states the cheapest known run (by summed
expected penalty) that completes exactly one surveillance cycle.  Karp's
dynamic program then finds the cycle of reduced edges with the smallest mean
weight, which is exactly the best achievable expected average penalty per
surveillance cycle.  All weights are exact rationals, so results are
reproducible bit for bit.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction


@dataclass(frozen=True)
class ReducedSystem:
    """Surveillance states with one-cycle connecting runs.

    `weight[(u, v)]` is the summed expected penalty of `run_map[(u, v)]`,
    which starts at u, stays off surveillance states in between, and stops
    just before v.
    """

    states: tuple
    weight: dict
    run_map: dict


@dataclass(frozen=True)
class OptimalCycle:
    """Witness cycle for the best per-surveillance-cycle average.

    The closing transition back to the first state is implicit.  The mean of
    expected penalties over the cycle, divided by the number of surveillance
    visits on it, equals `appc_value`.
    """

    appc_value: Fraction
    cycle: tuple
    surveillance_positions: tuple


def reduce_ascc(component, expected: dict) -> ReducedSystem:
    """Eliminate non-surveillance states from an accepting component.

    `expected` maps each component state to its expected penalty.  States are
    eliminated in lexicographic order; when two candidate runs for the same
    pair tie on summed expected penalty, the newer one wins.
    """
    if not component.surveillance:
        raise ValueError("component has no surveillance states")
    edges: dict[tuple, tuple[Fraction, tuple]] = {}
    for u in sorted(component.states):
        for v in component.succ[u]:
            edges[(u, v)] = (Fraction(expected[u]), (u,))

    for x in sorted(component.states - component.surveillance):
        into = sorted(
            (u, edges[(u, x)]) for (u, t) in edges if t == x and u != x
        )
        out_of = sorted(
            (v, edges[(x, v)]) for (s, v) in edges if s == x and v != x
        )
        for u, (w_in, run_in) in into:
            for v, (w_out, run_out) in out_of:
                candidate = (w_in + w_out, run_in + run_out)
                current = edges.get((u, v))
                if current is None or candidate[0] <= current[0]:
                    edges[(u, v)] = candidate
        edges = {pair: val for pair, val in edges.items() if x not in pair}

    states = tuple(sorted(component.surveillance))
    return ReducedSystem(
        states,
        {pair: val[0] for pair, val in edges.items()},
        {pair: val[1] for pair, val in edges.items()},
    )


def karp_min_mean(states, weights: dict) -> tuple[Fraction, tuple]:
    """Minimum mean cycle of a strongly connected weighted digraph.

    Returns the exact minimum of (total weight / edge count) over all cycles
    together with a witness cycle, normalized to start at its smallest state
    and, among equal rotations, lexicographically smallest.
    """
    order = tuple(sorted(states))
    n = len(order)
    if n == 0 or not weights:
        raise ValueError("graph has no cycle")
    source = order[0]

    by_target: dict = {}
    for (u, v), w in weights.items():
        by_target.setdefault(v, []).append((u, Fraction(w)))
    for v in by_target:
        by_target[v].sort()

    # best[k][v]: minimum weight of a walk with exactly k edges from source
    best: list[dict] = [{source: Fraction(0)}]
    back: list[dict] = [{}]
    for k in range(1, n + 1):
        row: dict = {}
        prev_row: dict = {}
        prev = best[k - 1]
        for v, incoming in by_target.items():
            for u, w in incoming:
                if u not in prev:
                    continue
                cand = prev[u] + w
                if v not in row or cand < row[v] or (cand == row[v] and u < prev_row[v]):
                    row[v] = cand
                    prev_row[v] = u
        best.append(row)
        back.append(prev_row)

    final = best[n]
    mean = None
    argmin = None
    for v in order:
        if v not in final:
            continue
        worst = None
        for k in range(n):
            if v not in best[k]:
                continue
            ratio = (final[v] - best[k][v]) / (n - k)
            if worst is None or ratio > worst:
                worst = ratio
        if worst is None:
            continue
        if mean is None or worst < mean:
            mean = worst
            argmin = v
    if mean is None:
        raise ValueError("graph has no cycle")

    # The n-edge walk realizing best[n][argmin] carries a cycle of mean weight.
    walk = [argmin]
    node = argmin
    for k in range(n, 0, -1):
        node = back[k][node]
        walk.append(node)
    walk.reverse()

    witnesses = []
    for cyc in _elementary_cycles_on_walk(walk):
        total = sum(
            (weights[(cyc[i], cyc[(i + 1) % len(cyc)])] for i in range(len(cyc))),
            Fraction(0),
        )
        if Fraction(total, len(cyc)) == mean:
            witnesses.append(_normalize_rotation(cyc))
    if not witnesses:
        raise AssertionError("walk carried no cycle of minimum mean weight")
    return mean, min(witnesses)


def _elementary_cycles_on_walk(walk):
    path = []
    position: dict = {}
    cycles = []
    for node in walk:
        if node in position:
            i = position[node]
            cycles.append(tuple(path[i:]))
            for dropped in path[i + 1 :]:
                del position[dropped]
            del path[i + 1 :]
        else:
            position[node] = len(path)
            path.append(node)
    return cycles


def _normalize_rotation(cycle):
    rotations = [tuple(cycle[i:]) + tuple(cycle[:i]) for i in range(len(cycle))]
    return min(rotations)


def optimal_cycle(component, reduced: ReducedSystem) -> OptimalCycle:
    """Expand a minimum mean cycle of the reduced graph back into the
    component, concatenating the stored connecting runs.

    Among cycles attaining the minimum, one whose expansion visits an
    accepting state is preferred (the controller then needs no separate
    detour to the accepting set), then shorter expansions, then the
    lexicographically smallest.  The preference search enumerates elementary
    cycles of the reduced graph and falls back to the dynamic-programming
    witness when that blows up.
    """
    mean, fallback = karp_min_mean(reduced.states, reduced.weight)

    def expand(cyc):
        out: list = []
        for i, u in enumerate(cyc):
            out.extend(reduced.run_map[(u, cyc[(i + 1) % len(cyc)])])
        return tuple(out)

    chosen = None
    candidates = _elementary_cycles_capped(reduced, cap=20_000)
    if candidates is not None:
        best_key = None
        for cyc in candidates:
            total = sum(
                (reduced.weight[(cyc[i], cyc[(i + 1) % len(cyc)])] for i in range(len(cyc))),
                Fraction(0),
            )
            if Fraction(total, len(cyc)) != mean:
                continue
            expanded = expand(_normalize_rotation(cyc))
            accepting = any(x in component.accepting for x in expanded)
            key = (not accepting, len(expanded), expanded)
            if best_key is None or key < best_key:
                best_key = key
                chosen = expanded
    if chosen is None:
        chosen = expand(fallback)
    positions = tuple(i for i, x in enumerate(chosen) if x in component.surveillance)
    return OptimalCycle(mean, chosen, positions)


def _elementary_cycles_capped(reduced: ReducedSystem, cap: int):
    succ: dict = {}
    for (u, v) in reduced.weight:
        succ.setdefault(u, set()).add(v)
    order = {n: i for i, n in enumerate(sorted(reduced.states))}
    cycles = []
    budget = cap

    def extend(root, path, on_path):
        nonlocal budget
        if budget <= 0:
            return False
        for nxt in sorted(succ.get(path[-1], ())):
            budget -= 1
            if budget <= 0:
                return False
            if nxt == root:
                cycles.append(tuple(path))
            elif nxt not in on_path and order[nxt] > order[root]:
                path.append(nxt)
                on_path.add(nxt)
                if not extend(root, path, on_path):
                    return False
                on_path.discard(nxt)
                path.pop()
        return True

    for root in sorted(reduced.states):
        if not extend(root, [root], {root}):
            return None
    return cycles
