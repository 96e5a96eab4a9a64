"""Independent brute-force oracles used to cross-check the real algorithms.

Everything here is deliberately naive: direct definitions, exhaustive
enumeration, no sharing with the implementations under test.
"""

from fractions import Fraction
from itertools import product as iproduct


def bellman_ford_all_pairs(states, edges):
    """All-pairs minimum path weights by repeated relaxation.

    `edges` is an iterable of (src, dst, weight).  Self distances are 0.
    """
    dist = {(s, s): 0 for s in states}
    edge_list = list(edges)
    for _ in range(len(states)):
        changed = False
        for s in states:
            for u, v, w in edge_list:
                du = dist.get((s, u))
                if du is None:
                    continue
                cand = du + w
                if u == v:
                    continue
                cur = dist.get((s, v))
                if cur is None or cand < cur:
                    dist[(s, v)] = cand
                    changed = True
        if not changed:
            break
    return dist


def elementary_cycles(nodes, succ):
    """Every elementary cycle, each reported once, rooted at its smallest node."""
    order = {n: i for i, n in enumerate(sorted(nodes))}
    cycles = []

    def extend(root, path, on_path):
        for nxt in sorted(succ.get(path[-1], ())):
            if nxt == root:
                cycles.append(tuple(path))
            elif nxt not in on_path and order[nxt] > order[root]:
                path.append(nxt)
                on_path.add(nxt)
                extend(root, path, on_path)
                on_path.discard(nxt)
                path.pop()

    for root in sorted(nodes):
        extend(root, [root], {root})
    return cycles


def min_mean_cycle_brute(nodes, weights):
    """Exact minimum cycle mean via full elementary cycle enumeration."""
    succ = {}
    for (u, v) in weights:
        succ.setdefault(u, set()).add(v)
    best = None
    for cyc in elementary_cycles(nodes, succ):
        total = sum(
            (Fraction(weights[(cyc[i], cyc[(i + 1) % len(cyc)])]) for i in range(len(cyc))),
            Fraction(0),
        )
        mean = total / len(cyc)
        if best is None or mean < best:
            best = mean
    return best


def best_cycle_ratio_brute(nodes, succ, expected, surveillance):
    """Minimum over elementary cycles of sum(expected) / #surveillance states."""
    best = None
    for cyc in elementary_cycles(nodes, succ):
        sur = sum(1 for x in cyc if x in surveillance)
        if sur == 0:
            continue
        total = sum((Fraction(expected[x]) for x in cyc), Fraction(0))
        ratio = total / sur
        if best is None or ratio < best:
            best = ratio
    return best


def one_cycle_min_penalty(component_states, succ, expected, surveillance, u, v):
    """Minimum summed expected penalty over runs u -> v whose interior stays
    off surveillance states and never repeats a state (endpoint excluded)."""
    best = None

    def walk(node, seen, acc):
        nonlocal best
        for nxt in sorted(succ.get(node, ())):
            if nxt == v:
                cand = acc
                if best is None or cand < best:
                    best = cand
            elif nxt not in seen and nxt not in surveillance:
                walk(nxt, seen | {nxt}, acc + expected[nxt])

    walk(u, {u}, Fraction(expected[u]))
    return best


def penalty_expectation_brute(rate, p, start_level, steps):
    """E[level/r after `steps`] by enumerating every reset decision path."""
    p = Fraction(p)
    total = Fraction(0)

    def advance(level, remaining, prob):
        nonlocal total
        if remaining == 0:
            total += prob * Fraction(level, rate)
            return
        if level < rate:
            advance(level + 1, remaining - 1, prob)
        else:
            advance(rate, remaining - 1, prob * p)
            advance(0, remaining - 1, prob * (1 - p))

    advance(start_level, steps, Fraction(1))
    return total


def count_cycles_scan(sur_states, run):
    complete = 0
    for s in run[1:]:
        if s in sur_states:
            complete += 1
    return complete if run[-1] in sur_states else complete + 1


def all_letters(props):
    props = sorted(props)
    for bits in iproduct((False, True), repeat=len(props)):
        yield frozenset(p for p, b in zip(props, bits) if b)
