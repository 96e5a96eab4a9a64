"""Small deterministic graph routines shared across the package.

Graphs are adjacency maps node -> {successor: weight}.  Callers pass nodes in
a fixed order; every routine iterates in that order so results are stable.
"""

from __future__ import annotations

import heapq


def tarjan_scc(nodes, succ):
    """Strongly connected components, iteratively, in a deterministic order.

    Returns a list of tuples of nodes; each component's nodes are sorted and
    the components are ordered by their smallest node.
    """
    index_of = {}
    lowlink = {}
    on_stack = set()
    stack = []
    components = []
    counter = 0

    for root in nodes:
        if root in index_of:
            continue
        work = [(root, iter(sorted(succ.get(root, ()))))]
        index_of[root] = lowlink[root] = counter
        counter += 1
        stack.append(root)
        on_stack.add(root)
        while work:
            node, it = work[-1]
            advanced = False
            for nxt in it:
                if nxt not in index_of:
                    index_of[nxt] = lowlink[nxt] = counter
                    counter += 1
                    stack.append(nxt)
                    on_stack.add(nxt)
                    work.append((nxt, iter(sorted(succ.get(nxt, ())))))
                    advanced = True
                    break
                if nxt in on_stack:
                    lowlink[node] = min(lowlink[node], index_of[nxt])
            if advanced:
                continue
            work.pop()
            if work:
                parent = work[-1][0]
                lowlink[parent] = min(lowlink[parent], lowlink[node])
            if lowlink[node] == index_of[node]:
                comp = []
                while True:
                    member = stack.pop()
                    on_stack.discard(member)
                    comp.append(member)
                    if member == node:
                        break
                components.append(tuple(sorted(comp)))
    return sorted(components, key=lambda c: c[0])


def reverse_adjacency(succ):
    pred: dict = {}
    for s, row in succ.items():
        pred.setdefault(s, {})
        for t, w in row.items():
            pred.setdefault(t, {})[s] = w
    return pred


def dijkstra(adj, sources) -> dict:
    """Minimum weighted distance from the source set to every node."""
    dist = {}
    heap = []
    for s in sorted(sources):
        dist[s] = 0
        heapq.heappush(heap, (0, s))
    while heap:
        d, node = heapq.heappop(heap)
        if d > dist.get(node, d):
            continue
        for nxt, w in adj.get(node, {}).items():
            nd = d + w
            if nxt not in dist or nd < dist[nxt]:
                dist[nxt] = nd
                heapq.heappush(heap, (nd, nxt))
    return dist


def unweighted_distances(adj, sources) -> dict:
    """Minimum number of edges from the source set to every node (BFS)."""
    from collections import deque

    dist = {s: 0 for s in sources}
    queue = deque(sorted(sources))
    while queue:
        node = queue.popleft()
        d = dist[node] + 1
        for nxt in sorted(adj.get(node, ())):
            if nxt not in dist:
                dist[nxt] = d
                queue.append(nxt)
    return dist


def reachable_from(adj, source) -> set:
    seen = {source}
    stack = [source]
    while stack:
        node = stack.pop()
        for nxt in adj.get(node, ()):
            if nxt not in seen:
                seen.add(nxt)
                stack.append(nxt)
    return seen
