"""Sequential reference implementations used as ground truth.

These share the Graph container but none of the scheduler machinery, so they
can arbitrate engine results independently.
"""

from __future__ import annotations

import heapq
from math import inf

import numpy as np

from .errors import ParameterError
from .graph import Graph

__all__ = [
    "oracle_dijkstra",
    "oracle_bfs",
    "oracle_components",
    "oracle_pagerank_power",
]


def oracle_dijkstra(g: Graph, source: int) -> list[float]:
    """Binary-heap Dijkstra; unreachable vertices keep distance inf."""
    if g.weights is None:
        raise ParameterError("graph must be weighted")
    if g.m and g.weights.min() < 0:
        raise ParameterError("weights must be non-negative")
    offsets = g.out_offsets.tolist()
    targets = g.out_targets.tolist()
    weights = g.weights.tolist()
    dist = [inf] * g.n
    dist[source] = 0.0
    heap = [(0.0, source)]
    while heap:
        d, u = heapq.heappop(heap)
        if d > dist[u]:
            continue
        for i in range(offsets[u], offsets[u + 1]):
            v = targets[i]
            nd = d + weights[i]
            if nd < dist[v]:
                dist[v] = nd
                heapq.heappush(heap, (nd, v))
    return dist


def oracle_bfs(g: Graph, source: int) -> list[float]:
    """Queue BFS hop counts; unreachable vertices keep level inf."""
    from collections import deque

    offsets = g.out_offsets.tolist()
    targets = g.out_targets.tolist()
    level: list[float] = [inf] * g.n
    level[source] = 0
    queue = deque([source])
    while queue:
        u = queue.popleft()
        nl = level[u] + 1
        for i in range(offsets[u], offsets[u + 1]):
            v = targets[i]
            if level[v] == inf:
                level[v] = nl
                queue.append(v)
    return level


class _UnionFind:
    def __init__(self, n: int):
        self.parent = list(range(n))

    def find(self, x: int) -> int:
        root = x
        while self.parent[root] != root:
            root = self.parent[root]
        while self.parent[x] != root:
            self.parent[x], x = root, self.parent[x]
        return root

    def union(self, a: int, b: int) -> None:
        ra, rb = self.find(a), self.find(b)
        if ra != rb:
            # Keep the smaller id as the root so labels come out min-first.
            if rb < ra:
                ra, rb = rb, ra
            self.parent[rb] = ra


def oracle_components(g: Graph) -> list[int]:
    """Union-find labels: each vertex gets the smallest id in its component."""
    if g.directed:
        raise ParameterError("connected components require an undirected graph")
    uf = _UnionFind(g.n)
    srcs = np.repeat(np.arange(g.n, dtype=np.int64), np.diff(g.out_offsets))
    for u, v in zip(srcs.tolist(), g.out_targets.tolist()):
        uf.union(u, v)
    return [uf.find(v) for v in range(g.n)]


def oracle_pagerank_power(g: Graph, alpha: float, tol: float,
                          return_sweeps: bool = False):
    """Simultaneous (Jacobi) iteration of the rank fixed point from zeros.

    Each sweep recomputes every vertex from the previous sweep's values:
    ``rank'(v) = (1 - alpha) + alpha * sum(rank(u) / outdeg(u))`` over in-edges
    u -> v. Stops after the first sweep whose largest absolute change is below
    ``tol``. Vertices without out-edges contribute nothing (no residual
    redistribution), matching the runtime's treatment.
    """
    if not 0 < alpha < 1:
        raise ParameterError(f"alpha must be in (0, 1), got {alpha}")
    srcs = np.repeat(np.arange(g.n, dtype=np.int64), np.diff(g.out_offsets))
    outdeg = np.diff(g.out_offsets).astype(np.float64)
    rank = np.zeros(g.n)
    sweeps = 0
    while True:
        contrib = rank[srcs] / outdeg[srcs]
        in_sum = np.bincount(g.out_targets, weights=contrib, minlength=g.n)
        new_rank = (1.0 - alpha) + alpha * in_sum
        sweeps += 1
        delta = np.max(np.abs(new_rank - rank)) if g.n else 0.0
        rank = new_rank
        if delta < tol:
            break
    ranks = rank.tolist()
    if return_sweeps:
        return ranks, sweeps
    return ranks
