"""Graph storage, loading, generation, and vertex ownership.

Graphs are immutable compressed-sparse-row adjacency structures. Vertices are
dense 0-based integers; parallel edges and self-loops are kept as given.
Ownership maps each vertex to one of R simulated ranks under a block or
cyclic 1D policy.
"""

from __future__ import annotations

from dataclasses import dataclass, replace
from typing import IO, Iterable

import numpy as np

from .errors import GraphFormatError, ParameterError, ValidationError

__all__ = [
    "Graph",
    "Distribution",
    "owner",
    "load_edge_list",
    "load_dimacs",
    "generate_random",
    "transpose",
    "validate_graph",
]

# Vertices are plain non-negative ints below the owning graph's vertex count.
VertexId = int


@dataclass(eq=False)
class Graph:
    """CSR adjacency; arrays are frozen (non-writeable) after construction.

    ``out_offsets``/``out_targets`` always describe the forward adjacency.
    ``in_offsets``/``in_targets`` hold the reversed adjacency and are only
    populated on demand (see :meth:`with_in_edges`); ``weights`` aligns with
    ``out_targets`` and is ``None`` for unweighted graphs.
    """

    n: int
    m: int
    out_offsets: np.ndarray
    out_targets: np.ndarray
    weights: np.ndarray | None = None
    in_offsets: np.ndarray | None = None
    in_targets: np.ndarray | None = None
    directed: bool = True

    def __post_init__(self):
        for arr in (self.out_offsets, self.out_targets, self.weights,
                    self.in_offsets, self.in_targets):
            if arr is not None:
                arr.setflags(write=False)

    def out_degree(self, v: VertexId) -> int:
        return int(self.out_offsets[v + 1] - self.out_offsets[v])

    def out_neighbors(self, v: VertexId) -> np.ndarray:
        return self.out_targets[self.out_offsets[v]:self.out_offsets[v + 1]]

    @property
    def has_in_edges(self) -> bool:
        return self.in_offsets is not None

    def with_in_edges(self) -> Graph:
        """Return a graph that also carries the reversed adjacency.

        Returns ``self`` when it is already present; otherwise a shallow copy
        sharing the forward arrays.
        """
        if self.has_in_edges:
            return self
        t = transpose(self)
        return replace(self, in_offsets=t.out_offsets, in_targets=t.out_targets)


@dataclass(frozen=True)
class Distribution:
    """1D vertex ownership over ``ranks`` simulated ranks.

    ``block`` splits [0, n) into contiguous ranges whose sizes differ by at
    most one; ``cyclic`` assigns vertex v to rank v mod ranks.
    """

    ranks: int
    policy: str  # "block" | "cyclic"
    n: int

    def __post_init__(self):
        if self.ranks < 1:
            raise ParameterError("ranks must be >= 1")
        if self.policy not in ("block", "cyclic"):
            raise ParameterError(f"unknown distribution policy {self.policy!r}")
        if self.n < 0:
            raise ParameterError("vertex count must be non-negative")

    def owner_fn(self):
        """Return a fast ``vertex -> rank`` callable for this distribution."""
        r = self.ranks
        if self.policy == "cyclic":
            return lambda v: v % r
        q, rem = divmod(self.n, r)
        split = rem * (q + 1)
        if q == 0:
            # More ranks than vertices: vertex v lives on rank v.
            return lambda v: v
        return lambda v: v // (q + 1) if v < split else rem + (v - split) // q


def owner(d: Distribution, v: VertexId) -> int:
    """Rank that owns vertex ``v`` under distribution ``d``."""
    if not 0 <= v < d.n:
        raise ParameterError(f"vertex {v} out of range [0, {d.n})")
    return d.owner_fn()(v)


def _csr_from_edges(n: int, srcs: np.ndarray, dsts: np.ndarray,
                    wts: np.ndarray | None, directed: bool) -> Graph:
    order = np.argsort(srcs, kind="stable")
    targets = dsts[order].astype(np.int64)
    offsets = np.zeros(n + 1, dtype=np.int64)
    np.cumsum(np.bincount(srcs, minlength=n), out=offsets[1:])
    weights = wts[order].astype(np.float64) if wts is not None else None
    g = Graph(n=n, m=len(targets), out_offsets=offsets, out_targets=targets,
              weights=weights, directed=directed)
    validate_graph(g)
    return g


def load_edge_list(stream: IO[str] | Iterable[str], directed: bool = True,
                   weighted: bool = False) -> Graph:
    """Parse a whitespace-separated edge list into a graph.

    Lines are ``u v`` (or ``u v w`` when ``weighted``); ``#`` starts a comment
    line. Vertex count is 1 + the largest id seen; gaps become isolated
    vertices. Undirected input is mirrored edge-by-edge (self-loops included),
    so the CSR holds both directions of every line.
    """
    srcs: list[int] = []
    dsts: list[int] = []
    wts: list[float] = []
    max_id = -1
    for lineno, raw in enumerate(stream, start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        parts = line.split()
        if weighted and len(parts) != 3:
            raise GraphFormatError("expected 'u v w'", lineno)
        if not weighted and len(parts) not in (2, 3):
            raise GraphFormatError("expected 'u v'", lineno)
        try:
            u, v = int(parts[0]), int(parts[1])
        except ValueError:
            raise GraphFormatError(f"bad vertex id in {line!r}", lineno) from None
        if u < 0 or v < 0:
            raise GraphFormatError("vertex ids must be non-negative", lineno)
        if weighted:
            try:
                w = float(parts[2])
            except ValueError:
                raise GraphFormatError(f"bad weight in {line!r}", lineno) from None
            if not np.isfinite(w) or w < 0:
                raise ValidationError(f"line {lineno}: weight must be finite and >= 0, got {w}")
        else:
            w = 1.0
        srcs.append(u)
        dsts.append(v)
        wts.append(w)
        if not directed:
            srcs.append(v)
            dsts.append(u)
            wts.append(w)
        max_id = max(max_id, u, v)
    n = max_id + 1
    return _csr_from_edges(n, np.asarray(srcs, dtype=np.int64),
                           np.asarray(dsts, dtype=np.int64),
                           np.asarray(wts, dtype=np.float64), directed)


def load_dimacs(stream: IO[str] | Iterable[str]) -> Graph:
    """Parse the DIMACS shortest-path format ("p sp" header, "a" arc lines).

    Ids are converted from 1-based to 0-based. The arc count declared in the
    header must match the number of arc lines. The result is directed and
    weighted.
    """
    n = None
    declared_m = 0
    srcs: list[int] = []
    dsts: list[int] = []
    wts: list[float] = []
    for lineno, raw in enumerate(stream, start=1):
        line = raw.strip()
        if not line or line.startswith("c"):
            continue
        parts = line.split()
        if parts[0] == "p":
            if n is not None:
                raise GraphFormatError("duplicate problem header", lineno)
            if len(parts) != 4 or parts[1] != "sp":
                raise GraphFormatError("expected 'p sp <n> <m>'", lineno)
            try:
                n, declared_m = int(parts[2]), int(parts[3])
            except ValueError:
                raise GraphFormatError("bad counts in problem header", lineno) from None
            if n < 0 or declared_m < 0:
                raise GraphFormatError("counts must be non-negative", lineno)
        elif parts[0] == "a":
            if n is None:
                raise GraphFormatError("arc before problem header", lineno)
            if len(parts) != 4:
                raise GraphFormatError("expected 'a <u> <v> <w>'", lineno)
            try:
                u, v, w = int(parts[1]), int(parts[2]), float(parts[3])
            except ValueError:
                raise GraphFormatError(f"bad arc {line!r}", lineno) from None
            if not 1 <= u <= n or not 1 <= v <= n:
                raise GraphFormatError(f"arc endpoint out of [1, {n}]", lineno)
            if not np.isfinite(w) or w < 0:
                raise ValidationError(f"line {lineno}: weight must be finite and >= 0, got {w}")
            srcs.append(u - 1)
            dsts.append(v - 1)
            wts.append(w)
        else:
            raise GraphFormatError(f"unknown line type {parts[0]!r}", lineno)
    if n is None:
        raise GraphFormatError("missing 'p sp' header")
    if len(srcs) != declared_m:
        raise GraphFormatError(
            f"header declares {declared_m} arcs but {len(srcs)} were read")
    return _csr_from_edges(n, np.asarray(srcs, dtype=np.int64),
                           np.asarray(dsts, dtype=np.int64),
                           np.asarray(wts, dtype=np.float64), directed=True)


def generate_random(n: int, p: float, seed: int,
                    weight_range: tuple[float, float] | None = None,
                    directed: bool = True) -> Graph:
    """Erdős–Rényi G(n, p) without self-loops, reproducible from ``seed``.

    Edge structure depends only on (n, p, seed, directed), so the weighted and
    unweighted variants of the same seed share their topology. Weights are
    uniform over ``weight_range`` and equal on the two halves of an
    undirected edge.
    """
    if not 0 <= p <= 1:
        raise ParameterError(f"edge probability must be in [0, 1], got {p}")
    if weight_range is not None:
        lo, hi = weight_range
        if lo < 0 or lo > hi:
            raise ParameterError(f"need 0 <= lo <= hi, got [{lo}, {hi}]")
    rng = np.random.default_rng(seed)
    src_parts: list[np.ndarray] = []
    dst_parts: list[np.ndarray] = []
    if directed:
        for u in range(n):
            mask = rng.random(n) < p
            mask[u] = False
            targets = np.flatnonzero(mask)
            src_parts.append(np.full(len(targets), u, dtype=np.int64))
            dst_parts.append(targets)
    else:
        for u in range(n):
            mask = rng.random(n - u - 1) < p
            targets = np.flatnonzero(mask) + u + 1
            src_parts.append(np.full(len(targets), u, dtype=np.int64))
            dst_parts.append(targets)
    srcs = np.concatenate(src_parts) if src_parts else np.zeros(0, dtype=np.int64)
    dsts = np.concatenate(dst_parts) if dst_parts else np.zeros(0, dtype=np.int64)
    wts = None
    if weight_range is not None:
        wts = rng.uniform(weight_range[0], weight_range[1], size=len(srcs))
    if not directed:
        srcs, dsts = np.concatenate([srcs, dsts]), np.concatenate([dsts, srcs])
        if wts is not None:
            wts = np.concatenate([wts, wts])
    return _csr_from_edges(n, srcs, dsts, wts, directed)


def transpose(g: Graph) -> Graph:
    """Graph whose forward adjacency is ``g``'s reversed adjacency.

    Weights travel with their edge. Within each target bucket, sources appear
    in ascending order (stable on the input edge order), which fixes the
    in-edge traversal order used throughout the package.
    """
    order = np.argsort(g.out_targets, kind="stable")
    srcs = np.repeat(np.arange(g.n, dtype=np.int64), np.diff(g.out_offsets))
    targets = srcs[order]
    offsets = np.zeros(g.n + 1, dtype=np.int64)
    np.cumsum(np.bincount(g.out_targets, minlength=g.n), out=offsets[1:])
    weights = g.weights[order] if g.weights is not None else None
    return Graph(n=g.n, m=g.m, out_offsets=offsets, out_targets=targets,
                 weights=weights, directed=g.directed)


def validate_graph(g: Graph) -> None:
    """Raise :class:`ValidationError` unless the CSR invariants hold."""
    off = g.out_offsets
    if len(off) != g.n + 1 or off[0] != 0 or off[-1] != g.m:
        raise ValidationError("offset array endpoints are inconsistent")
    if np.any(np.diff(off) < 0):
        raise ValidationError("offsets must be non-decreasing")
    if len(g.out_targets) != g.m:
        raise ValidationError("target array length differs from edge count")
    if g.m and (g.out_targets.min() < 0 or g.out_targets.max() >= g.n):
        raise ValidationError("edge target out of range")
    if g.weights is not None:
        if len(g.weights) != g.m:
            raise ValidationError("weight array length differs from edge count")
        if g.m and (not np.all(np.isfinite(g.weights)) or g.weights.min() < 0):
            raise ValidationError("weights must be finite and >= 0")
    if not g.directed:
        _check_symmetry(g)
    if g.in_offsets is not None:
        _check_transpose(g)


def _edge_triples(n, offsets, targets, weights):
    srcs = np.repeat(np.arange(n, dtype=np.int64), np.diff(offsets))
    w = weights if weights is not None else np.zeros(len(targets))
    return np.lexsort((w, targets, srcs)), srcs, w


def _check_symmetry(g: Graph) -> None:
    order, srcs, w = _edge_triples(g.n, g.out_offsets, g.out_targets, g.weights)
    # Mirror multiset: sort (u,v,w) and (v,u,w) identically and compare.
    fwd = (srcs[order], g.out_targets[order], w[order])
    rev_sort = np.lexsort((w, srcs, g.out_targets))
    rev = (g.out_targets[rev_sort], srcs[rev_sort], w[rev_sort])
    if not all(np.array_equal(a, b) for a, b in zip(fwd, rev)):
        raise ValidationError("undirected graph is not edge-symmetric")


def _check_transpose(g: Graph) -> None:
    if len(g.in_offsets) != g.n + 1 or g.in_offsets[-1] != g.m:
        raise ValidationError("reversed adjacency has inconsistent shape")
    fwd_src = np.repeat(np.arange(g.n, dtype=np.int64), np.diff(g.out_offsets))
    rev_src = np.repeat(np.arange(g.n, dtype=np.int64), np.diff(g.in_offsets))
    fwd = np.lexsort((g.out_targets, fwd_src))
    rev = np.lexsort((rev_src, g.in_targets))
    if not (np.array_equal(fwd_src[fwd], g.in_targets[rev])
            and np.array_equal(g.out_targets[fwd], rev_src[rev])):
        raise ValidationError("reversed adjacency is not the edge reversal")
