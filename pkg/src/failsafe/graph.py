"""Weighted digraphs, file I/O, and exact distance oracles.

Vertices are 0-indexed internally; the text format is 1-indexed and the
conversion happens only at the I/O boundary.  Unreachable distances use
the sentinel ``INF`` (far larger than any n*M path length); adding two
sentinels stays well below the int64 limit.

The oracles here (Dijkstra, brute-force APSP, replacement distances on a
graph with one failure removed) are the ground truth that every other
component is tested against, so they stay deliberately plain.
"""

from __future__ import annotations

import heapq
import io
from dataclasses import dataclass

import numpy as np

from .errors import GraphParseError, GraphValidationError, InvalidQueryError

INF = 1 << 60


@dataclass(frozen=True)
class EdgeFailure:
    """Deletion of the single edge a -> b."""

    a: int
    b: int

    def __str__(self):
        return f"E{self.a + 1},{self.b + 1}"


@dataclass(frozen=True)
class VertexFailure:
    """Deletion of vertex f (all its outgoing edges; incoming edges may
    stay, since f can no longer be an intermediate vertex)."""

    f: int

    def __str__(self):
        return f"V{self.f + 1}"


Failure = EdgeFailure | VertexFailure


class WeightedDigraph:
    """n vertices, integer edge weights in {1..M}, one edge per ordered pair."""

    __slots__ = ("n", "M", "edges", "_adj")

    def __init__(self, n: int, edges: dict, M: int):
        if n < 1:
            raise GraphValidationError("vertex count must be >= 1")
        if M < 1:
            raise GraphValidationError("max weight must be >= 1")
        clean = {}
        for (u, v), w in edges.items():
            if not (0 <= u < n and 0 <= v < n):
                raise GraphValidationError(f"edge ({u}, {v}) out of range")
            if u == v:
                raise GraphValidationError(f"self-loop at vertex {u}")
            if not (1 <= w <= M):
                raise GraphValidationError(f"weight {w} outside [1, {M}]")
            clean[(u, v)] = int(w)
        self.n = n
        self.M = M
        self.edges = clean
        adj = [[] for _ in range(n)]
        for (u, v), w in sorted(clean.items()):
            adj[u].append((v, w))
        self._adj = tuple(tuple(row) for row in adj)

    @property
    def m(self) -> int:
        return len(self.edges)

    def out_edges(self, u: int):
        return self._adj[u]

    def has_edge(self, u: int, v: int) -> bool:
        return (u, v) in self.edges

    def weight(self, u: int, v: int) -> int:
        return self.edges[(u, v)]

    def reverse(self) -> "WeightedDigraph":
        return WeightedDigraph(self.n, {(v, u): w for (u, v), w in self.edges.items()}, self.M)

    def to_text(self) -> str:
        lines = [f"{self.n} {self.m} {self.M}"]
        for (u, v), w in sorted(self.edges.items()):
            lines.append(f"{u + 1} {v + 1} {w}")
        return "\n".join(lines) + "\n"

    def __repr__(self):
        return f"WeightedDigraph(n={self.n}, m={self.m}, M={self.M})"


def parse_graph(source) -> WeightedDigraph:
    """Parse the text format: header ``n m M``, then m lines ``u v w``.

    Lines starting with '#' are ignored.  Malformed lines raise
    GraphParseError with the 1-based line number; out-of-range weights,
    duplicate ordered pairs, and self-loops raise GraphValidationError.
    """
    if isinstance(source, str):
        source = io.StringIO(source)
    rows = []
    for lineno, raw in enumerate(source, start=1):
        text = raw.strip()
        if not text or text.startswith("#"):
            continue
        rows.append((lineno, text))
    if not rows:
        raise GraphParseError("empty graph file")

    lineno, header = rows[0]
    parts = header.split()
    if len(parts) != 3:
        raise GraphParseError("header must be 'n m M'", line=lineno)
    try:
        n, m, max_w = (int(t) for t in parts)
    except ValueError:
        raise GraphParseError("header fields must be integers", line=lineno) from None
    if n < 1:
        raise GraphValidationError("vertex count must be >= 1", line=lineno)
    if m < 0:
        raise GraphValidationError("edge count must be >= 0", line=lineno)
    if max_w < 1:
        raise GraphValidationError("max weight must be >= 1", line=lineno)
    if len(rows) - 1 != m:
        raise GraphParseError(f"expected {m} edge lines, found {len(rows) - 1}")

    edges = {}
    for lineno, text in rows[1:]:
        parts = text.split()
        if len(parts) != 3:
            raise GraphParseError("edge line must be 'u v w'", line=lineno)
        try:
            u, v, w = (int(t) for t in parts)
        except ValueError:
            raise GraphParseError("edge fields must be integers", line=lineno) from None
        if not (1 <= u <= n and 1 <= v <= n):
            raise GraphValidationError(f"vertex out of range in ({u}, {v})", line=lineno)
        if u == v:
            raise GraphValidationError(f"self-loop at vertex {u}", line=lineno)
        if not (1 <= w <= max_w):
            raise GraphValidationError(f"weight {w} outside [1, {max_w}]", line=lineno)
        if (u - 1, v - 1) in edges:
            raise GraphValidationError(f"duplicate edge ({u}, {v})", line=lineno)
        edges[(u - 1, v - 1)] = w
    return WeightedDigraph(n, edges, max_w)


def dijkstra(g: WeightedDigraph, source: int) -> np.ndarray:
    """Exact single-source distances; unreachable entries hold INF."""
    if not (0 <= source < g.n):
        raise InvalidQueryError(f"source {source} out of range")
    dist = np.full(g.n, INF, dtype=np.int64)
    dist[source] = 0
    heap = [(0, source)]
    while heap:
        d, u = heapq.heappop(heap)
        if d != dist[u]:
            continue
        for v, w in g.out_edges(u):
            nd = d + w
            if nd < dist[v]:
                dist[v] = nd
                heapq.heappush(heap, (nd, v))
    return dist


def apsp_brute(g: WeightedDigraph) -> np.ndarray:
    """All-pairs shortest distances: one Dijkstra per source."""
    out = np.empty((g.n, g.n), dtype=np.int64)
    for u in range(g.n):
        out[u] = dijkstra(g, u)
    return out


def remove_failure(g: WeightedDigraph, failure: Failure) -> WeightedDigraph:
    """The graph with one failure applied.

    An edge failure deletes that edge; a vertex failure deletes all
    outgoing edges of the vertex (incoming edges are left intact).
    """
    if isinstance(failure, EdgeFailure):
        if not g.has_edge(failure.a, failure.b):
            raise InvalidQueryError(f"edge ({failure.a}, {failure.b}) not in graph")
        edges = dict(g.edges)
        del edges[(failure.a, failure.b)]
        return WeightedDigraph(g.n, edges, g.M)
    if isinstance(failure, VertexFailure):
        if not (0 <= failure.f < g.n):
            raise InvalidQueryError(f"vertex {failure.f} out of range")
        edges = {(u, v): w for (u, v), w in g.edges.items() if u != failure.f}
        return WeightedDigraph(g.n, edges, g.M)
    raise TypeError(f"unknown failure type {type(failure).__name__}")


def replacement_distance(g: WeightedDigraph, u: int, v: int, failure: Failure) -> int:
    """Ground-truth replacement distance: Dijkstra on the failed graph.

    Returns INF when v is unreachable from u after the failure.
    """
    if isinstance(failure, VertexFailure) and failure.f in (u, v):
        raise InvalidQueryError("vertex failure must differ from both endpoints")
    if not (0 <= u < g.n and 0 <= v < g.n):
        raise InvalidQueryError("query endpoint out of range")
    return int(dijkstra(remove_failure(g, failure), u)[v])


def random_graph(rng: np.random.Generator, n: int, M: int, m: int) -> WeightedDigraph:
    """A random simple digraph with exactly min(m, n(n-1)) edges."""
    m = min(m, n * (n - 1))
    edges = {}
    pairs = [(u, v) for u in range(n) for v in range(n) if u != v]
    idx = rng.choice(len(pairs), size=m, replace=False)
    for i in idx:
        u, v = pairs[i]
        edges[(u, v)] = int(rng.integers(1, M + 1))
    return WeightedDigraph(n, edges, M)
