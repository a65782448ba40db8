"""Untruncated distance sensitivity oracle.

A truncated algebraic core of radius r = ceil(M * n^alpha) answers the
short queries; anything the core clips at r is recomputed exactly by a
Dijkstra on the graph with the failure removed.  Per-source rows of those
recomputations are memoized in a bounded, lock-guarded cache, so a batch
of queries against the same failure costs one Dijkstra per source.  Every
answer equals the exact replacement distance (INF sentinel when the
failure disconnects the pair).

One dispatch refinement: no simple path is longer than (n-1)*M, so when
the core radius exceeds that, a clipped answer already proves the pair
unreachable and the fallback is skipped.  At alpha = 1 the fallback is
therefore never consulted.  The preprocessing- and query-complexity
guarantees of the truncated core do not extend to the fallback path; this
assembly reproduces answer semantics and the dispatch structure only.
"""

from __future__ import annotations

import math
import threading
from collections import OrderedDict

import numpy as np

from .algebraic_dso import TruncatedDso, preprocess
from .consistent_spt import ShortestPathForests, build_spt
from .errors import InvalidQueryError
from .graph import (
    INF,
    EdgeFailure,
    Failure,
    VertexFailure,
    WeightedDigraph,
    apsp_brute,
    dijkstra,
    remove_failure,
)
from .ring import DEFAULT_MODULUS

DEFAULT_ALPHA = 0.420645

_CACHE_LIMIT = 4096  # cached (source, failure) distance rows


def radius_for(n: int, max_weight: int, alpha: float) -> int:
    """Core radius ceil(M * n^alpha)."""
    if not 0.0 <= alpha <= 1.0:
        raise ValueError("alpha must lie in [0, 1]")
    return max(1, math.ceil(max_weight * n**alpha))


class FullDso:
    """Truncated core plus exact fallback; always returns exact answers."""

    def __init__(self, g: WeightedDigraph, core: TruncatedDso, dist: np.ndarray,
                 forests: ShortestPathForests, alpha: float):
        self.graph = g
        self.core = core
        self.dist = dist
        self.forests = forests
        self.alpha = alpha
        self.radius = core.radius
        self.fallback_count = 0
        self._rows = OrderedDict()
        self._lock = threading.Lock()

    def query(self, u: int, v: int, failure: Failure) -> int:
        """Exact replacement distance (INF if disconnected)."""
        answer = self.core.query(u, v, failure)
        if answer < self.radius:
            return answer
        if self.radius > (self.graph.n - 1) * self.graph.M:
            # No simple path is this long; the clipped answer proves
            # unreachability.
            return INF
        return int(self._fallback_row(u, failure)[v])

    def _fallback_row(self, u: int, failure: Failure) -> np.ndarray:
        key = (u, failure)
        with self._lock:
            self.fallback_count += 1
            row = self._rows.get(key)
            if row is not None:
                self._rows.move_to_end(key)
                return row
        row = dijkstra(remove_failure(self.graph, failure), u)
        with self._lock:
            self._rows[key] = row
            if len(self._rows) > _CACHE_LIMIT:
                self._rows.popitem(last=False)
        return row

    def reset_counters(self):
        with self._lock:
            self.fallback_count = 0
            self._rows.clear()


def build_full(
    g: WeightedDigraph,
    alpha: float = DEFAULT_ALPHA,
    seed: int = 0,
    radius: int | None = None,
    modulus: int = DEFAULT_MODULUS,
    hitting_c: float | None = None,
    block_size: int | None = None,
) -> FullDso:
    """Build the assembled oracle: truncated core at ceil(M * n^alpha)
    (or an explicit radius override), exact all-pairs distances, and the
    consistent shortest-path forests."""
    if radius is None:
        radius = radius_for(g.n, g.M, alpha)
    core = preprocess(g, radius, seed=seed, modulus=modulus)
    dist = apsp_brute(g)
    kwargs = {}
    if hitting_c is not None:
        kwargs["hitting_c"] = hitting_c
    forests = build_spt(g, seed=seed, block_size=block_size, dist=dist, **kwargs)
    return FullDso(g, core, dist, forests, alpha)


def query_full(dso: FullDso, u: int, v: int, failure: Failure) -> int:
    """Exact replacement distance via the core-then-fallback dispatch."""
    return dso.query(u, v, failure)
