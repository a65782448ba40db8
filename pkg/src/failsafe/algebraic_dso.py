"""The r-truncated algebraic distance sensitivity oracle.

Preprocessing builds the symbolic adjacency matrix of the graph -- ones on
the diagonal, a term z_{u,v} * x^w per weight-w edge with z sampled
uniformly from Z_p -- and stores its inverse and determinant mod x^r.
Lowest x-degrees of the adjugate det(S) * S^{-1} encode shortest
distances, and a single failure is a rank-1 update to S, so one query
needs only a constant number of ring operations on stored entries
(Sherman-Morrison-Woodbury applied to the adjugate):

    edge failure (a, b, weight w):
        det_ratio = 1 - z_{a,b} x^w S^{-1}[b, a]
        update    = -S^{-1}[u, a] z_{a,b} S^{-1}[b, v] x^w
    vertex failure f:
        det_ratio = S^{-1}[f, f]
        update    = S^{-1}[u, f] S^{-1}[f, v]
    adjugate entry = det(S) * (det_ratio * S^{-1}[u, v] - update)

The answer is the lowest nonzero degree of the adjugate entry, or r when
the entry vanishes mod x^r.  Answers equal min(true replacement distance,
r) except with probability at most n/p per query (a nonzero polynomial of
degree <= n evaluated at the random z's; at the default 64-bit prime this
is negligible).  Answers never undershoot the true value: coefficients
below the true distance are identically zero before sampling.
"""

from __future__ import annotations

import numpy as np

from . import _backend
from ._modops import mulmod, submod
from .errors import InvalidQueryError
from .graph import EdgeFailure, Failure, VertexFailure, WeightedDigraph
from .polymatrix import PolyMatrix, det_mod_xr, invert_mod_xr
from .ring import DEFAULT_MODULUS, TruncatedPoly, check_modulus


class SymbolicAdjacency:
    """The substituted symbolic adjacency matrix and its random edge
    coefficients."""

    __slots__ = ("matrix", "coeffs", "modulus", "seed")

    def __init__(self, matrix: PolyMatrix, coeffs: dict, modulus: int, seed: int):
        self.matrix = matrix
        self.coeffs = coeffs
        self.modulus = modulus
        self.seed = seed


def build_symbolic_adjacency(
    g: WeightedDigraph,
    seed: int = 0,
    modulus: int = DEFAULT_MODULUS,
    order: int | None = None,
) -> SymbolicAdjacency:
    """Sample one coefficient per edge (seeded, uniform over Z_p) and place
    z_{u,v} x^w at entry (u, v); the diagonal is 1.

    Entries of weight >= order vanish mod x^order, which is exactly how
    the truncated ring treats paths that long.
    """
    check_modulus(modulus)
    if order is None:
        order = g.M + 1
    rng = np.random.default_rng(seed)
    edge_list = sorted(g.edges.items())
    samples = rng.integers(0, modulus, size=len(edge_list), dtype=np.uint64)
    matrix = PolyMatrix.identity(g.n, order, modulus)
    coeffs = {}
    for ((u, v), w), z in zip(edge_list, samples):
        coeffs[(u, v)] = int(z)
        if w < order:
            matrix.data[u, v, w] = z
    return SymbolicAdjacency(matrix, coeffs, modulus, seed)


class TruncatedDso:
    """Stored inverse and determinant of the symbolic adjacency mod x^r,
    answering failure queries clipped at r.

    Immutable after construction; queries are pure and may run from any
    number of threads.  ``last_query_ring_ops`` records how many ring
    multiplications/additions the most recent query performed (a small
    constant, independent of the graph).
    """

    def __init__(self, g: WeightedDigraph, sa: SymbolicAdjacency, radius: int,
                 inv: PolyMatrix, det: TruncatedPoly):
        self.n = g.n
        self.max_weight = g.M
        self.edges = dict(g.edges)
        self.sa = sa
        self.radius = radius
        self.inv = inv
        self.det = det
        self.modulus = sa.modulus
        self.last_query_ring_ops = 0

    # -- internal helpers ------------------------------------------------

    def _scaled_shift(self, poly: np.ndarray, scalar: int, shift: int) -> np.ndarray:
        """scalar * x^shift * poly, truncated to the radius."""
        r = self.radius
        out = np.zeros(r, dtype=np.uint64)
        if shift < r:
            out[shift:] = mulmod(poly[: r - shift], np.uint64(scalar), self.modulus)
        return out

    def _finish(self, adj_entry: np.ndarray, ops: int) -> int:
        self.last_query_ring_ops = ops
        nz = np.nonzero(adj_entry)[0]
        if nz.shape[0] == 0:
            return self.radius
        return int(nz[0])

    # -- queries ----------------------------------------------------------

    def query_edge_failure(self, u: int, v: int, edge: tuple) -> int:
        """min(replacement distance avoiding edge, r) w.h.p."""
        a, b = edge
        if (a, b) not in self.edges:
            raise InvalidQueryError(f"edge ({a}, {b}) not in graph")
        self._check_endpoints(u, v)
        w = self.edges[(a, b)]
        z = self.sa.coeffs[(a, b)]
        p = self.modulus
        kern = _backend.active()
        inv = self.inv.data
        ops = 0

        det_ratio = self._scaled_shift(inv[b, a], (p - z) % p, w)
        ops += 1
        det_ratio[0] = (int(det_ratio[0]) + 1) % p
        ops += 1
        assert det_ratio[0] == 1, "determinant ratio must have constant term 1"

        main = kern.conv_truncated(det_ratio, np.ascontiguousarray(inv[u, v]), np.uint64(p))
        ops += 1
        prod = kern.conv_truncated(
            np.ascontiguousarray(inv[u, a]), np.ascontiguousarray(inv[b, v]), np.uint64(p)
        )
        ops += 1
        update = self._scaled_shift(prod, (p - z) % p, w)
        ops += 1
        diff = submod(main, update, p)
        ops += 1
        adj_entry = kern.conv_truncated(self.det.coeffs, diff, np.uint64(p))
        ops += 1
        return self._finish(adj_entry, ops)

    def query_vertex_failure(self, u: int, v: int, f: int) -> int:
        """min(replacement distance avoiding vertex f, r) w.h.p."""
        if f in (u, v):
            raise InvalidQueryError("vertex failure must differ from both endpoints")
        self._check_endpoints(u, v)
        if not (0 <= f < self.n):
            raise InvalidQueryError(f"vertex {f} out of range")
        p = self.modulus
        kern = _backend.active()
        inv = self.inv.data
        ops = 0

        det_ratio = np.ascontiguousarray(inv[f, f])
        assert det_ratio[0] == 1, "determinant ratio must have constant term 1"
        main = kern.conv_truncated(det_ratio, np.ascontiguousarray(inv[u, v]), np.uint64(p))
        ops += 1
        update = kern.conv_truncated(
            np.ascontiguousarray(inv[u, f]), np.ascontiguousarray(inv[f, v]), np.uint64(p)
        )
        ops += 1
        diff = submod(main, update, p)
        ops += 1
        adj_entry = kern.conv_truncated(self.det.coeffs, diff, np.uint64(p))
        ops += 1
        return self._finish(adj_entry, ops)

    def query(self, u: int, v: int, failure: Failure) -> int:
        if isinstance(failure, EdgeFailure):
            return self.query_edge_failure(u, v, (failure.a, failure.b))
        if isinstance(failure, VertexFailure):
            return self.query_vertex_failure(u, v, failure.f)
        raise TypeError(f"unknown failure type {type(failure).__name__}")

    def truncated_distance(self, u: int, v: int) -> int:
        """min(distance, r) w.h.p., read off the adjugate entry."""
        self._check_endpoints(u, v)
        kern = _backend.active()
        adj_entry = kern.conv_truncated(
            self.det.coeffs, np.ascontiguousarray(self.inv.data[u, v]), np.uint64(self.modulus)
        )
        return self._finish(adj_entry, 1)

    def _check_endpoints(self, u, v):
        if not (0 <= u < self.n and 0 <= v < self.n):
            raise InvalidQueryError("query endpoint out of range")


def preprocess(
    g: WeightedDigraph,
    radius: int,
    seed: int = 0,
    modulus: int = DEFAULT_MODULUS,
) -> TruncatedDso:
    """Build the r-truncated oracle: sample coefficients, then store the
    inverse and determinant of the symbolic adjacency mod x^radius."""
    if radius < 1:
        raise ValueError("radius must be >= 1")
    check_modulus(modulus)
    if modulus <= g.n * g.M + 1:
        raise ValueError(
            f"modulus {modulus} too small for n={g.n}, M={g.M}: need p > n*M + 1"
        )
    sa = build_symbolic_adjacency(g, seed=seed, modulus=modulus, order=radius)
    inv = invert_mod_xr(sa.matrix)
    det = det_mod_xr(sa.matrix)
    assert det.coeffs[0] == 1, "det of I + x*M must have constant term 1"
    return TruncatedDso(g, sa, radius, inv, det)


def query_edge_failure(dso: TruncatedDso, u: int, v: int, edge: tuple) -> int:
    return dso.query_edge_failure(u, v, edge)


def query_vertex_failure(dso: TruncatedDso, u: int, v: int, f: int) -> int:
    return dso.query_vertex_failure(u, v, f)


def truncated_distance(dso: TruncatedDso, u: int, v: int) -> int:
    return dso.truncated_distance(u, v)
