"""Consistent shortest-path forests via minimum-witness distance products.

A seeded random bijection assigns each vertex a label in 1..n.  For every
pair (u, v) whose shortest paths have at least one internal vertex, the
*witness* w(u, v) is the internal vertex with the smallest label lying on
any shortest u -> v path.  Splitting every path at its witness and
recursing yields one canonical shortest path per pair, and those paths
are consistent: common subpaths coincide (per-root parent arrays form
trees), and deleting edges off a path never changes it.

Witnesses are found per distance class [rad, 2*rad): vertices with labels
up to hitting_c * M * n * ln(n) / rad form a hitting set that w.h.p.
contains every witness for the class.  Distances into and out of the
hitting set (clipped at 2*rad) feed blocked min-plus products, the first
block attaining the pair distance is scanned for the smallest label, and
a miss (possible only when the hitting constant is too small for the
instance) doubles the label threshold for the class and retries -- loudly,
never silently.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field

import numpy as np

from . import _backend
from .errors import ContractViolationError, FailsafeError, UnreachableError
from .graph import INF, WeightedDigraph, apsp_brute

logger = logging.getLogger(__name__)

DEFAULT_HITTING_C = 3.0
BLOCK_SIZE_EXPONENT = 0.5286

KIND_SELF = 0
KIND_EDGE = 1
KIND_INTERNAL = 2
KIND_UNREACHABLE = 3


def default_block_size(n: int) -> int:
    return max(1, math.ceil(n ** BLOCK_SIZE_EXPONENT))


class Permutation:
    """A bijection from vertices to labels 1..n."""

    __slots__ = ("labels", "order")

    def __init__(self, labels):
        labels = np.asarray(labels, dtype=np.int64)
        n = labels.shape[0]
        if sorted(labels.tolist()) != list(range(1, n + 1)):
            raise ContractViolationError("labels must be a bijection onto 1..n")
        self.labels = labels
        order = np.empty(n, dtype=np.int64)
        order[labels - 1] = np.arange(n)
        self.order = order  # order[k] = vertex with label k+1

    @classmethod
    def random(cls, n: int, seed: int = 0) -> "Permutation":
        # Fisher-Yates shuffle behind numpy's Generator.permutation.
        perm = np.random.default_rng(seed).permutation(n)
        labels = np.empty(n, dtype=np.int64)
        labels[perm] = np.arange(1, n + 1)
        return cls(labels)

    def __len__(self):
        return self.labels.shape[0]

    def __eq__(self, other):
        if not isinstance(other, Permutation):
            return NotImplemented
        return bool(np.array_equal(self.labels, other.labels))

    def __repr__(self):
        return f"Permutation({self.labels.tolist()})"


def min_plus(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """C[u, v] = min_z a[u, z] + b[z, v] over (min, +); entries are ints or
    the INF sentinel, and results saturate at INF."""
    a = np.ascontiguousarray(a, dtype=np.int64)
    b = np.ascontiguousarray(b, dtype=np.int64)
    if a.ndim != 2 or b.ndim != 2 or a.shape[1] != b.shape[0]:
        raise ContractViolationError("inner dimensions must match")
    return _backend.active().min_plus(a, b, INF)


def blocked_witness_product(a, b, labels, block_size: int) -> list:
    """Per-block min-plus products D^i restricted to witness columns whose
    label falls in (i*block_size, (i+1)*block_size]."""
    a = np.ascontiguousarray(a, dtype=np.int64)
    b = np.ascontiguousarray(b, dtype=np.int64)
    labels = np.asarray(labels, dtype=np.int64)
    if block_size < 1:
        raise ContractViolationError("block size must be >= 1")
    if a.shape[1] != b.shape[0] or a.shape[1] != labels.shape[0]:
        raise ContractViolationError("witness axis sizes must agree")
    n_blocks = 0 if labels.shape[0] == 0 else math.ceil(int(labels.max()) / block_size)
    out = []
    for i in range(n_blocks):
        sel = (labels > i * block_size) & (labels <= (i + 1) * block_size)
        if sel.any():
            out.append(min_plus(a[:, sel], b[sel, :]))
        else:
            out.append(np.full((a.shape[0], b.shape[1]), INF, dtype=np.int64))
    return out


def classify_pairs(dist: np.ndarray) -> np.ndarray:
    """Edge-count class of each pair: 0 (u = v), 1 (a single edge is the
    only shortest path), 2 (some shortest path has an internal vertex), or
    3 (unreachable)."""
    n = dist.shape[0]
    via = _backend.active().internal_witness_min(np.ascontiguousarray(dist), INF)
    kind = np.full((n, n), KIND_EDGE, dtype=np.int8)
    kind[dist >= INF] = KIND_UNREACHABLE
    kind[(via == dist) & (dist < INF)] = KIND_INTERNAL
    np.fill_diagonal(kind, KIND_SELF)
    return kind


@dataclass
class WitnessMatrix:
    """witness[u, v] is the minimum-label internal vertex on a shortest
    u -> v path, or -1 when no shortest path has one."""

    witness: np.ndarray
    kind: np.ndarray
    permutation: Permutation
    escalations: list = field(default_factory=list)


def compute_witnesses(
    g: WeightedDigraph,
    dist: np.ndarray,
    permutation: Permutation,
    hitting_c: float = DEFAULT_HITTING_C,
    block_size: int | None = None,
) -> WitnessMatrix:
    """Minimum-label witnesses for every pair whose shortest paths have
    internal vertices (exact; hitting-set misses escalate and retry)."""
    n = g.n
    if dist.shape != (n, n):
        raise ContractViolationError("distance matrix shape mismatch")
    if len(permutation) != n:
        raise ContractViolationError("permutation size mismatch")
    s = block_size if block_size is not None else default_block_size(n)
    if s < 1:
        raise ContractViolationError("block size must be >= 1")

    kind = classify_pairs(dist)
    witness = np.full((n, n), -1, dtype=np.int32)
    wm = WitnessMatrix(witness, kind, permutation)
    needs = kind == KIND_INTERNAL
    if not needs.any():
        return wm

    labels = permutation.labels
    order = permutation.order
    finite = dist[dist < INF]
    max_dist = int(finite.max())
    rad = 1
    while rad <= max_dist:
        pair_mask = needs & (dist >= rad) & (dist < 2 * rad)
        if pair_mask.any():
            _resolve_radius_class(
                g, dist, labels, order, rad, pair_mask, s, hitting_c, wm
            )
        rad <<= 1
    return wm


def _resolve_radius_class(g, dist, labels, order, rad, pair_mask, block_size, hitting_c, wm):
    n = g.n
    clip = 2 * rad
    threshold = hitting_c * g.M * n * math.log(n) / rad if n > 1 else float(n)
    while True:
        k = min(n, int(threshold))
        if k >= 1:
            hs = order[:k]  # vertices with labels 1..k
            a = dist[:, hs].copy()
            a[a > clip] = INF
            a[np.arange(n)[:, None] == hs[None, :]] = INF
            b = dist[hs, :].copy()
            b[b > clip] = INF
            b[hs[:, None] == np.arange(n)[None, :]] = INF
            products = blocked_witness_product(a, b, labels[hs], block_size)
            stack = np.stack(products)
            hit = (stack == dist[None, :, :]) & pair_mask[None, :, :]
            found = hit.any(axis=0)
            first_block = np.argmax(hit, axis=0)
            for u, v in np.argwhere(found):
                i = int(first_block[u, v])
                target = dist[u, v]
                lo = i * block_size
                hi = min((i + 1) * block_size, k)
                for zpos in range(lo, hi):
                    if a[u, zpos] + b[zpos, v] == target:
                        wm.witness[u, v] = hs[zpos]
                        break
                else:
                    raise FailsafeError("block product inconsistent with scan")
            remaining = pair_mask & ~found
        else:
            remaining = pair_mask
        if not remaining.any():
            return
        if k >= n:
            # The full vertex set always contains a witness for pairs with
            # an internal vertex (both legs are <= dist < 2*rad).
            raise FailsafeError("witness missing with the full hitting set")
        new_threshold = max(threshold * 2, 1.0)
        wm.escalations.append(
            {
                "radius": rad,
                "threshold": threshold,
                "new_threshold": new_threshold,
                "unresolved": int(remaining.sum()),
            }
        )
        logger.warning(
            "hitting set miss at radius %d: %d unresolved pairs, "
            "raising label threshold %.1f -> %.1f",
            rad, int(remaining.sum()), threshold, new_threshold,
        )
        threshold = new_threshold
        pair_mask = remaining


@dataclass
class ShortestPathForests:
    """Per-root parent arrays: parent_in[v][u] is the second vertex on the
    canonical path u -> v (the parent of u in the tree of paths into v);
    parent_out[u][v] is the predecessor of v on the same path (the parent
    of v in the tree of paths out of u).  -1 marks self/unreachable."""

    parent_in: np.ndarray
    parent_out: np.ndarray
    witnesses: WitnessMatrix
    dist: np.ndarray

    @property
    def permutation(self) -> Permutation:
        return self.witnesses.permutation


def build_forests(wm: WitnessMatrix, dist: np.ndarray) -> ShortestPathForests:
    """Parent tables by the witness recursion, processing pairs in
    nondecreasing distance order.

    No witness means the pair's path is the single edge u -> v, so u's
    next hop is v and v's predecessor is u.  Otherwise the path splits at
    the witness w: the next hop out of u equals the next hop on the
    (strictly shorter) pair (u, w), and the predecessor of v equals the
    one on (w, v) -- the symmetric pass filling both tables in one sweep.
    """
    n = dist.shape[0]
    parent_in = np.full((n, n), -1, dtype=np.int32)
    parent_out = np.full((n, n), -1, dtype=np.int32)
    flat = np.argsort(dist, axis=None, kind="stable")
    for pos in flat:
        u, v = divmod(int(pos), n)
        if u == v or dist[u, v] >= INF:
            continue
        w = int(wm.witness[u, v])
        if w < 0:
            parent_in[v, u] = v
            parent_out[u, v] = u
        else:
            parent_in[v, u] = parent_in[w, u]
            parent_out[u, v] = parent_out[w, v]
    return ShortestPathForests(parent_in, parent_out, wm, dist)


def build_spt(
    g: WeightedDigraph,
    seed: int = 0,
    permutation: Permutation | None = None,
    hitting_c: float = DEFAULT_HITTING_C,
    block_size: int | None = None,
    dist: np.ndarray | None = None,
) -> ShortestPathForests:
    """Full pipeline: APSP, witnesses, forests."""
    if permutation is None:
        permutation = Permutation.random(g.n, seed)
    if dist is None:
        dist = apsp_brute(g)
    wm = compute_witnesses(g, dist, permutation, hitting_c, block_size)
    return build_forests(wm, dist)


def extract_path(forests: ShortestPathForests, u: int, v: int) -> list:
    """The canonical shortest path u -> v as a vertex list ([u] if u = v)."""
    if u == v:
        return [u]
    n = forests.dist.shape[0]
    if forests.parent_in[v, u] < 0:
        raise UnreachableError(f"{v} is not reachable from {u}")
    path = [u]
    cur = u
    for _ in range(n):
        cur = int(forests.parent_in[v, cur])
        path.append(cur)
        if cur == v:
            return path
    raise FailsafeError("parent pointers do not reach the root")


def extract_path_backward(forests: ShortestPathForests, u: int, v: int) -> list:
    """The same path recovered from the outgoing tree (predecessor walk)."""
    if u == v:
        return [u]
    n = forests.dist.shape[0]
    if forests.parent_out[u, v] < 0:
        raise UnreachableError(f"{v} is not reachable from {u}")
    path = [v]
    cur = v
    for _ in range(n):
        cur = int(forests.parent_out[u, cur])
        path.append(cur)
        if cur == u:
            path.reverse()
            return path
    raise FailsafeError("predecessor pointers do not reach the root")


@dataclass
class ConsistencyReport:
    pairs_checked: int = 0
    path_violations: int = 0
    subpath_violations: int = 0
    out_tree_mismatches: int = 0
    subgraph_checks: int = 0
    subgraph_violations: int = 0
    hitting_checked: int = 0
    hitting_violations: int = 0
    escalations: int = 0
    examples: list = field(default_factory=list)

    @property
    def hitting_violation_rate(self) -> float:
        return self.hitting_violations / self.hitting_checked if self.hitting_checked else 0.0

    @property
    def ok(self) -> bool:
        # Hitting-set violations indicate the constant is too small for the
        # instance, not a broken forest; they are reported, never fatal.
        return (
            self.path_violations == 0
            and self.subpath_violations == 0
            and self.out_tree_mismatches == 0
            and self.subgraph_violations == 0
        )

    def _note(self, message):
        if len(self.examples) < 20:
            self.examples.append(message)


def verify_consistency(
    g: WeightedDigraph,
    forests: ShortestPathForests,
    subgraph_samples: int = 50,
    seed: int = 0,
    hitting_c: float = DEFAULT_HITTING_C,
) -> ConsistencyReport:
    """Check every pair's path, subpath consistency both directions, the
    deletion-stability of sampled path-containing subgraphs (same labels),
    and the hitting-set label bound; returns a report, never raises."""
    report = ConsistencyReport()
    dist = forests.dist
    n = g.n
    perm = forests.permutation
    report.escalations = len(forests.witnesses.escalations)

    reachable_pairs = []
    for u in range(n):
        for v in range(n):
            if u == v or dist[u, v] >= INF:
                continue
            report.pairs_checked += 1
            path = extract_path(forests, u, v)
            total = 0
            broken = False
            for x, y in zip(path, path[1:]):
                if not g.has_edge(x, y):
                    broken = True
                    break
                total += g.weight(x, y)
            if broken or total != dist[u, v]:
                report.path_violations += 1
                report._note(f"path({u},{v}) = {path} is not a shortest path")
                continue
            reachable_pairs.append((u, v, path))
            if extract_path_backward(forests, u, v) != path:
                report.out_tree_mismatches += 1
                report._note(f"in/out trees disagree on ({u},{v})")
            # Subpath consistency: every suffix step of every prefix pair.
            for j in range(1, len(path)):
                root = path[j]
                for t in range(j):
                    if forests.parent_in[root, path[t]] != path[t + 1]:
                        report.subpath_violations += 1
                        report._note(f"subpath ({path[t]},{root}) diverges inside ({u},{v})")
            for i in range(len(path) - 1):
                root = path[i]
                for t in range(i + 1, len(path)):
                    if forests.parent_out[root, path[t]] != path[t - 1]:
                        report.subpath_violations += 1
                        report._note(f"out-subpath ({root},{path[t]}) diverges inside ({u},{v})")
            # Hitting-set label bound for pairs with internal vertices.
            if forests.witnesses.kind[u, v] == KIND_INTERNAL and n > 1:
                report.hitting_checked += 1
                w = int(forests.witnesses.witness[u, v])
                bound = hitting_c * g.M * n * math.log(n) / dist[u, v]
                if perm.labels[w] > bound:
                    report.hitting_violations += 1
                    report._note(
                        f"witness label {int(perm.labels[w])} above bound {bound:.1f} "
                        f"for pair ({u},{v})"
                    )

    rng = np.random.default_rng(seed)
    if reachable_pairs:
        for _ in range(subgraph_samples):
            u, v, path = reachable_pairs[int(rng.integers(len(reachable_pairs)))]
            keep = set(zip(path, path[1:]))
            edges = {}
            for (x, y), w in g.edges.items():
                if (x, y) in keep or rng.random() < 0.5:
                    edges[(x, y)] = w
            sub = WeightedDigraph(g.n, edges, g.M)
            report.subgraph_checks += 1
            sub_forests = build_spt(sub, permutation=perm, hitting_c=hitting_c)
            if extract_path(sub_forests, u, v) != path:
                report.subgraph_violations += 1
                report._note(f"subgraph changed path({u},{v})")
    return report
