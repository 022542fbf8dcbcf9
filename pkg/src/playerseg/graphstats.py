"""PageRank influence scores, persistent-KOL mining, and network cohesion
metrics (connected components, clustering coefficient, triangles).

Triangle work runs on sorted CSR adjacency: a jitted two-pointer
intersection kernel, with a dense-matmul numpy twin for the fallback path.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field

import numpy as np

from . import accel
from .errors import EmptyInput, InvalidSpec, NegativeDuration, UnknownNode
from .ingest import SocialGraph

log = logging.getLogger(__name__)


@dataclass
class PageRankResult:
    """Influence scores summing to 1; `converged` is False when the power
    iteration ran out of iterations (scores then hold the best iterate)."""

    scores: dict[str, float]
    damping: float
    iterations: int
    residual: float
    converged: bool
    sum_history: list[float] = field(default_factory=list, repr=False)


@dataclass
class NetworkStats:
    nodes: int
    edges: int
    connected_components: int
    avg_clustering_coeff: float
    triangles: int


# ---------------------------------------------------------------- pagerank

def _pr_matvec_loops(indptr, indices, w, inv_strength, x, out):
    n = x.shape[0]
    for v in range(n):
        s = 0.0
        for e in range(indptr[v], indptr[v + 1]):
            u = indices[e]
            s += x[u] * w[e] * inv_strength[u]
        out[v] = s


_pr_matvec_jit = accel.njit(_pr_matvec_loops)


def _pr_matvec_numpy(indptr, indices, w, inv_strength, x, out):
    n = x.shape[0]
    rows = np.repeat(np.arange(n), np.diff(indptr))
    contrib = x[indices] * w * inv_strength[indices]
    out[:] = np.bincount(rows, weights=contrib, minlength=n)


pr_matvec = accel.select(_pr_matvec_jit, _pr_matvec_numpy)


def pagerank(
    graph: SocialGraph,
    damping: float = 0.85,
    tol: float = 1e-10,
    max_iter: int = 200,
    weighted: bool = True,
) -> PageRankResult:
    """Power iteration on the row-stochastic transition matrix of the
    undirected graph (hop probability proportional to edge weight).

    Isolated nodes act as dangling mass redistributed uniformly. Stops when
    the L1 change drops to `tol`.
    """
    n = graph.n_nodes
    if n == 0:
        raise EmptyInput("graph has no nodes")
    if not (0.0 <= damping < 1.0):
        raise InvalidSpec("damping must lie in [0, 1)")
    indptr, indices, w = graph.csr()
    if not weighted:
        w = np.ones_like(w)
        strength = np.diff(indptr).astype(np.float64)
    else:
        strength = np.zeros(n)
        for i in range(n):
            strength[i] = w[indptr[i] : indptr[i + 1]].sum()
    inv_strength = np.where(strength > 0, 1.0 / np.maximum(strength, 1e-300), 0.0)
    dangling = strength == 0

    x = np.full(n, 1.0 / n)
    out = np.empty(n)
    residual = np.inf
    sums = []
    it = 0
    converged = False
    for it in range(1, max_iter + 1):
        pr_matvec(indptr, indices, w, inv_strength, x, out)
        dangling_mass = x[dangling].sum()
        x_new = damping * (out + dangling_mass / n) + (1.0 - damping) / n
        residual = float(np.abs(x_new - x).sum())
        x = x_new
        sums.append(float(x.sum()))
        if residual <= tol:
            converged = True
            break
    if not converged:
        log.warning("pagerank did not converge in %d iterations (residual %.3g)",
                    max_iter, residual)
    scores = {nid: float(x[i]) for i, nid in enumerate(graph.node_ids)}
    return PageRankResult(
        scores=scores,
        damping=damping,
        iterations=it,
        residual=residual,
        converged=converged,
        sum_history=sums,
    )


def top_k_influencers(result: PageRankResult, k: int = 15) -> list[str]:
    """k highest scores, descending; ties broken by node id ascending."""
    if k < 1:
        raise InvalidSpec("k must be >= 1")
    ranked = sorted(result.scores.items(), key=lambda kv: (-kv[1], kv[0]))
    return [nid for nid, _ in ranked[:k]]


def persistent_kols(snapshots: list[SocialGraph], k: int = 15, **pr_kwargs) -> set[str]:
    """Nodes present in the top-k influencer list of every snapshot."""
    if not snapshots:
        raise EmptyInput("need at least one snapshot")
    persistent: set[str] | None = None
    for g in snapshots:
        top = set(top_k_influencers(pagerank(g, **pr_kwargs), k))
        persistent = top if persistent is None else persistent & top
    return persistent


# ----------------------------------------------------- components/triangles

def connected_components(graph: SocialGraph) -> tuple[int, np.ndarray]:
    """Disjoint-set union; labels are component ids numbered by first node
    appearance."""
    n = graph.n_nodes
    parent = np.arange(n)

    def find(a: int) -> int:
        while parent[a] != a:
            parent[a] = parent[parent[a]]
            a = parent[a]
        return a

    for u, v in zip(graph.edge_u, graph.edge_v):
        ru, rv = find(int(u)), find(int(v))
        if ru != rv:
            parent[rv] = ru
    labels = np.empty(n, dtype=np.int64)
    seen: dict[int, int] = {}
    for i in range(n):
        r = find(i)
        if r not in seen:
            seen[r] = len(seen)
        labels[i] = seen[r]
    return len(seen), labels


def _node_tri_loops(indptr, indices, eu, ev, tri):
    for e in range(eu.shape[0]):
        u = eu[e]
        v = ev[e]
        a = indptr[u]
        a_end = indptr[u + 1]
        b = indptr[v]
        b_end = indptr[v + 1]
        while a < a_end and b < b_end:
            x = indices[a]
            y = indices[b]
            if x == y:
                tri[u] += 1
                tri[v] += 1
                a += 1
                b += 1
            elif x < y:
                a += 1
            else:
                b += 1


_node_tri_jit = accel.njit(_node_tri_loops)


def _node_tri_numpy(indptr, indices, eu, ev, tri):
    n = indptr.shape[0] - 1
    if n <= 2048:
        a = np.zeros((n, n))
        a[eu, ev] = 1.0
        a[ev, eu] = 1.0
        paths = a @ a
        tri[:] = ((a * paths).sum(axis=1) / 2.0).astype(np.int64)
        # tri holds T(v); callers expect the 2x count used by the loop kernel
        tri *= 2
        return
    neighbor_sets = [set() for _ in range(n)]
    for u, v in zip(eu, ev):
        neighbor_sets[u].add(int(v))
        neighbor_sets[v].add(int(u))
    for u, v in zip(eu, ev):
        common = len(neighbor_sets[int(u)] & neighbor_sets[int(v)])
        tri[u] += common
        tri[v] += common


node_tri_step = accel.select(_node_tri_jit, _node_tri_numpy)


def node_triangle_counts(graph: SocialGraph) -> np.ndarray:
    """T(v): triangles through each node (unweighted topology)."""
    indptr, indices, _ = graph.csr()
    tri = np.zeros(graph.n_nodes, dtype=np.int64)
    if graph.n_edges:
        node_tri_step(indptr, indices, graph.edge_u, graph.edge_v, tri)
    return tri // 2


def avg_clustering_coefficient(graph: SocialGraph) -> float:
    """Mean over all nodes of 2T(v)/(deg(v)(deg(v)-1)); deg<2 contributes 0."""
    n = graph.n_nodes
    if n == 0:
        return 0.0
    deg = graph.degrees().astype(np.float64)
    tri = node_triangle_counts(graph).astype(np.float64)
    denom = deg * (deg - 1.0)
    coeff = np.where(denom > 0, 2.0 * tri / np.maximum(denom, 1.0), 0.0)
    return float(coeff.mean())


def _forward_tri_loops(indptr, indices):
    total = 0
    n = indptr.shape[0] - 1
    for u in range(n):
        for ei in range(indptr[u], indptr[u + 1]):
            v = indices[ei]
            a = indptr[u]
            a_end = indptr[u + 1]
            b = indptr[v]
            b_end = indptr[v + 1]
            while a < a_end and b < b_end:
                x = indices[a]
                y = indices[b]
                if x == y:
                    total += 1
                    a += 1
                    b += 1
                elif x < y:
                    a += 1
                else:
                    b += 1
    return total


_forward_tri_jit = accel.njit(_forward_tri_loops)


def _forward_tri_numpy(indptr, indices):
    n = indptr.shape[0] - 1
    if n <= 2048:
        a = np.zeros((n, n))
        rows = np.repeat(np.arange(n), np.diff(indptr))
        a[rows, indices] = 1.0
        return int(((a @ a) * a).sum())
    total = 0
    outs = [set(indices[indptr[u]: indptr[u + 1]].tolist()) for u in range(n)]
    for u in range(n):
        for v in outs[u]:
            total += len(outs[u] & outs[v])
    return total


forward_tri_step = accel.select(_forward_tri_jit, _forward_tri_numpy)


def triangle_count(graph: SocialGraph) -> int:
    """Exact global triangle count via degree-ordered neighbor intersection."""
    n = graph.n_nodes
    if n == 0 or graph.n_edges == 0:
        return 0
    deg = graph.degrees()
    rank = np.lexsort((np.arange(n), deg))  # order: by degree, then node idx
    pos = np.empty(n, dtype=np.int64)
    pos[rank] = np.arange(n)
    # orient each edge from lower to higher rank, relabeled into rank space
    u = pos[graph.edge_u]
    v = pos[graph.edge_v]
    src = np.where(u < v, u, v)
    dst = np.where(u < v, v, u)
    order = np.lexsort((dst, src))
    src, dst = src[order], dst[order]
    counts = np.bincount(src, minlength=n)
    indptr = np.zeros(n + 1, dtype=np.int64)
    np.cumsum(counts, out=indptr[1:])
    return int(forward_tri_step(indptr, dst.astype(np.int64)))


def network_stats(graph: SocialGraph) -> NetworkStats:
    cc, _ = connected_components(graph)
    return NetworkStats(
        nodes=graph.n_nodes,
        edges=graph.n_edges,
        connected_components=cc,
        avg_clustering_coeff=avg_clustering_coefficient(graph),
        triangles=triangle_count(graph),
    )


def cluster_subgraph_stats(
    graph: SocialGraph, assignments: dict[str, int]
) -> list[tuple[object, NetworkStats]]:
    """Induced-subgraph stats per cluster plus a whole-graph 'All' row."""
    for node in assignments:
        if node not in graph.index:
            raise UnknownNode(node)
    clusters = sorted(set(assignments.values()))
    rows: list[tuple[object, NetworkStats]] = []
    for c in clusters:
        members = [graph.index[nid] for nid, cc in assignments.items() if cc == c]
        members.sort()
        sub = graph.subgraph(members)
        rows.append((c, network_stats(sub)))
    rows.append(("All", network_stats(graph)))
    return rows


def duration_histogram(
    durations: dict[str, float],
    assignments: dict[str, int],
    bin_unit: float = 1000.0,
) -> dict[int, list[tuple[int, int]]]:
    """Per-cluster histogram of durations with bin = floor(duration/bin_unit).

    Only nodes present in both maps are counted; zero-count bins are omitted.
    """
    if bin_unit <= 0:
        raise InvalidSpec("bin_unit must be > 0")
    counts: dict[int, dict[int, int]] = {}
    for node, dur in durations.items():
        if dur < 0:
            raise NegativeDuration(f"negative duration for {node!r}: {dur}")
        if node not in assignments:
            continue
        c = assignments[node]
        b = int(np.floor(dur / bin_unit))
        counts.setdefault(c, {})
        counts[c][b] = counts[c].get(b, 0) + 1
    return {
        c: sorted(bins.items()) for c, bins in sorted(counts.items())
    }
