"""Node embeddings: random-walk skip-gram (DeepWalk-style) and edge-sampling
first/second-order proximity training (LINE-style).

Both trainers share one negative-sampling SGD step over a sigmoid
dot-product loss; negatives are drawn from a weighted-degree^(3/4) noise
distribution through an alias table. Training kernels are jitted loops with
the pure-Python/numpy twin used when numba is off; serial execution with a
fixed seed is bit-reproducible. On the fallback path the kernels seed and
consume numpy's global legacy RandomState (the jit path uses numba's
isolated internal generator instead).
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field

import numpy as np

from . import accel
from .clustering import ClusterModel, KMeansOpts, kmeans
from .errors import AllZeroWeights, EmptyCorpus, InvalidSpec, NoEdges
from .ingest import SocialGraph

log = logging.getLogger(__name__)


# ---------------------------------------------------------------- alias table

@dataclass
class AliasTable:
    """Vose alias table: O(1) sampling from a discrete distribution."""

    probabilities: np.ndarray
    aliases: np.ndarray

    def sample(self, rng: np.random.Generator, size: int) -> np.ndarray:
        u1 = rng.random(size)
        u2 = rng.random(size)
        n = self.probabilities.shape[0]
        idx = np.minimum((u1 * n).astype(np.int64), n - 1)
        keep = u2 < self.probabilities[idx]
        return np.where(keep, idx, self.aliases[idx])


def build_alias_table(weights) -> AliasTable:
    """Vose construction over nonnegative weights (at least one positive)."""
    w = np.asarray(weights, dtype=np.float64)
    if w.ndim != 1 or w.size == 0:
        raise InvalidSpec("weights must be a nonempty 1-D array")
    if np.any(w < 0) or not np.isfinite(w).all():
        raise InvalidSpec("weights must be finite and nonnegative")
    total = w.sum()
    if total <= 0:
        raise AllZeroWeights("all sampling weights are zero")
    n = w.size
    scaled = w * (n / total)
    prob = np.zeros(n)
    alias = np.zeros(n, dtype=np.int64)
    small = [i for i in range(n) if scaled[i] < 1.0]
    large = [i for i in range(n) if scaled[i] >= 1.0]
    scaled = scaled.copy()
    while small and large:
        s = small.pop()
        l = large.pop()
        prob[s] = scaled[s]
        alias[s] = l
        scaled[l] = (scaled[l] + scaled[s]) - 1.0
        if scaled[l] < 1.0:
            small.append(l)
        else:
            large.append(l)
    for i in large:
        prob[i] = 1.0
    for i in small:  # numerical leftovers
        prob[i] = 1.0
    return AliasTable(probabilities=prob, aliases=alias)


# ---------------------------------------------------------------- jitted core

def _sigmoid(x):
    if x >= 0.0:
        return 1.0 / (1.0 + math.exp(-x))
    e = math.exp(x)
    return e / (1.0 + e)


_sigmoid = accel.njit(_sigmoid)


def _log_sigmoid(x):
    if x >= 0.0:
        return -math.log1p(math.exp(-x))
    return x - math.log1p(math.exp(x))


_log_sigmoid = accel.njit(_log_sigmoid)


def _alias_draw(prob, alias):
    u1 = np.random.random()
    u2 = np.random.random()
    i = int(u1 * prob.shape[0])
    if i >= prob.shape[0]:
        i = prob.shape[0] - 1
    if u2 < prob[i]:
        return i
    return alias[i]


_alias_draw = accel.njit(_alias_draw)


def _sgns_apply(emb, tgt, ctr, tgt_rows, n_tgt, lr, scratch):
    """One negative-sampling SGD step; slot 0 is the positive target.

    Rows marked -1 are skipped. Returns the sample loss (computed before the
    update is applied).
    """
    dim = emb.shape[1]
    for j in range(dim):
        scratch[j] = 0.0
    loss = 0.0
    for s in range(n_tgt):
        row = tgt_rows[s]
        if row < 0:
            continue
        label = 1.0 if s == 0 else 0.0
        x = 0.0
        for j in range(dim):
            x += emb[ctr, j] * tgt[row, j]
        if s == 0:
            loss -= _log_sigmoid(x)
        else:
            loss -= _log_sigmoid(-x)
        g = (_sigmoid(x) - label) * lr
        for j in range(dim):
            scratch[j] += g * tgt[row, j]
            tgt[row, j] -= g * emb[ctr, j]
    for j in range(dim):
        emb[ctr, j] -= scratch[j]
    return loss


_sgns_apply = accel.njit(_sgns_apply)


def _walks_kernel(indptr, indices, gcum, starts, uniforms, out, lengths):
    for i in range(starts.shape[0]):
        node = starts[i]
        out[i, 0] = node
        ln = 1
        for s in range(out.shape[1] - 1):
            lo = indptr[node]
            hi = indptr[node + 1]
            if lo == hi:
                break
            base = gcum[lo - 1] if lo > 0 else 0.0
            thr = base + uniforms[i, s] * (gcum[hi - 1] - base)
            a = lo
            b = hi - 1
            while a < b:
                m = (a + b) // 2
                if gcum[m] > thr:
                    b = m
                else:
                    a = m + 1
            node = indices[a]
            out[i, ln] = node
            ln += 1
        lengths[i] = ln


_walks_jit = accel.njit(_walks_kernel)


def _walks_numpy(indptr, indices, gcum, starts, uniforms, out, lengths):
    node = starts.copy()
    out[:, 0] = node
    lengths[:] = 1
    active = np.arange(starts.shape[0])
    for s in range(out.shape[1] - 1):
        lo = indptr[node[active]]
        hi = indptr[node[active] + 1]
        movable = hi > lo
        active = active[movable]
        if active.size == 0:
            break
        lo = lo[movable]
        hi = hi[movable]
        base = np.where(lo > 0, gcum[lo - 1], 0.0)
        thr = base + uniforms[active, s] * (gcum[hi - 1] - base)
        idx = np.searchsorted(gcum, thr, side="right")
        node[active] = indices[idx]
        out[active, s + 1] = node[active]
        lengths[active] += 1


walks_step = accel.select(_walks_jit, _walks_numpy)


def _skipgram_kernel(
    emb, ctx, walks, lengths, perms, window, n_neg,
    noise_prob, noise_alias, lr_start, lr_end, seed,
):
    np.random.seed(seed)
    epochs = perms.shape[0]
    n_walks = perms.shape[1]
    total = 0
    for w in range(n_walks):
        ln = lengths[w]
        for pos in range(ln):
            lo = pos - window if pos - window > 0 else 0
            hi = pos + window + 1 if pos + window + 1 < ln else ln
            total += hi - lo - 1
    total *= epochs
    losses = np.zeros(epochs)
    counts = np.zeros(epochs)
    scratch = np.zeros(emb.shape[1])
    tgt_rows = np.zeros(n_neg + 1, dtype=np.int64)
    denom = total - 1 if total > 1 else 1
    step = 0
    for ep in range(epochs):
        for wi in range(n_walks):
            w = perms[ep, wi]
            ln = lengths[w]
            for pos in range(ln):
                center = walks[w, pos]
                lo = pos - window if pos - window > 0 else 0
                hi = pos + window + 1 if pos + window + 1 < ln else ln
                for cpos in range(lo, hi):
                    if cpos == pos:
                        continue
                    ctx_node = walks[w, cpos]
                    lr = lr_start + (lr_end - lr_start) * (step / denom)
                    tgt_rows[0] = ctx_node
                    for t in range(n_neg):
                        row = -1
                        for _attempt in range(10):
                            cand = _alias_draw(noise_prob, noise_alias)
                            if cand != ctx_node:
                                row = cand
                                break
                        tgt_rows[t + 1] = row
                    loss = _sgns_apply(
                        emb, ctx, center, tgt_rows, n_neg + 1, lr, scratch
                    )
                    losses[ep] += loss
                    counts[ep] += 1.0
                    step += 1
    for ep in range(epochs):
        if counts[ep] > 0:
            losses[ep] /= counts[ep]
    return losses


_skipgram_kernel = accel.njit(_skipgram_kernel)


def _line_kernel(
    emb, tgt, src, dst, edge_prob, edge_alias, noise_prob, noise_alias,
    n_neg, samples, lr_start, lr_end, seed, loss_bins,
):
    np.random.seed(seed)
    scratch = np.zeros(emb.shape[1])
    tgt_rows = np.zeros(n_neg + 1, dtype=np.int64)
    n_bins = loss_bins.shape[0]
    counts = np.zeros(n_bins)
    denom = samples - 1 if samples > 1 else 1
    for s in range(samples):
        e = _alias_draw(edge_prob, edge_alias)
        u = src[e]
        v = dst[e]
        lr = lr_start + (lr_end - lr_start) * (s / denom)
        tgt_rows[0] = v
        for t in range(n_neg):
            row = -1
            for _attempt in range(10):
                cand = _alias_draw(noise_prob, noise_alias)
                if cand != v:
                    row = cand
                    break
            tgt_rows[t + 1] = row
        loss = _sgns_apply(emb, tgt, u, tgt_rows, n_neg + 1, lr, scratch)
        b = s * n_bins // samples
        loss_bins[b] += loss
        counts[b] += 1.0
    for b in range(n_bins):
        if counts[b] > 0:
            loss_bins[b] /= counts[b]


_line_kernel = accel.njit(_line_kernel)


# ---------------------------------------------------------------- public API

@dataclass
class WalkCorpus:
    """Padded random-walk corpus; row i of `walks` holds walk i, -1 padded."""

    walks: np.ndarray  # (n_walks, walk_length) int64
    lengths: np.ndarray  # (n_walks,) int64
    walks_per_node: int
    walk_length: int
    node_ids: list[str]

    @property
    def n_walks(self) -> int:
        return int(self.walks.shape[0])

    @property
    def n_nodes(self) -> int:
        return len(self.node_ids)

    def sequences(self) -> list[list[int]]:
        return [list(self.walks[i, : self.lengths[i]]) for i in range(self.n_walks)]


@dataclass
class EmbeddingMatrix:
    """Learned node vectors, row order matching node_ids."""

    node_ids: list[str]
    dim: int
    vectors: np.ndarray
    context_vectors: np.ndarray | None = None
    training_loss: list[float] = field(default_factory=list, repr=False)

    def to_json_dict(self) -> dict:
        return {
            "node_ids": list(self.node_ids),
            "dim": self.dim,
            "vectors": self.vectors.tolist(),
        }


def random_walks(
    graph: SocialGraph, walks_per_node: int, walk_length: int, seed: int = 0
) -> WalkCorpus:
    """weighted uniform random walks, `walks_per_node` per start node.

    Start order is shuffled per round (seeded); isolated nodes yield
    length-1 walks. Every walk's hop uniforms are pre-drawn per
    (walk, step), so parallel generation would match serial exactly.
    """
    if walks_per_node < 1 or walk_length < 1:
        raise InvalidSpec("walks_per_node and walk_length must be >= 1")
    n = graph.n_nodes
    if n == 0:
        raise EmptyCorpus("graph has no nodes")
    indptr, indices, w = graph.csr()
    gcum = np.cumsum(w)
    rng = np.random.default_rng(seed)
    starts = np.concatenate(
        [rng.permutation(n) for _ in range(walks_per_node)]
    ).astype(np.int64)
    uniforms = rng.random((starts.size, max(walk_length - 1, 1)))
    out = np.full((starts.size, walk_length), -1, dtype=np.int64)
    lengths = np.zeros(starts.size, dtype=np.int64)
    walks_step(indptr, indices, gcum, starts, uniforms, out, lengths)
    log.info("random walks: %d walks x len %d, seed=%d", starts.size, walk_length, seed)
    return WalkCorpus(
        walks=out,
        lengths=lengths,
        walks_per_node=walks_per_node,
        walk_length=walk_length,
        node_ids=list(graph.node_ids),
    )


def sgns_loss_grad(center, targets, labels):
    """Loss and exact gradients of one negative-sampling step.

    loss = -log sigma(c.t_s) on positive slots, -log sigma(-c.t_s) on
    negatives. Reference implementation checked against finite differences;
    the training kernels apply exactly these gradients.
    """
    center = np.asarray(center, dtype=np.float64)
    targets = np.asarray(targets, dtype=np.float64)
    labels = np.asarray(labels, dtype=np.float64)
    x = targets @ center
    sig = np.where(x >= 0, 1.0 / (1.0 + np.exp(-np.abs(x))),
                   np.exp(-np.abs(x)) / (1.0 + np.exp(-np.abs(x))))
    # stable -log sigma(+-x)
    pos_loss = np.log1p(np.exp(-np.abs(x))) + np.maximum(-x, 0.0)
    neg_loss = np.log1p(np.exp(-np.abs(x))) + np.maximum(x, 0.0)
    loss = float(np.sum(np.where(labels == 1.0, pos_loss, neg_loss)))
    coeff = sig - labels
    grad_center = coeff @ targets
    grad_targets = coeff[:, None] * center[None, :]
    return loss, grad_center, grad_targets


def _noise_table(weights: np.ndarray) -> AliasTable:
    return build_alias_table(np.asarray(weights, dtype=np.float64) ** 0.75)


def skipgram_train(
    corpus: WalkCorpus,
    dim: int = 64,
    window: int = 5,
    negatives: int = 5,
    epochs: int = 5,
    lr_schedule: tuple[float, float] = (0.025, 1e-4),
    seed: int = 0,
    degrees: np.ndarray | None = None,
) -> EmbeddingMatrix:
    """Skip-gram with negative sampling over a walk corpus.

    `degrees` feeds the degree^(3/4) noise distribution; when omitted it is
    estimated from corpus token counts. Negatives colliding with the true
    context are re-drawn up to 10 times, then skipped.
    """
    if corpus.n_walks == 0:
        raise EmptyCorpus("no walks")
    if dim < 1:
        raise InvalidSpec("dim must be >= 1")
    n = corpus.n_nodes
    rng = np.random.default_rng(seed)
    emb = (rng.random((n, dim)) - 0.5) / dim
    ctx = np.zeros((n, dim))
    has_pairs = bool((corpus.lengths > 1).any())
    if not has_pairs:
        return EmbeddingMatrix(corpus.node_ids, dim, emb)
    if degrees is None:
        degrees = np.bincount(
            corpus.walks[corpus.walks >= 0].ravel(), minlength=n
        ).astype(np.float64)
    noise = _noise_table(degrees)
    perms = np.stack([rng.permutation(corpus.n_walks) for _ in range(epochs)])
    losses = _skipgram_kernel(
        emb,
        ctx,
        corpus.walks,
        corpus.lengths,
        perms.astype(np.int64),
        window,
        negatives,
        noise.probabilities,
        noise.aliases,
        float(lr_schedule[0]),
        float(lr_schedule[1]),
        seed & 0xFFFFFFFF,
    )
    log.info("skipgram: dim=%d epochs=%d seed=%d final_loss=%.4f",
             dim, epochs, seed, losses[-1])
    return EmbeddingMatrix(corpus.node_ids, dim, emb, training_loss=list(losses))


def line_train(
    graph: SocialGraph,
    dim: int = 64,
    order: str = "first",
    negatives: int = 5,
    samples: int | None = None,
    lr_schedule: tuple[float, float] = (0.025, 1e-4),
    seed: int = 0,
) -> EmbeddingMatrix:
    """Edge-sampling proximity embedding (first- or second-order).

    Edges are drawn proportionally to weight (each undirected edge in both
    directions); `samples` defaults to 100 x the number of edges.
    """
    if graph.n_edges == 0:
        raise NoEdges("graph has no edges")
    if order not in ("first", "second"):
        raise InvalidSpec(f"unknown order {order!r}")
    if samples is None:
        samples = 100 * graph.n_edges
    n = graph.n_nodes
    rng = np.random.default_rng(seed)
    emb = (rng.random((n, dim)) - 0.5) / dim
    src = np.concatenate([graph.edge_u, graph.edge_v]).astype(np.int64)
    dst = np.concatenate([graph.edge_v, graph.edge_u]).astype(np.int64)
    edge_table = build_alias_table(np.concatenate([graph.weights, graph.weights]))
    noise = _noise_table(graph.strengths())
    if order == "second":
        tgt = np.zeros((n, dim))
    else:
        tgt = emb
    loss_bins = np.zeros(10)
    _line_kernel(
        emb,
        tgt,
        src,
        dst,
        edge_table.probabilities,
        edge_table.aliases,
        noise.probabilities,
        noise.aliases,
        negatives,
        int(samples),
        float(lr_schedule[0]),
        float(lr_schedule[1]),
        seed & 0xFFFFFFFF,
        loss_bins,
    )
    log.info("line(%s): dim=%d samples=%d seed=%d final_loss=%.4f",
             order, dim, samples, seed, loss_bins[-1])
    return EmbeddingMatrix(
        graph.node_ids,
        dim,
        emb,
        context_vectors=tgt if order == "second" else None,
        training_loss=list(loss_bins),
    )


@dataclass
class EmbedOpts:
    dim: int = 64
    walks_per_node: int = 10
    walk_length: int = 40
    window: int = 5
    negatives: int = 5
    epochs: int = 5
    samples_per_edge: int = 100
    order: str = "first"
    lr_schedule: tuple[float, float] = (0.025, 1e-4)
    seed: int = 0


def embed_graph(graph: SocialGraph, method: str, opts: EmbedOpts | None = None) -> EmbeddingMatrix:
    opts = opts or EmbedOpts()
    if method == "deepwalk":
        corpus = random_walks(
            graph, opts.walks_per_node, opts.walk_length, seed=opts.seed
        )
        return skipgram_train(
            corpus,
            dim=opts.dim,
            window=opts.window,
            negatives=opts.negatives,
            epochs=opts.epochs,
            lr_schedule=opts.lr_schedule,
            seed=opts.seed,
            degrees=graph.strengths(),
        )
    if method == "line":
        return line_train(
            graph,
            dim=opts.dim,
            order=opts.order,
            negatives=opts.negatives,
            samples=opts.samples_per_edge * graph.n_edges,
            lr_schedule=opts.lr_schedule,
            seed=opts.seed,
        )
    raise InvalidSpec(f"unknown embedding method {method!r}")


def embed_and_cluster(
    graph: SocialGraph,
    method: str,
    k: int,
    opts: EmbedOpts | None = None,
    kmeans_opts: KMeansOpts | None = None,
) -> ClusterModel:
    """Embed the graph, then k-means the embedding rows into k groups."""
    opts = opts or EmbedOpts()
    embedding = embed_graph(graph, method, opts)
    return kmeans(embedding.vectors, k, kmeans_opts or KMeansOpts(seed=opts.seed))
