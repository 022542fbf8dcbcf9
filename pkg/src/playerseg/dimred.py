"""2-D projections for cluster scatter plots: PCA (shared with feature
scoring) and exact quadratic-cost t-SNE.

t-SNE follows the classic recipe: per-row Gaussian bandwidths found by
binary search on the entropy, symmetrized affinities, Student-t low-dim
kernel, gradient descent with momentum 0.5 -> 0.8 at iteration 250 and x12
early exaggeration for the first 250 iterations.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass

import numpy as np

from . import accel
from .errors import (
    DimensionMismatch,
    EmptyInput,
    InvalidSpec,
    PerplexityTooLarge,
    RankDeficient,
)

log = logging.getLogger(__name__)


@dataclass
class PcaModel:
    mean: np.ndarray
    components: np.ndarray  # (r, d) orthonormal rows, variance-descending
    explained_variance_ratio: np.ndarray  # (r,)


@dataclass
class Projection2D:
    ids: list[str]
    coords: np.ndarray  # (N, 2)
    method: str
    params: dict


def pca_fit(matrix: np.ndarray, r: int) -> PcaModel:
    """Centered SVD with a fixed sign convention: the largest-|entry|
    coordinate of each component is positive."""
    x = np.asarray(matrix, dtype=np.float64)
    if x.ndim != 2 or x.shape[0] < 2:
        raise EmptyInput("need an N x d matrix with N >= 2")
    n, d = x.shape
    if not (1 <= r <= min(n - 1, d)):
        raise InvalidSpec(f"r={r} outside [1, min(N-1, d)]")
    mean = x.mean(axis=0)
    centered = x - mean
    _, s, vt = np.linalg.svd(centered, full_matrices=False)
    if s[0] > 0:
        rank = int((s > s[0] * max(n, d) * np.finfo(np.float64).eps).sum())
    else:
        rank = 0
    if r > rank:
        raise RankDeficient(f"requested {r} components but rank is {rank}")
    components = vt[:r].copy()
    for row in components:
        if row[np.argmax(np.abs(row))] < 0:
            row *= -1.0
    variances = s**2 / (n - 1)
    total = variances.sum()
    ratio = variances[:r] / total if total > 0 else np.zeros(r)
    return PcaModel(mean=mean, components=components, explained_variance_ratio=ratio)


def pca_project(
    model: PcaModel, matrix: np.ndarray, ids: list[str] | None = None
) -> Projection2D:
    """Project onto the first two fitted components."""
    if model.components.shape[0] < 2:
        raise InvalidSpec("model must have at least 2 components")
    x = np.asarray(matrix, dtype=np.float64)
    if x.ndim != 2 or x.shape[1] != model.components.shape[1]:
        raise DimensionMismatch(
            f"matrix has {x.shape[-1]} columns, model expects "
            f"{model.components.shape[1]}"
        )
    coords = (x - model.mean) @ model.components[:2].T
    if ids is None:
        ids = [str(i) for i in range(x.shape[0])]
    return Projection2D(ids=list(ids), coords=coords, method="pca", params={})


# ---------------------------------------------------------------- t-SNE

def _pairwise_sq_loops(x, out):
    n, d = x.shape
    for i in range(n):
        out[i, i] = 0.0
        for j in range(i + 1, n):
            s = 0.0
            for k in range(d):
                diff = x[i, k] - x[j, k]
                s += diff * diff
            out[i, j] = s
            out[j, i] = s


_pairwise_sq_jit = accel.njit(_pairwise_sq_loops)


def _pairwise_sq_numpy(x, out):
    sq = np.einsum("ij,ij->i", x, x)
    np.subtract(sq[:, None] + sq[None, :], 2.0 * (x @ x.T), out=out)
    np.maximum(out, 0.0, out=out)
    np.fill_diagonal(out, 0.0)


pairwise_sq_step = accel.select(_pairwise_sq_jit, _pairwise_sq_numpy)


def pairwise_sq_dists(x: np.ndarray) -> np.ndarray:
    x = np.ascontiguousarray(x, dtype=np.float64)
    out = np.empty((x.shape[0], x.shape[0]))
    pairwise_sq_step(x, out)
    return out


def _row_affinity(d_row: np.ndarray, beta: float, i: int):
    """Conditional affinities of row i at precision beta; returns (H, p)."""
    p = np.exp(-d_row * beta)
    p[i] = 0.0
    z = p.sum()
    if z <= 0:
        p[:] = 0.0
        return 0.0, p
    h = np.log(z) + beta * float((d_row * p).sum()) / z
    return h, p / z


def tsne_affinities(
    matrix: np.ndarray, perplexity: float = 30.0
) -> tuple[np.ndarray, np.ndarray]:
    """Symmetrized t-SNE affinity matrix P (sums to 1) and per-row precisions.

    Each row's Gaussian bandwidth is binary-searched until the entropy is
    within 1e-5 nats of log(perplexity), far inside the 1e-3-bit contract.
    """
    x = np.asarray(matrix, dtype=np.float64)
    n = x.shape[0]
    if not 3 * perplexity < n:
        raise PerplexityTooLarge(f"need 3*perplexity < N, got {perplexity} vs {n}")
    d = pairwise_sq_dists(x)
    target = np.log(perplexity)
    cond = np.zeros((n, n))
    betas = np.ones(n)
    for i in range(n):
        beta = 1.0
        beta_min, beta_max = -np.inf, np.inf
        h, p = _row_affinity(d[i], beta, i)
        for _ in range(200):
            if abs(h - target) < 1e-5:
                break
            if h > target:  # entropy too high -> narrow the kernel
                beta_min = beta
                beta = beta * 2.0 if beta_max == np.inf else (beta + beta_max) / 2.0
            else:
                beta_max = beta
                beta = beta / 2.0 if beta_min == -np.inf else (beta + beta_min) / 2.0
            h, p = _row_affinity(d[i], beta, i)
        cond[i] = p
        betas[i] = beta
    p_sym = (cond + cond.T) / (2.0 * n)
    return p_sym, betas


def _tsne_forces_loops(p, y, grad):
    n = y.shape[0]
    z = 0.0
    for i in range(n):
        for j in range(i + 1, n):
            d0 = y[i, 0] - y[j, 0]
            d1 = y[i, 1] - y[j, 1]
            z += 2.0 / (1.0 + d0 * d0 + d1 * d1)
    for i in range(n):
        g0 = 0.0
        g1 = 0.0
        for j in range(n):
            if i == j:
                continue
            d0 = y[i, 0] - y[j, 0]
            d1 = y[i, 1] - y[j, 1]
            num = 1.0 / (1.0 + d0 * d0 + d1 * d1)
            coef = 4.0 * (p[i, j] - num / z) * num
            g0 += coef * d0
            g1 += coef * d1
        grad[i, 0] = g0
        grad[i, 1] = g1


_tsne_forces_jit = accel.njit(_tsne_forces_loops)


def _tsne_forces_numpy(p, y, grad):
    diff0 = y[:, 0:1] - y[:, 0:1].T
    diff1 = y[:, 1:2] - y[:, 1:2].T
    num = 1.0 / (1.0 + diff0**2 + diff1**2)
    np.fill_diagonal(num, 0.0)
    z = num.sum()
    coef = 4.0 * (p - num / z) * num
    grad[:, 0] = (coef * diff0).sum(axis=1)
    grad[:, 1] = (coef * diff1).sum(axis=1)


tsne_forces_step = accel.select(_tsne_forces_jit, _tsne_forces_numpy)


def tsne_grad(p: np.ndarray, y: np.ndarray) -> np.ndarray:
    """KL gradient of the embedding (the exact quantity the optimizer uses)."""
    grad = np.empty_like(y)
    tsne_forces_step(
        np.ascontiguousarray(p), np.ascontiguousarray(y, dtype=np.float64), grad
    )
    return grad


def tsne_kl(p: np.ndarray, y: np.ndarray) -> float:
    """KL(P || Q) of an embedding against fixed affinities."""
    d = pairwise_sq_dists(y)
    num = 1.0 / (1.0 + d)
    np.fill_diagonal(num, 0.0)
    q = num / num.sum()
    mask = p > 0
    pc = p[mask]
    qc = np.maximum(q[mask], 1e-12)
    return float((pc * np.log(pc / qc)).sum())


def tsne(
    matrix: np.ndarray,
    perplexity: float = 30.0,
    iters: int = 1000,
    lr: float = 200.0,
    seed: int = 0,
    ids: list[str] | None = None,
) -> Projection2D:
    """Exact (quadratic) t-SNE to 2-D; deterministic given the seed."""
    x = np.asarray(matrix, dtype=np.float64)
    n = x.shape[0]
    p, _ = tsne_affinities(x, perplexity)
    rng = np.random.default_rng(seed)
    y = rng.standard_normal((n, 2)) * 1e-4
    velocity = np.zeros_like(y)
    grad = np.empty_like(y)
    exaggerated = p * 12.0
    for it in range(iters):
        p_eff = exaggerated if it < 250 else p
        momentum = 0.5 if it < 250 else 0.8
        tsne_forces_step(p_eff, y, grad)
        velocity = momentum * velocity - lr * grad
        y = y + velocity
        y = y - y.mean(axis=0)
    if ids is None:
        ids = [str(i) for i in range(n)]
    log.info("tsne: N=%d perplexity=%g iters=%d seed=%d kl=%.4f",
             n, perplexity, iters, seed, tsne_kl(p, y))
    return Projection2D(
        ids=list(ids),
        coords=y,
        method="tsne",
        params={"perplexity": perplexity, "iters": iters, "lr": lr, "seed": seed},
    )
