"""K-means over static vectors and multivariate time series.

Lloyd iterations minimize the summed squared Euclidean distance between each
series and its centroid (flattened over time points and features). The
assignment/update/objective kernels come in jitted-loop and vectorized-numpy
flavors; see :mod:`playerseg.accel`.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field

import numpy as np

from . import accel
from .errors import EmptyInput, InvalidSpec, KTooLarge, LengthMismatch
from .ingest import TimeSeriesTensor

log = logging.getLogger(__name__)


# ---------------------------------------------------------------- kernels

def _assign_loops(data, cents):
    n, d = data.shape
    k = cents.shape[0]
    labels = np.zeros(n, dtype=np.int64)
    for i in range(n):
        best = 0
        best_d = np.inf
        for c in range(k):
            s = 0.0
            for j in range(d):
                diff = data[i, j] - cents[c, j]
                s += diff * diff
            if s < best_d:
                best_d = s
                best = c
        labels[i] = best
    return labels


_assign_jit = accel.njit(_assign_loops)


def _assign_numpy(data, cents):
    k = cents.shape[0]
    dists = np.empty((k, data.shape[0]))
    for c in range(k):
        diff = data - cents[c]
        dists[c] = np.einsum("ij,ij->i", diff, diff)
    return np.argmin(dists, axis=0)


assign_step = accel.select(_assign_jit, _assign_numpy)


def _update_loops(data, labels, k):
    n, d = data.shape
    sums = np.zeros((k, d))
    counts = np.zeros(k, dtype=np.int64)
    for i in range(n):
        c = labels[i]
        counts[c] += 1
        for j in range(d):
            sums[c, j] += data[i, j]
    return sums, counts


_update_jit = accel.njit(_update_loops)


def _update_numpy(data, labels, k):
    counts = np.bincount(labels, minlength=k)
    sums = np.zeros((k, data.shape[1]))
    np.add.at(sums, labels, data)
    return sums, counts.astype(np.int64)


update_step = accel.select(_update_jit, _update_numpy)


def _objective_loops(data, cents, labels):
    n, d = data.shape
    total = 0.0
    for i in range(n):
        c = labels[i]
        for j in range(d):
            diff = data[i, j] - cents[c, j]
            total += diff * diff
    return total


_objective_jit = accel.njit(_objective_loops)


def _objective_numpy(data, cents, labels):
    diff = data - cents[labels]
    return float(np.einsum("ij,ij->", diff, diff))


labeled_objective = accel.select(_objective_jit, _objective_numpy)


# ---------------------------------------------------------------- model

@dataclass
class KMeansOpts:
    max_iter: int = 300
    tol: float = 1e-6
    n_init: int = 10
    seed: int = 0
    init: str = "kmeans++"


@dataclass
class ClusterModel:
    """Centroids + assignments + objective of one k-means fit.

    ``objective_histories`` keeps the per-iteration objective of every restart
    (diagnostics; not persisted).
    """

    k: int
    centroids: np.ndarray  # (K, d) or (K, T, d)
    assignments: np.ndarray  # (N,) int64
    objective: float
    iterations_run: int
    converged: bool
    seed: int
    objective_histories: list[list[float]] = field(default_factory=list, repr=False)

    def to_json_dict(self, ids: list[str]) -> dict:
        if len(ids) != len(self.assignments):
            raise LengthMismatch("id list does not match assignments")
        return {
            "K": self.k,
            "centroids": self.centroids.tolist(),
            "assignments": {i: int(c) for i, c in zip(ids, self.assignments)},
            "objective": float(self.objective),
            "iterations_run": self.iterations_run,
            "converged": self.converged,
            "seed": self.seed,
        }


def init_centroids(
    data: np.ndarray, k: int, method: str = "kmeans++", seed: int = 0
) -> np.ndarray:
    """Pick K initial centroids from the rows of `data`.

    kmeans++ (default) draws the first centroid uniformly and the rest
    proportionally to the squared distance to the nearest chosen centroid,
    so distinct points stay distinct while K <= #distinct rows.
    """
    data = np.ascontiguousarray(data, dtype=np.float64)
    n = data.shape[0]
    if n == 0:
        raise EmptyInput("no data points")
    if k > n:
        raise KTooLarge(k, n)
    if k < 1:
        raise InvalidSpec("K must be >= 1")
    rng = np.random.default_rng(seed)
    if method == "random":
        return data[rng.choice(n, size=k, replace=False)].copy()
    if method != "kmeans++":
        raise InvalidSpec(f"unknown init method {method!r}")
    chosen = np.empty(k, dtype=np.int64)
    chosen[0] = rng.integers(n)
    diff = data - data[chosen[0]]
    d2 = np.einsum("ij,ij->i", diff, diff)
    for j in range(1, k):
        total = d2.sum()
        if total > 0:
            idx = rng.choice(n, p=d2 / total)
        else:
            # every remaining point coincides with a centroid
            remaining = np.setdiff1d(np.arange(n), chosen[:j])
            idx = rng.choice(remaining)
        chosen[j] = idx
        diff = data - data[idx]
        d2 = np.minimum(d2, np.einsum("ij,ij->i", diff, diff))
    return data[chosen].copy()


def _n_distinct_rows(data: np.ndarray) -> int:
    return np.unique(data, axis=0).shape[0]


def _lloyd(data, cents, max_iter, tol):
    """One Lloyd run. Returns (labels, cents, objective, history, iters, conv)."""
    n = data.shape[0]
    k = cents.shape[0]
    cents = cents.copy()
    history: list[float] = []
    labels = np.zeros(n, dtype=np.int64)
    converged = False
    it = 0
    for it in range(1, max_iter + 1):
        labels = assign_step(data, cents)
        sums, counts = update_step(data, labels, k)
        new_cents = np.empty_like(cents)
        reseeded = False
        used: set[int] = set()
        for c in range(k):
            if counts[c] > 0:
                new_cents[c] = sums[c] / counts[c]
            else:
                # reseed at the point farthest from the empty centroid
                diff = data - cents[c]
                far = np.einsum("ij,ij->i", diff, diff)
                for taken in used:
                    far[taken] = -1.0
                pick = int(np.argmax(far))
                used.add(pick)
                new_cents[c] = data[pick]
                reseeded = True
        obj = labeled_objective(data, new_cents, labels)
        history.append(float(obj))
        movement = np.sqrt(((new_cents - cents) ** 2).sum(axis=1)).max()
        cents = new_cents
        if not reseeded and movement <= tol:
            converged = True
            break
    obj = history[-1]
    return labels, cents, obj, history, it, converged


def _fill_empty_clusters(data, cents, labels, k):
    """Final safety pass: give every empty cluster the point contributing most
    to the objective. Only reachable when Lloyd ended on a reseed iteration."""
    counts = np.bincount(labels, minlength=k)
    if counts.min() > 0 or k > _n_distinct_rows(data):
        return cents, labels
    labels = labels.copy()
    cents = cents.copy()
    for c in range(k):
        if counts[c] > 0:
            continue
        diff = data - cents[labels]
        contrib = np.einsum("ij,ij->i", diff, diff)
        contrib[counts[labels] <= 1] = -1.0  # never empty a donor
        pick = int(np.argmax(contrib))
        counts[labels[pick]] -= 1
        labels[pick] = c
        counts[c] = 1
    for c in range(k):
        members = labels == c
        if members.any():
            cents[c] = data[members].mean(axis=0)
    return cents, labels


def kmeans(
    matrix: np.ndarray, k: int, opts: KMeansOpts | None = None
) -> ClusterModel:
    """Best-of-``n_init`` Lloyd k-means on an N x d matrix."""
    opts = opts or KMeansOpts()
    data = np.ascontiguousarray(matrix, dtype=np.float64)
    if data.ndim != 2 or data.shape[0] == 0:
        raise EmptyInput("expected a nonempty N x d matrix")
    if not np.isfinite(data).all():
        raise InvalidSpec("input contains non-finite values")
    n = data.shape[0]
    if k < 1:
        raise InvalidSpec("K must be >= 1")
    if k > n:
        raise KTooLarge(k, n)

    seeds = np.random.SeedSequence(opts.seed).generate_state(opts.n_init)
    best = None
    histories: list[list[float]] = []
    for r in range(opts.n_init):
        cents0 = init_centroids(data, k, method=opts.init, seed=int(seeds[r]))
        labels, cents, obj, history, iters, conv = _lloyd(
            data, cents0, opts.max_iter, opts.tol
        )
        cents, labels = _fill_empty_clusters(data, cents, labels, k)
        obj = labeled_objective(data, cents, labels)
        histories.append(history)
        if best is None or obj < best[2]:
            best = (labels, cents, obj, iters, conv)
    labels, cents, obj, iters, conv = best
    log.info("kmeans: K=%d N=%d seed=%d objective=%.6g", k, n, opts.seed, obj)
    return ClusterModel(
        k=k,
        centroids=cents,
        assignments=labels,
        objective=float(obj),
        iterations_run=iters,
        converged=conv,
        seed=opts.seed,
        objective_histories=histories,
    )


def ts_kmeans(
    tensor: TimeSeriesTensor, k: int, opts: KMeansOpts | None = None
) -> ClusterModel:
    """Time-series k-means: squared Euclidean distance summed over every
    time point, i.e. plain k-means on the series flattened to length T*d."""
    n, t, d = tensor.values.shape
    model = kmeans(tensor.values.reshape(n, t * d), k, opts)
    model.centroids = model.centroids.reshape(k, t, d)
    return model


def adjusted_rand_index(labels_a, labels_b) -> float:
    """Chance-corrected agreement between two labelings, in [-1, 1]."""
    a = np.asarray(labels_a).ravel()
    b = np.asarray(labels_b).ravel()
    if a.shape != b.shape:
        raise LengthMismatch(f"length {a.size} vs {b.size}")
    if a.size < 2:
        raise LengthMismatch("need at least two points")
    _, ai = np.unique(a, return_inverse=True)
    _, bi = np.unique(b, return_inverse=True)
    n_a = ai.max() + 1
    n_b = bi.max() + 1
    cont = np.zeros((n_a, n_b), dtype=np.int64)
    np.add.at(cont, (ai, bi), 1)

    def comb2(x):
        return x * (x - 1) / 2.0

    index = comb2(cont).sum()
    sum_a = comb2(cont.sum(axis=1)).sum()
    sum_b = comb2(cont.sum(axis=0)).sum()
    expected = sum_a * sum_b / comb2(a.size)
    max_index = (sum_a + sum_b) / 2.0
    if max_index == expected:
        return 1.0
    return float((index - expected) / (max_index - expected))
