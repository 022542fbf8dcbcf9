"""Shared fixtures: warm up the jit kernels once so timed acceptance tests
measure the algorithms, not compilation."""

import numpy as np
import pytest

from playerseg import accel, clustering, dimred, embeddings, graphstats
from playerseg.ingest import SocialGraph


@pytest.fixture(scope="session", autouse=True)
def warm_kernels():
    if not accel.NUMBA_ACTIVE:
        return
    rng = np.random.default_rng(0)
    x = rng.random((8, 3))
    clustering.kmeans(x, 2, clustering.KMeansOpts(n_init=1, seed=0))
    g = SocialGraph.from_edges([("a", "b", 1.0), ("b", "c", 1.0), ("a", "c", 1.0)])
    corpus = embeddings.random_walks(g, 1, 4, seed=0)
    embeddings.skipgram_train(corpus, dim=4, epochs=1, seed=0)
    embeddings.line_train(g, dim=4, samples=10, seed=0)
    graphstats.pagerank(g)
    graphstats.triangle_count(g)
    graphstats.avg_clustering_coefficient(g)
    dimred.tsne(rng.random((20, 3)), perplexity=4, iters=5, seed=0)
