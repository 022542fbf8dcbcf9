import numpy as np
import pytest

from playerseg import embeddings, errors
from playerseg.clustering import adjusted_rand_index
from playerseg.embeddings import (
    EmbedOpts,
    build_alias_table,
    embed_and_cluster,
    line_train,
    random_walks,
    sgns_loss_grad,
    skipgram_train,
)
from playerseg.ingest import SocialGraph


def clique_pair_graph(size=6):
    edges = [(f"a{i}", f"a{j}", 1.0) for i in range(size) for j in range(i + 1, size)]
    edges += [(f"b{i}", f"b{j}", 1.0) for i in range(size) for j in range(i + 1, size)]
    return SocialGraph.from_edges(edges)


def planted_partition(n_per_side, p_in, p_out, seed):
    rng = np.random.default_rng(seed)
    n = 2 * n_per_side
    names = [f"v{i}" for i in range(n)]
    edges = []
    for i in range(n):
        for j in range(i + 1, n):
            p = p_in if (i < n_per_side) == (j < n_per_side) else p_out
            if rng.random() < p:
                edges.append((names[i], names[j], 1.0))
    labels = np.array([0] * n_per_side + [1] * n_per_side)
    return SocialGraph.from_edges(edges, extra_nodes=names), labels


def mean_cosines(vectors, labels):
    normed = vectors / np.linalg.norm(vectors, axis=1, keepdims=True)
    sims = normed @ normed.T
    n = len(labels)
    intra, inter = [], []
    for i in range(n):
        for j in range(i + 1, n):
            (intra if labels[i] == labels[j] else inter).append(sims[i, j])
    return float(np.mean(intra)), float(np.mean(inter))


class TestAliasTable:
    def test_uniform_two(self):
        table = build_alias_table([1.0, 1.0])
        assert table.probabilities.tolist() == [1.0, 1.0]
        rng = np.random.default_rng(0)
        draws = table.sample(rng, 50_000)
        freq = np.bincount(draws, minlength=2) / draws.size
        assert freq[0] == pytest.approx(0.5, abs=0.01)

    def test_three_to_one_frequencies(self):
        table = build_alias_table([3.0, 1.0])
        rng = np.random.default_rng(1)
        draws = table.sample(rng, 100_000)
        freq = np.bincount(draws, minlength=2) / draws.size
        assert freq[0] == pytest.approx(0.75, abs=0.01)
        assert freq[1] == pytest.approx(0.25, abs=0.01)

    def test_zero_weight_never_sampled(self):
        table = build_alias_table([0.0, 5.0])
        rng = np.random.default_rng(2)
        assert set(table.sample(rng, 1000).tolist()) == {1}

    def test_construction_identity(self):
        # prob[i] + sum_{j: alias[j]=i} (1 - prob[j]) == n * w_i / sum(w)
        rng = np.random.default_rng(3)
        for _ in range(20):
            n = int(rng.integers(1, 40))
            w = rng.uniform(0, 5, size=n)
            w[rng.integers(n)] += 1e-3  # keep at least one positive
            table = build_alias_table(w)
            mass = table.probabilities.copy()
            for j in range(n):
                if table.probabilities[j] < 1.0:
                    mass[table.aliases[j]] += 1.0 - table.probabilities[j]
            expected = n * w / w.sum()
            assert np.abs(mass - expected).max() <= 1e-12

    def test_all_zero_weights(self):
        with pytest.raises(errors.AllZeroWeights):
            build_alias_table([0.0, 0.0])


class TestRandomWalks:
    def test_isolated_node_walks(self):
        g = SocialGraph.from_edges([("a", "b", 1.0)], extra_nodes=["a", "b", "iso"])
        corpus = random_walks(g, 3, 5, seed=0)
        iso = g.index["iso"]
        iso_walks = [w for w in corpus.sequences() if w[0] == iso]
        assert len(iso_walks) == 3
        assert all(w == [iso] for w in iso_walks)

    def test_walk_count_includes_isolated(self):
        g = SocialGraph.from_edges([("a", "b", 1.0)], extra_nodes=["a", "b", "iso"])
        corpus = random_walks(g, 4, 6, seed=1)
        assert corpus.n_walks == 4 * 3

    def test_walks_never_cross_components(self):
        g = clique_pair_graph(5)
        side = {g.index[f"a{i}"] for i in range(5)}
        corpus = random_walks(g, 5, 12, seed=2)
        for walk in corpus.sequences():
            in_a = walk[0] in side
            assert all((node in side) == in_a for node in walk)

    def test_single_edge_alternates(self):
        g = SocialGraph.from_edges([("a", "b", 1.0)])
        corpus = random_walks(g, 2, 4, seed=3)
        a, b = g.index["a"], g.index["b"]
        for walk in corpus.sequences():
            expected = [walk[0]]
            for _ in range(3):
                expected.append(a if expected[-1] == b else b)
            assert walk == expected

    def test_every_step_is_an_edge(self):
        rng = np.random.default_rng(4)
        edges = []
        for i in range(20):
            for j in range(i + 1, 20):
                if rng.random() < 0.15:
                    edges.append((f"n{i}", f"n{j}", float(rng.uniform(0.5, 2))))
        g = SocialGraph.from_edges(edges, extra_nodes=[f"n{i}" for i in range(20)])
        edge_set = {(g.index[u], g.index[v]) for u, v, _ in g.edges()}
        edge_set |= {(v, u) for u, v in edge_set}
        corpus = random_walks(g, 4, 10, seed=5)
        for walk in corpus.sequences():
            for a, b in zip(walk, walk[1:]):
                assert (a, b) in edge_set

    def test_seed_determinism(self):
        g = clique_pair_graph(4)
        c1 = random_walks(g, 3, 8, seed=9)
        c2 = random_walks(g, 3, 8, seed=9)
        assert np.array_equal(c1.walks, c2.walks)


class TestGradients:
    def finite_difference(self, f, x, h=1e-5):
        grad = np.zeros_like(x)
        flat = x.ravel()
        g = grad.ravel()
        for i in range(flat.size):
            orig = flat[i]
            flat[i] = orig + h
            hi = f()
            flat[i] = orig - h
            lo = f()
            flat[i] = orig
            g[i] = (hi - lo) / (2 * h)
        return grad

    @pytest.mark.parametrize("seed", [0, 1, 2])
    def test_sgns_gradient_matches_fd(self, seed):
        # covers the skip-gram loss and both proximity losses (same form:
        # center x targets with one positive slot and negatives)
        rng = np.random.default_rng(seed)
        dim = 7
        center = rng.normal(scale=0.7, size=dim)
        targets = rng.normal(scale=0.7, size=(4, dim))
        labels = np.array([1.0, 0.0, 0.0, 0.0])

        loss, grad_center, grad_targets = sgns_loss_grad(center, targets, labels)
        assert np.isfinite(loss)

        fd_center = self.finite_difference(
            lambda: sgns_loss_grad(center, targets, labels)[0], center
        )
        rel = np.abs(grad_center - fd_center) / np.maximum(np.abs(fd_center), 1e-8)
        assert rel.max() <= 1e-4

        fd_targets = self.finite_difference(
            lambda: sgns_loss_grad(center, targets, labels)[0], targets
        )
        rel = np.abs(grad_targets - fd_targets) / np.maximum(np.abs(fd_targets), 1e-8)
        assert rel.max() <= 1e-4

    def test_kernel_update_applies_exact_gradients(self):
        # the jitted SGD step must move vectors by exactly -lr * grad
        rng = np.random.default_rng(3)
        dim = 6
        emb = rng.normal(scale=0.5, size=(3, dim))
        tgt = rng.normal(scale=0.5, size=(5, dim))
        rows = np.array([2, 4, 1], dtype=np.int64)
        labels = np.array([1.0, 0.0, 0.0])
        lr = 0.01
        loss_ref, g_center, g_targets = sgns_loss_grad(emb[0], tgt[rows], labels)

        emb2, tgt2 = emb.copy(), tgt.copy()
        scratch = np.zeros(dim)
        loss = embeddings._sgns_apply(emb2, tgt2, 0, rows, 3, lr, scratch)
        assert loss == pytest.approx(loss_ref, rel=1e-12)
        assert np.allclose(emb2[0], emb[0] - lr * g_center, atol=1e-12)
        for s, row in enumerate(rows):
            assert np.allclose(tgt2[row], tgt[row] - lr * g_targets[s], atol=1e-12)


class TestSkipgram:
    def test_loss_decreases_across_epochs(self):
        g, _ = planted_partition(12, 0.5, 0.05, seed=6)
        corpus = random_walks(g, 6, 10, seed=6)
        emb = skipgram_train(corpus, dim=16, epochs=4, seed=6)
        assert all(np.isfinite(emb.training_loss))
        assert emb.training_loss[-1] < emb.training_loss[0]

    def test_disjoint_cliques_cosine_separation(self):
        edges = [(f"a{i}", f"a{j}", 1.0) for i in range(30) for j in range(i + 1, 30)]
        edges += [(f"b{i}", f"b{j}", 1.0) for i in range(30) for j in range(i + 1, 30)]
        g = SocialGraph.from_edges(edges)
        corpus = random_walks(g, 5, 20, seed=7)
        emb = skipgram_train(corpus, dim=32, epochs=3, seed=7, degrees=g.strengths())
        labels = np.array([0 if nid.startswith("a") else 1 for nid in emb.node_ids])
        intra, inter = mean_cosines(emb.vectors, labels)
        assert intra - inter >= 0.2

    def test_isolated_node_keeps_init(self):
        g = SocialGraph.from_edges([("a", "b", 1.0)], extra_nodes=["a", "b", "iso"])
        corpus = random_walks(g, 2, 6, seed=8)
        rng = np.random.default_rng(8)
        expected_init = (rng.random((3, 16)) - 0.5) / 16
        emb = skipgram_train(corpus, dim=16, epochs=2, seed=8)
        iso = g.index["iso"]
        assert np.array_equal(emb.vectors[iso], expected_init[iso])

    def test_bit_reproducible(self):
        g = clique_pair_graph(5)
        corpus = random_walks(g, 3, 8, seed=10)
        a = skipgram_train(corpus, dim=12, epochs=2, seed=10)
        b = skipgram_train(corpus, dim=12, epochs=2, seed=10)
        assert np.array_equal(a.vectors, b.vectors)

    def test_empty_corpus(self):
        corpus = embeddings.WalkCorpus(
            walks=np.empty((0, 4), dtype=np.int64),
            lengths=np.empty(0, dtype=np.int64),
            walks_per_node=1,
            walk_length=4,
            node_ids=[],
        )
        with pytest.raises(errors.EmptyCorpus):
            skipgram_train(corpus, dim=4)


class TestLine:
    def test_loss_decreases_on_smallest_graph(self):
        g = SocialGraph.from_edges([("a", "b", 1.0)])
        emb = line_train(g, dim=8, order="first", samples=4000, seed=11)
        assert emb.training_loss[-1] < emb.training_loss[0]

    def test_first_order_cosine_separation(self):
        edges = [(f"a{i}", f"a{j}", 1.0) for i in range(30) for j in range(i + 1, 30)]
        edges += [(f"b{i}", f"b{j}", 1.0) for i in range(30) for j in range(i + 1, 30)]
        g = SocialGraph.from_edges(edges)
        emb = line_train(g, dim=32, order="first", seed=12)
        labels = np.array([0 if nid.startswith("a") else 1 for nid in emb.node_ids])
        intra, inter = mean_cosines(emb.vectors, labels)
        assert intra - inter >= 0.2

    def test_second_order_has_context_vectors(self):
        g = clique_pair_graph(5)
        emb = line_train(g, dim=8, order="second", samples=5000, seed=13)
        assert emb.context_vectors is not None
        assert emb.context_vectors.shape == emb.vectors.shape

    def test_no_edges(self):
        g = SocialGraph.from_edges([], extra_nodes=["a", "b"])
        with pytest.raises(errors.NoEdges):
            line_train(g, dim=4)

    def test_bit_reproducible(self):
        g = clique_pair_graph(4)
        a = line_train(g, dim=8, samples=3000, seed=14)
        b = line_train(g, dim=8, samples=3000, seed=14)
        assert np.array_equal(a.vectors, b.vectors)


class TestEmbedAndCluster:
    def test_deepwalk_recovers_planted_partition(self):
        g, labels = planted_partition(30, 0.3, 0.02, seed=15)
        model = embed_and_cluster(g, "deepwalk", 2, EmbedOpts(seed=15))
        assert adjusted_rand_index(model.assignments, labels) >= 0.9

    def test_line_recovers_planted_partition(self):
        g, labels = planted_partition(30, 0.3, 0.02, seed=16)
        model = embed_and_cluster(g, "line", 2, EmbedOpts(seed=16))
        assert adjusted_rand_index(model.assignments, labels) >= 0.9

    def test_k1_single_cluster(self):
        g = clique_pair_graph(4)
        model = embed_and_cluster(g, "deepwalk", 1, EmbedOpts(dim=8, epochs=1, seed=17))
        assert set(model.assignments) == {0}

    def test_unknown_method(self):
        g = clique_pair_graph(3)
        with pytest.raises(errors.InvalidSpec):
            embed_and_cluster(g, "node2vec", 2)


class TestWalkOrdering:
    def test_start_order_shuffled_per_round(self):
        g = clique_pair_graph(10)
        n = g.n_nodes
        corpus = random_walks(g, 3, 5, seed=4)
        starts = corpus.walks[:, 0].reshape(3, n)
        # each round visits every node exactly once
        for r in range(3):
            assert sorted(starts[r].tolist()) == list(range(n))
        # rounds are shuffled relative to each other (seeded permutations)
        assert not np.array_equal(starts[0], starts[1])

    def test_different_seeds_different_orders(self):
        g = clique_pair_graph(10)
        a = random_walks(g, 1, 5, seed=1).walks[:, 0]
        b = random_walks(g, 1, 5, seed=2).walks[:, 0]
        assert not np.array_equal(a, b)


class TestAliasDeterminism:
    def test_seeded_draws_reproducible(self):
        table = build_alias_table([0.2, 0.5, 0.3, 1.0])
        a = table.sample(np.random.default_rng(42), 1000)
        b = table.sample(np.random.default_rng(42), 1000)
        assert np.array_equal(a, b)


class TestWeightedWalks:
    def test_hop_frequencies_follow_edge_weights(self):
        # center node with two neighbors at weights 3:1
        g = SocialGraph.from_edges([("c", "heavy", 3.0), ("c", "light", 1.0)])
        corpus = random_walks(g, 400, 2, seed=6)
        c = g.index["c"]
        heavy = g.index["heavy"]
        hops = [w[1] for w in corpus.sequences() if w[0] == c and len(w) > 1]
        assert len(hops) == 400
        frac_heavy = sum(1 for h in hops if h == heavy) / len(hops)
        assert abs(frac_heavy - 0.75) <= 0.05
