import numpy as np
import pytest

from playerseg import dimred, errors
from playerseg.clustering import KMeansOpts, adjusted_rand_index, kmeans
from playerseg.dimred import (
    pca_fit,
    pca_project,
    tsne,
    tsne_affinities,
    tsne_grad,
    tsne_kl,
)


def blobs(n_per, centers, sigma, seed, dim=None):
    rng = np.random.default_rng(seed)
    centers = np.asarray(centers, dtype=np.float64)
    dim = dim or centers.shape[1]
    xs, labels = [], []
    for c, center in enumerate(centers):
        xs.append(center + rng.normal(scale=sigma, size=(n_per, dim)))
        labels += [c] * n_per
    return np.vstack(xs), np.array(labels)


class TestPcaFit:
    def test_line_structure(self):
        t = np.linspace(-2, 2, 50)
        x = np.column_stack([t, 2 * t])
        model = pca_fit(x, 1)
        expected = np.array([1.0, 2.0]) / np.sqrt(5)
        assert np.allclose(model.components[0], expected, atol=1e-12)
        assert model.explained_variance_ratio[0] == pytest.approx(1.0)

    def test_full_rank_reconstruction(self):
        rng = np.random.default_rng(0)
        x = rng.normal(size=(30, 5))
        r = min(29, 5)
        model = pca_fit(x, r)
        centered = x - model.mean
        recon = model.mean + centered @ model.components.T @ model.components
        assert np.abs(x - recon).max() <= 1e-8

    def test_variances_match_eigen_oracle(self):
        rng = np.random.default_rng(1)
        x = rng.normal(size=(40, 6)) @ np.diag([3.0, 2.0, 1.5, 1.0, 0.5, 0.1])
        model = pca_fit(x, 6)
        cov = np.cov(x, rowvar=False)
        eigvals = np.sort(np.linalg.eigvalsh(cov))[::-1]
        ratios = eigvals / eigvals.sum()
        assert np.allclose(model.explained_variance_ratio, ratios, rtol=1e-8)

    def test_components_orthonormal(self):
        rng = np.random.default_rng(2)
        x = rng.normal(size=(25, 4))
        model = pca_fit(x, 4)
        gram = model.components @ model.components.T
        assert np.abs(gram - np.eye(4)).max() <= 1e-10

    def test_ratios_non_increasing(self):
        rng = np.random.default_rng(3)
        x = rng.normal(size=(50, 5))
        model = pca_fit(x, 5)
        assert (np.diff(model.explained_variance_ratio) <= 1e-15).all()

    def test_sign_convention(self):
        rng = np.random.default_rng(4)
        x = rng.normal(size=(30, 4))
        model = pca_fit(x, 4)
        for row in model.components:
            assert row[np.argmax(np.abs(row))] > 0

    def test_rank_deficient(self):
        t = np.arange(10.0)
        x = np.column_stack([t, 2 * t, 3 * t])  # rank 1 once centered
        with pytest.raises(errors.RankDeficient):
            pca_fit(x, 2)

    def test_translation_invariance(self):
        rng = np.random.default_rng(5)
        x = rng.normal(size=(20, 3))
        shift = np.array([5.0, -3.0, 11.0])
        a = pca_fit(x, 2)
        b = pca_fit(x + shift, 2)
        assert np.allclose(b.mean, a.mean + shift, atol=1e-12)
        assert np.allclose(a.components, b.components, atol=1e-9)
        pa = pca_project(a, x).coords
        pb = pca_project(b, x + shift).coords
        assert np.abs(pa - pb).max() <= 1e-9


class TestPcaProject:
    def test_mean_projects_to_origin(self):
        rng = np.random.default_rng(6)
        x = rng.normal(size=(15, 3))
        model = pca_fit(x, 2)
        proj = pca_project(model, x.mean(axis=0, keepdims=True))
        assert np.allclose(proj.coords, 0.0, atol=1e-12)

    def test_coordinate_variances_match_top2(self):
        rng = np.random.default_rng(7)
        x = rng.normal(size=(60, 4)) @ np.diag([4.0, 2.0, 1.0, 0.3])
        model = pca_fit(x, 4)
        coords = pca_project(model, x).coords
        var = coords.var(axis=0, ddof=1)
        cov = np.cov(x, rowvar=False)
        eigvals = np.sort(np.linalg.eigvalsh(cov))[::-1]
        assert np.allclose(var, eigvals[:2], rtol=1e-8)

    def test_unit_component_offset(self):
        rng = np.random.default_rng(8)
        x = rng.normal(size=(20, 3))
        model = pca_fit(x, 2)
        point = (model.mean + model.components[0]).reshape(1, -1)
        proj = pca_project(model, point)
        assert np.allclose(proj.coords, [[1.0, 0.0]], atol=1e-10)

    def test_dimension_mismatch(self):
        model = pca_fit(np.random.default_rng(9).normal(size=(10, 3)), 2)
        with pytest.raises(errors.DimensionMismatch):
            pca_project(model, np.zeros((5, 4)))


class TestTsneAffinities:
    def test_symmetric_and_sums_to_one(self):
        rng = np.random.default_rng(10)
        x = rng.normal(size=(40, 5))
        p, _ = tsne_affinities(x, perplexity=10)
        assert np.allclose(p, p.T, atol=1e-15)
        assert p.sum() == pytest.approx(1.0, abs=1e-9)
        assert (np.diag(p) == 0).all()

    def test_per_row_entropy_hits_target(self):
        rng = np.random.default_rng(11)
        x = rng.normal(size=(60, 4))
        perplexity = 15
        d = dimred.pairwise_sq_dists(x)
        _, betas = tsne_affinities(x, perplexity)
        for i in range(60):
            p = np.exp(-d[i] * betas[i])
            p[i] = 0.0
            p /= p.sum()
            nz = p[p > 0]
            h_bits = -(nz * np.log2(nz)).sum()
            assert abs(h_bits - np.log2(perplexity)) <= 1e-3

    def test_perplexity_too_large(self):
        with pytest.raises(errors.PerplexityTooLarge):
            tsne_affinities(np.zeros((10, 2)), perplexity=5)


class TestTsneGradient:
    def test_matches_finite_differences(self):
        rng = np.random.default_rng(12)
        x = rng.normal(size=(6, 3))
        p, _ = tsne_affinities(x, perplexity=1.5)
        y = rng.normal(size=(6, 2))
        grad = tsne_grad(p, y)
        h = 1e-6
        fd = np.zeros_like(y)
        for i in range(6):
            for j in range(2):
                y[i, j] += h
                hi = tsne_kl(p, y)
                y[i, j] -= 2 * h
                lo = tsne_kl(p, y)
                y[i, j] += h
                fd[i, j] = (hi - lo) / (2 * h)
        rel = np.abs(grad - fd) / np.maximum(np.abs(fd), 1e-8)
        assert rel.max() <= 1e-4


class TestTsne:
    def test_three_blobs_recovered(self):
        centers = np.zeros((3, 5))
        centers[1, 0] = 10.0
        centers[2, 1] = 10.0
        x, labels = blobs(50, centers, sigma=0.1, seed=13)
        proj = tsne(x, perplexity=30, iters=1000, seed=13)
        model = kmeans(proj.coords, 3, KMeansOpts(seed=13))
        assert adjusted_rand_index(model.assignments, labels) >= 0.95

    def test_kl_improves_after_exaggeration(self):
        centers = np.zeros((3, 4))
        centers[1, 0] = 8.0
        centers[2, 1] = 8.0
        x, _ = blobs(25, centers, sigma=0.3, seed=14)
        p, _ = tsne_affinities(x, perplexity=12)
        mid = tsne(x, perplexity=12, iters=500, seed=14)
        final = tsne(x, perplexity=12, iters=1000, seed=14)
        assert tsne_kl(p, final.coords) < tsne_kl(p, mid.coords)

    def test_deterministic_given_seed(self):
        rng = np.random.default_rng(15)
        x = rng.normal(size=(30, 4))
        a = tsne(x, perplexity=8, iters=120, seed=16)
        b = tsne(x, perplexity=8, iters=120, seed=16)
        assert np.array_equal(a.coords, b.coords)

    def test_coords_finite(self):
        rng = np.random.default_rng(17)
        x = rng.normal(size=(50, 6))
        proj = tsne(x, perplexity=10, iters=300, seed=18)
        assert np.isfinite(proj.coords).all()
