import numpy as np
import pytest

from edgecv.cluster import (
    CommunityAssignment,
    kmeans,
    regularized_spectral_clustering,
    spectral_clustering,
    spherical_spectral_clustering,
)
from edgecv.metrics import clustering_accuracy


def planted(labels, K):
    return CommunityAssignment(labels=np.asarray(labels), K=K)


def block_mean_matrix(sizes, B, theta=None):
    """Exact expected-value matrix of a planted partition (diagonal included)."""
    labels = np.repeat(np.arange(len(sizes)), sizes)
    M = np.asarray(B)[np.ix_(labels, labels)]
    if theta is not None:
        M = M * np.outer(theta, theta)
    return M, labels


class TestKmeans:
    def test_separated_clouds(self, rng):
        X = np.vstack([rng.normal(0, 0.1, (15, 2)), rng.normal(10, 0.1, (15, 2))])
        out = kmeans(X, 2, rng=np.random.default_rng(0))
        assert len(set(out.labels[:15])) == 1
        assert len(set(out.labels[15:])) == 1
        assert out.labels[0] != out.labels[-1]

    def test_identical_points_zero_wcss(self):
        X = np.ones((8, 3))
        out = kmeans(X, 2, rng=np.random.default_rng(0))
        assert out.labels.shape == (8,)
        assert out.K == 2

    def test_deterministic_given_seed(self, rng):
        X = rng.standard_normal((40, 3))
        a = kmeans(X, 4, rng=np.random.default_rng(11))
        b = kmeans(X, 4, rng=np.random.default_rng(11))
        assert np.array_equal(a.labels, b.labels)

    def test_k_exceeding_points_rejected(self, rng):
        with pytest.raises(ValueError):
            kmeans(rng.standard_normal((3, 2)), 4, rng=rng)

    def test_more_clusters_than_distinct_points(self):
        # forces the empty-cluster re-seeding path
        X = np.array([[0.0, 0], [0, 0], [1, 1], [1, 1], [5, 5]])
        out = kmeans(X, 3, rng=np.random.default_rng(2))
        assert out.labels[0] == out.labels[1]
        assert out.labels[2] == out.labels[3]


class TestSpectral:
    def test_two_block_mean_matrix_recovered_exactly(self, rng):
        # eigenvectors of the 2-block expected matrix are block-constant
        M, labels = block_mean_matrix([10, 10], [[0.6, 0.1], [0.1, 0.6]])
        out = spectral_clustering(M, 2, np.random.default_rng(0))
        assert clustering_accuracy(out, planted(labels, 2)) == 1.0

    def test_single_cluster(self, rng):
        M = rng.random((6, 6)); M = (M + M.T) / 2
        out = spectral_clustering(M, 1, rng)
        assert np.all(out.labels == 0)

    def test_node_permutation_equivariance(self):
        M, labels = block_mean_matrix([6, 6, 6], 0.1 + 0.5 * np.eye(3))
        perm = np.random.default_rng(5).permutation(18)
        a = spectral_clustering(M, 3, np.random.default_rng(1))
        b = spectral_clustering(M[np.ix_(perm, perm)], 3, np.random.default_rng(1))
        acc = clustering_accuracy(planted(b.labels, 3), planted(a.labels[perm], 3))
        assert acc == 1.0

    def test_asymmetric_rejected(self, rng):
        M = rng.random((5, 5))
        with pytest.raises(ValueError):
            spectral_clustering(M, 2, rng)


class TestSphericalSpectral:
    def test_degree_corrected_blocks_recovered(self, rng):
        # rows of the leading eigenvectors are theta-scaled block vectors, so
        # unit normalization collapses each block onto a single point
        theta = np.concatenate([rng.uniform(0.3, 2.0, 12), rng.uniform(0.3, 2.0, 12)])
        M, labels = block_mean_matrix([12, 12], [[0.8, 0.1], [0.1, 0.8]], theta)
        out = spherical_spectral_clustering(M, 2, np.random.default_rng(0))
        assert clustering_accuracy(out, planted(labels, 2)) == 1.0

    def test_matches_plain_variant_on_flat_degrees(self):
        M, labels = block_mean_matrix([9, 9], [[0.7, 0.05], [0.05, 0.7]])
        a = spectral_clustering(M, 2, np.random.default_rng(4))
        b = spherical_spectral_clustering(M, 2, np.random.default_rng(4))
        assert clustering_accuracy(planted(a.labels, 2), planted(b.labels, 2)) == 1.0

    def test_zero_matrix_defined(self):
        out = spherical_spectral_clustering(np.zeros((5, 5)), 2, np.random.default_rng(0))
        assert out.labels.shape == (5,)


def test_regularized_variant_recovers_sparse_blocks():
    rng = np.random.default_rng(8)
    M, labels = block_mean_matrix([40, 40], [[0.15, 0.02], [0.02, 0.15]])
    A = (rng.random(M.shape) < M)
    A = np.triu(A, 1); A = (A + A.T).astype(float)
    out = regularized_spectral_clustering(A, 0.5, 2, np.random.default_rng(0))
    assert clustering_accuracy(out, planted(labels, 2)) > 0.9
