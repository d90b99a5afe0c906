"""K-means and the spectral clustering variants used to fit block models."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.linalg

from .netgraph import _laplacian_dense, _regularize_dense
from .lowrank import CompletedMatrix

_MAX_LLOYD_ITERS = 100


@dataclass(frozen=True)
class CommunityAssignment:
    """Node labels in [0, K)."""

    labels: np.ndarray
    K: int

    def __post_init__(self):
        if self.K < 1:
            raise ValueError("K must be >= 1")
        if self.labels.size and (self.labels.min() < 0 or self.labels.max() >= self.K):
            raise ValueError("labels out of range")

    @property
    def n(self) -> int:
        return self.labels.size


def _plusplus_init(X, x2, K, rng):
    """k-means++ seeding; falls back to uniform picks when all distances vanish."""
    n = X.shape[0]
    centers = np.empty((K, X.shape[1]))
    centers[0] = X[int(rng.integers(n))]
    d2 = np.maximum(x2 - 2.0 * (X @ centers[0]) + centers[0] @ centers[0], 0.0)
    for k in range(1, K):
        total = d2.sum()
        if total > 0:
            idx = min(int(np.searchsorted(np.cumsum(d2), rng.random() * total)), n - 1)
        else:
            idx = int(rng.integers(n))
        centers[k] = X[idx]
        step = np.maximum(x2 - 2.0 * (X @ centers[k]) + centers[k] @ centers[k], 0.0)
        d2 = np.minimum(d2, step)
    return centers


def _reseed_empty(X, x2, centers, labels, empty):
    """Move each empty cluster's center to the current farthest point."""
    own = centers[labels]
    dist_own = x2 - 2.0 * np.einsum("ij,ij->i", X, own) + (own ** 2).sum(axis=1)
    for k in empty:
        far = int(dist_own.argmax())
        centers[k] = X[far]
        dist_own[far] = -np.inf


def _lloyd_batch(X, x2, K, rngs):
    """Lloyd runs for several seedings at once; per-restart trajectories match
    the one-at-a-time algorithm. Returns (labels, objective) per restart."""
    n, dim = X.shape
    R = len(rngs)
    centers = np.stack([_plusplus_init(X, x2, K, r) for r in rngs])
    labels = np.full((R, n), -1, dtype=np.int64)
    objs = np.full(R, np.inf)
    tiled = np.tile(X.T, (1, R))  # (dim, R*n); prefix views serve smaller batches
    active = np.arange(R)
    for _ in range(_MAX_LLOYD_ITERS):
        a = active.size
        if a == 0:
            break
        C = centers[active].reshape(a * K, dim)
        d2 = x2[:, None] + (C ** 2).sum(axis=1)[None, :] - 2.0 * (X @ C.T)
        np.maximum(d2, 0.0, out=d2)
        d2 = d2.reshape(n, a, K)
        new_labels = d2.argmin(axis=2)
        batch_obj = d2.min(axis=2).sum(axis=0)
        # Lloyd objective cannot increase between assignment steps.
        assert np.all(batch_obj <= objs[active] * (1 + 1e-9) + 1e-9), \
            "k-means objective increased"
        objs[active] = batch_obj  # converged restarts keep their final value
        moved = (new_labels != labels[active].T).any(axis=0)
        still = active[moved]
        s = still.size
        if s == 0:
            break
        nl = new_labels[:, moved].T  # (s, n)
        labels[still] = nl
        flat = (nl + np.arange(s)[:, None] * K).ravel()
        counts = np.bincount(flat, minlength=s * K).reshape(s, K).astype(float)
        sums = np.empty((s, K, dim))
        for d in range(dim):
            sums[:, :, d] = np.bincount(
                flat, weights=tiled[d, : s * n], minlength=s * K
            ).reshape(s, K)
        nonempty = counts > 0
        block = centers[still]
        block[nonempty] = sums[nonempty] / counts[nonempty][:, None]
        centers[still] = block
        for col in np.flatnonzero(~nonempty.all(axis=1)):
            r = still[col]
            _reseed_empty(X, x2, centers[r], labels[r], np.flatnonzero(~nonempty[col]))
        active = still
    return labels, objs


def kmeans(points, K, restarts=10, rng=None) -> CommunityAssignment:
    """Best of `restarts` seeded k-means++/Lloyd runs by within-cluster sum of
    squares; ties go to the earliest restart."""
    X = np.asarray(points, dtype=float)
    if X.ndim != 2:
        raise ValueError("points must be a 2-d array")
    if K > X.shape[0]:
        raise ValueError("K exceeds the number of points")
    if restarts < 1:
        raise ValueError("restarts must be >= 1")
    if rng is None:
        raise ValueError("a seeded numpy Generator is required")
    x2 = (X ** 2).sum(axis=1)
    labels, objs = _lloyd_batch(X, x2, K, rng.spawn(restarts))
    best = int(np.argmin(objs))  # argmin keeps the earliest restart on ties
    return CommunityAssignment(labels=labels[best], K=K)


def _leading_vectors(M, K):
    """Rows of the n x K matrix of leading singular vectors of a symmetric input."""
    if isinstance(M, CompletedMatrix):
        if K > M.rank:
            raise ValueError("K exceeds the reconstruction rank")
        return M.U[:, :K]
    M = np.asarray(M, dtype=float)
    if M.shape[0] != M.shape[1] or not np.allclose(M, M.T, atol=1e-8):
        raise ValueError("spectral clustering requires a symmetric matrix")
    if K > M.shape[0]:
        raise ValueError("K exceeds the matrix size")
    U, _, _ = np.linalg.svd(M)
    return U[:, :K]


def spectral_clustering(M, K, rng, restarts=10) -> CommunityAssignment:
    """k-means over the rows of the top-K singular-vector matrix."""
    return kmeans(_leading_vectors(M, K), K, restarts=restarts, rng=rng)


def spherical_spectral_clustering(M, K, rng, restarts=10) -> CommunityAssignment:
    """Spectral clustering with rows normalized to unit length first.

    Rows with near-zero norm stay at the origin so every node keeps a label.
    """
    rows = _leading_vectors(M, K).copy()
    norms = np.linalg.norm(rows, axis=1)
    pos = norms > 1e-12
    rows[pos] /= norms[pos, None]
    rows[~pos] = 0.0
    return kmeans(rows, K, restarts=restarts, rng=rng)


def regularized_spectral_clustering(W, tau, K, rng, restarts=10) -> CommunityAssignment:
    """Cluster a dense nonnegative matrix after mean-degree regularization.

    Pipeline: clip negatives, add tau * (mean degree / n) everywhere, form the
    degree-normalized matrix, k-means on its K leading eigenvector rows.
    """
    W = np.clip(np.asarray(W, dtype=float), 0.0, None)
    n = W.shape[0]
    L = _laplacian_dense(_regularize_dense(W, tau))
    _, vecs = scipy.linalg.eigh(L, subset_by_index=[n - K, n - 1])
    return kmeans(vecs[:, ::-1], K, restarts=restarts, rng=rng)
