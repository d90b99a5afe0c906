"""Neighborhood-smoothing estimator of an edge-probability matrix.

Each node's row is replaced by the average row over a data-driven neighborhood
of similar nodes; the neighborhood radius is the h-quantile of a pairwise
dissimilarity computed from the squared input matrix.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np


@dataclass(frozen=True)
class SmootherConfig:
    """Quantile bandwidth in (0, 1); symmetrize averages the output with its
    transpose."""

    h: float
    symmetrize: bool = True

    def __post_init__(self):
        if not 0.0 < self.h < 1.0:
            raise ValueError("h must lie strictly between 0 and 1")


def _check_square_symmetric(W):
    W = np.asarray(W, dtype=float)
    if W.ndim != 2 or W.shape[0] != W.shape[1]:
        raise ValueError("input must be a square matrix")
    if not np.allclose(W, W.T, atol=1e-10):
        raise ValueError("input must be symmetric")
    return W


def pairwise_dissimilarity(W) -> np.ndarray:
    """Squared node dissimilarities d(i,i')^2 = max_{k != i,i'} |(W^2/n)_{ik} - (W^2/n)_{i'k}|.

    The comparison columns i and i' are excluded from the max so a node's own
    (unknown) diagonal never influences its distances.
    """
    W = _check_square_symmetric(W)
    n = W.shape[0]
    D = (W @ W) / n
    dist = np.empty((n, n))
    idx = np.arange(n)
    for i in range(n):
        diff = np.abs(D[i] - D)
        diff[:, i] = -np.inf
        diff[idx, idx] = -np.inf
        dist[i] = diff.max(axis=1)
    np.fill_diagonal(dist, 0.0)
    return dist


def smooth_with_dissimilarity(W, dist, h, symmetrize=True) -> np.ndarray:
    """Neighborhood-average W given precomputed dissimilarities.

    Each neighborhood holds the other nodes within the h-quantile radius
    (nearest-rank: the ceil(h*(n-1))-th smallest distance), so it is never
    empty.
    """
    W = np.asarray(W, dtype=float)
    n = W.shape[0]
    if n < 3:
        raise ValueError("need at least three nodes to smooth")
    r = int(np.ceil(h * (n - 1)))
    off = dist + np.diag(np.full(n, np.inf))  # self excluded from neighborhoods
    q = np.partition(off, r - 1, axis=1)[:, r - 1]
    members = off <= q[:, None]
    counts = members.sum(axis=1).astype(float)
    P = (members @ W) / counts[:, None]
    if symmetrize:
        P = (P + P.T) / 2.0
    return np.clip(P, 0.0, 1.0)


def neighborhood_smoothing(W, cfg: SmootherConfig) -> np.ndarray:
    """Smoothed edge-probability matrix; symmetric with entries in [0, 1]."""
    W = _check_square_symmetric(W)
    if W.shape[0] < 3:
        raise ValueError("need at least three nodes to smooth")
    if W.min() < -1e-12 or W.max() > 1.0 + 1e-12:
        raise ValueError("entries must lie in [0, 1]")
    return smooth_with_dissimilarity(W, pairwise_dissimilarity(W), cfg.h, cfg.symmetrize)
