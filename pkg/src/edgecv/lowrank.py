"""Partial SVD and reconstruction of partially observed networks.

The completion step takes the zero-filled training matrix, rescales it by the
inverse of the training probability, and keeps the top-K singular triplets.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp
import scipy.sparse.linalg as spla

from .netgraph import AdjacencyMatrix
from .holdout import HoldoutMask, zero_fill


@dataclass(frozen=True)
class CompletedMatrix:
    """Rank-K reconstruction stored as factors U diag(sigma) V^T.

    sigma is non-increasing and non-negative; U and V have orthonormal
    columns. `p` records the training probability used for the 1/p rescale.
    """

    U: np.ndarray
    sigma: np.ndarray
    V: np.ndarray
    p: float

    def __post_init__(self):
        k = self.sigma.size
        if self.U.shape[1] != k or self.V.shape[1] != k:
            raise ValueError("factor shapes do not match sigma")
        if np.any(self.sigma < 0) or np.any(np.diff(self.sigma) > 1e-12):
            raise ValueError("sigma must be non-increasing and non-negative")
        for F in (self.U, self.V):
            gram = F.T @ F
            if not np.allclose(gram, np.eye(k), atol=1e-6):
                raise ValueError("factor columns are not orthonormal")

    @property
    def n(self) -> int:
        return self.U.shape[0]

    @property
    def rank(self) -> int:
        return self.sigma.size

    def truncated(self, K: int) -> "CompletedMatrix":
        """Reconstruction at a smaller rank, reusing the same factors."""
        if K > self.rank:
            raise ValueError("cannot truncate to a larger rank")
        return CompletedMatrix(self.U[:, :K], self.sigma[:K], self.V[:, :K], self.p)

    def values_at(self, rows, cols) -> np.ndarray:
        """Entries (U diag(sigma) V^T)_{ij} at the given index arrays."""
        return np.einsum("ik,ik->i", self.U[rows] * self.sigma, self.V[cols])

    def to_dense(self) -> np.ndarray:
        return (self.U * self.sigma) @ self.V.T


def _zero_factors(shape, K):
    n, m = shape
    return np.eye(n, K), np.zeros(K), np.eye(m, K)


def _dense_truncated(M, K):
    dense = M.toarray() if sp.issparse(M) else M
    U, s, Vt = np.linalg.svd(dense, full_matrices=False)
    return U[:, :K], s[:K], Vt[:K].T


def partial_svd(M, K, rng):
    """Top-K singular triplets (U, sigma, V) of a sparse or dense matrix.

    Uses a seeded Lanczos solver with a dense fallback when the requested rank
    reaches the full dimension. sigma is returned non-increasing.
    """
    shape = M.shape
    if K < 1 or K > min(shape):
        raise ValueError("K must satisfy 1 <= K <= min(shape)")
    if sp.issparse(M):
        if not np.all(np.isfinite(M.data)):
            raise ValueError("input matrix has non-finite entries")
        if M.nnz == 0:
            return _zero_factors(shape, K)
    else:
        M = np.asarray(M, dtype=float)
        if not np.all(np.isfinite(M)):
            raise ValueError("input matrix has non-finite entries")
        if not M.any():
            return _zero_factors(shape, K)
    if K >= min(shape):
        return _dense_truncated(M, K)
    v0 = rng.standard_normal(min(shape))
    try:
        U, s, Vt = spla.svds(M, k=K, v0=v0, tol=0)
    except spla.ArpackNoConvergence:
        return _dense_truncated(M, K)
    order = np.argsort(s)[::-1]
    return U[:, order], s[order], Vt[order].T


def complete(A: AdjacencyMatrix, mask: HoldoutMask, K, rng) -> CompletedMatrix:
    """Rank-K reconstruction of A from its training pairs: top-K SVD of the
    zero-filled matrix scaled by 1/p."""
    if K > A.n:
        raise ValueError("rank exceeds the number of nodes")
    scaled = zero_fill(A, mask).csr * (1.0 / mask.p)
    U, s, V = partial_svd(scaled, K, rng)
    return CompletedMatrix(U=U, sigma=s, V=V, p=mask.p)


def truncate_entries(Ahat: CompletedMatrix, lo, hi) -> np.ndarray:
    """Dense reconstruction with entries clamped to [lo, hi]."""
    if lo > hi:
        raise ValueError("lo must not exceed hi")
    return np.clip(Ahat.to_dense(), lo, hi)


def zero_fill_rescale(A: AdjacencyMatrix, mask: HoldoutMask):
    """Training entries of a binary A divided by p, as a sparse matrix.

    A completion-free baseline; the rescale is only unbiased for binary
    networks, so weighted input is rejected.
    """
    if A.weighted:
        raise ValueError("zero-fill rescaling does not work for weighted networks")
    return zero_fill(A, mask).csr * (1.0 / mask.p)
