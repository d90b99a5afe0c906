"""Random node-pair train/test splits and the zero-filled partial network."""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .netgraph import AdjacencyMatrix, build_adjacency


@lru_cache(maxsize=8)
def _upper_pairs(n):
    """All pairs (i, j) with i < j, in row-major order."""
    return np.triu_indices(n, k=1)


@lru_cache(maxsize=8)
def _ordered_pairs(n):
    """All ordered off-diagonal pairs (i, j), i != j, in row-major order."""
    i, j = np.where(~np.eye(n, dtype=bool))
    return i, j


def pair_count(n, directed):
    return n * (n - 1) if directed else n * (n - 1) // 2


def pair_index(n, directed, i, j):
    """Position of pair (i, j) in the canonical pair enumeration.

    Undirected pairs are canonicalized to i < j before indexing.
    """
    i = np.asarray(i, dtype=np.int64)
    j = np.asarray(j, dtype=np.int64)
    if directed:
        return i * (n - 1) + j - (j > i)
    lo = np.minimum(i, j)
    hi = np.maximum(i, j)
    return lo * (2 * n - lo - 1) // 2 + (hi - lo - 1)


@dataclass(frozen=True)
class HoldoutMask:
    """Training pair set over the off-diagonal node pairs of an n-node graph.

    `bits` is a boolean array over the canonical pair enumeration (i < j for
    undirected graphs, all ordered pairs for directed ones); True marks a
    training pair. `p` is the declared per-pair inclusion probability. Masks
    are immutable.
    """

    n: int
    directed: bool
    p: float
    bits: np.ndarray

    def __post_init__(self):
        if not 0 < self.p <= 1:
            raise ValueError("p must be in (0, 1]")
        if self.bits.shape != (pair_count(self.n, self.directed),):
            raise ValueError("bits length does not match the pair count")

    @property
    def n_train(self) -> int:
        return int(self.bits.sum())

    @property
    def n_heldout(self) -> int:
        return self.bits.size - self.n_train

    def contains(self, i, j) -> bool:
        """Whether pair (i, j) is a training pair (symmetric if undirected)."""
        if i == j:
            return False
        return bool(self.bits[pair_index(self.n, self.directed, i, j)])

    def _all_pairs(self):
        return (_ordered_pairs if self.directed else _upper_pairs)(self.n)

    def train_pairs(self):
        """Canonical training pairs as (rows, cols) index arrays."""
        cached = getattr(self, "_train_cache", None)
        if cached is None:
            i, j = self._all_pairs()
            cached = (i[self.bits], j[self.bits])
            object.__setattr__(self, "_train_cache", cached)
        return cached

    def heldout_pairs(self):
        """Canonical held-out pairs as (rows, cols) index arrays."""
        cached = getattr(self, "_heldout_cache", None)
        if cached is None:
            i, j = self._all_pairs()
            keep = ~self.bits
            cached = (i[keep], j[keep])
            object.__setattr__(self, "_heldout_cache", cached)
        return cached


def sample_mask(n, p, directed, rng) -> HoldoutMask:
    """Sample each node pair into the training set independently with
    probability p; undirected masks are symmetric by construction. The
    measure-zero all-empty draw is resampled."""
    if not 0 < p <= 1:
        raise ValueError("p must be in (0, 1]")
    if n < 2:
        raise ValueError("need at least two nodes")
    m = pair_count(n, directed)
    if p == 1.0:
        bits = np.ones(m, dtype=bool)
    else:
        bits = rng.random(m) < p
        while not bits.any():
            bits = rng.random(m) < p
    return HoldoutMask(n=n, directed=directed, p=float(p), bits=bits)


def zero_fill(A: AdjacencyMatrix, mask: HoldoutMask) -> AdjacencyMatrix:
    """Drop the entries of A at held-out pairs, keeping training entries verbatim."""
    if mask.n != A.n:
        raise ValueError("mask size does not match the graph")
    if mask.directed != A.directed:
        raise ValueError("mask directedness does not match the graph")
    rows, cols, weights = A.entries()
    keep = mask.bits[pair_index(A.n, A.directed, rows, cols)]
    return build_adjacency(
        A.n, rows[keep], cols[keep], weights[keep],
        directed=A.directed, weighted=A.weighted,
    )
