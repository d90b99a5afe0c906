"""Synthetic network generators: block models, directed dot-product graphs,
and two latent-function (graphon) samplers."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .netgraph import AdjacencyMatrix, build_adjacency, save_edge_list
from .holdout import _upper_pairs
from .cluster import CommunityAssignment

PIECEWISE_K3 = "piecewise_k3"
SMOOTH_RANKFULL = "smooth_rankfull"

_POWER_POOL_SIZE = 300
_CLIP_WARN_FRACTION = 0.5


@dataclass(frozen=True)
class BlockDesign:
    """Planted block-model design.

    lam is the target expected average degree; t skews the community sizes
    (t = 0 is balanced); beta is the ratio of between- to within-community
    edge probability; degree_corrected switches on per-node propensities.
    """

    n: int
    K: int
    lam: float
    t: float = 0.0
    beta: float = 0.2
    degree_corrected: bool = False

    def __post_init__(self):
        if not 1 <= self.K <= self.n:
            raise ValueError("need 1 <= K <= n")
        if self.lam <= 0:
            raise ValueError("lam must be positive")
        if not 0.0 <= self.beta <= 1.0:
            raise ValueError("beta must lie in [0, 1]")
        if self.t < 0:
            raise ValueError("t must be >= 0")


@dataclass(frozen=True)
class PlantedInstance:
    """A sampled network with its generating probability matrix.

    truth is None for designs without planted communities. clip_fraction is
    the share of off-diagonal probabilities clipped into [0, 1];
    degree_warning flags designs where clipping dominates.
    """

    A: AdjacencyMatrix
    truth: CommunityAssignment | None
    M: np.ndarray
    clip_fraction: float = 0.0
    degree_warning: bool = False


def _largest_remainder_sizes(n, weights):
    """Integer sizes proportional to weights, summing exactly to n."""
    weights = np.asarray(weights, dtype=float)
    quota = n * weights / weights.sum()
    sizes = np.floor(quota).astype(int)
    short = n - sizes.sum()
    if short > 0:
        order = np.argsort(-(quota - sizes), kind="stable")
        sizes[order[:short]] += 1
    return sizes


def _sample_symmetric(M, rng) -> AdjacencyMatrix:
    """Independent Bernoulli draws on the upper triangle, symmetrized."""
    n = M.shape[0]
    iu, ju = _upper_pairs(n)
    probs = M[iu, ju]
    hit = rng.random(probs.size) < probs
    return build_adjacency(n, iu[hit], ju[hit], np.ones(int(hit.sum())),
                           directed=False, weighted=False)


def _power_law_pool(rng):
    """Pool of heavy-tailed propensities with density 4 x^{-5} on x >= 1,
    drawn by inverse CDF."""
    u = rng.random(_POWER_POOL_SIZE)
    return (1.0 - u) ** (-0.25)


def gen_block_model(design: BlockDesign, rng) -> PlantedInstance:
    """Sample a (degree-corrected) planted-partition network.

    Community sizes are proportional to (1, 2^t, ..., K^t); the block matrix
    is (1 - beta) I + beta; the global scale is set so that the expected
    average degree equals lam before clipping probabilities into [0, 1].
    """
    n, K = design.n, design.K
    sizes = _largest_remainder_sizes(n, [(k + 1) ** design.t for k in range(K)])
    labels = np.repeat(np.arange(K), sizes)
    if design.degree_corrected:
        pool = _power_law_pool(rng)
        theta = pool[rng.integers(0, _POWER_POOL_SIZE, size=n)]
    else:
        theta = np.ones(n)
    B0 = (1.0 - design.beta) * np.eye(K) + design.beta
    block = B0[np.ix_(labels, labels)]
    raw = np.outer(theta, theta) * block
    off_total = raw.sum() - np.trace(raw)
    if off_total <= 0:
        raise ValueError("design has zero expected degree")
    scale = design.lam * n / off_total
    M = scale * raw
    iu, ju = _upper_pairs(n)
    clip_fraction = float(np.mean(M[iu, ju] > 1.0))
    M = np.clip(M, 0.0, 1.0)
    A = _sample_symmetric(M, rng)
    return PlantedInstance(
        A=A,
        truth=CommunityAssignment(labels=labels, K=K),
        M=M,
        clip_fraction=clip_fraction,
        degree_warning=clip_fraction > _CLIP_WARN_FRACTION,
    )


def gen_rdpg_directed(n, K, rng) -> PlantedInstance:
    """Directed dot-product graph: latent factors uniform on [0, 1]^K, the
    probability matrix normalized by its maximum entry."""
    if not 1 <= K <= n:
        raise ValueError("need 1 <= K <= n")
    S1 = rng.random((n, K))
    S2 = rng.random((n, K))
    P = S1 @ S2.T
    M = P / P.max()
    draws = rng.random((n, n)) < M
    np.fill_diagonal(draws, False)
    rows, cols = np.nonzero(draws)
    A = build_adjacency(n, rows, cols, np.ones(rows.size), directed=True, weighted=False)
    return PlantedInstance(A=A, truth=None, M=M)


def _piecewise_k3(u, v):
    """Three-block piecewise-constant latent function with overall density 0.1."""
    b_u = np.minimum((u * 3).astype(int), 2)
    b_v = np.minimum((v * 3).astype(int), 2)
    base = np.where(b_u == b_v, 1.0, 0.2)
    return 0.1 / ((3 * 1.0 + 6 * 0.2) / 9.0) * base


def _smooth_rankfull(u, v):
    """Smooth, not low-rank latent function rescaled into [0.05, 0.5]."""
    g = 1.0 / (1.0 + np.exp(-5.0 * (u ** 2 + v ** 2)))
    g_min, g_max = 0.5, 1.0 / (1.0 + math.exp(-10.0))
    return 0.05 + 0.45 * (g - g_min) / (g_max - g_min)


GRAPHONS = {PIECEWISE_K3: _piecewise_k3, SMOOTH_RANKFULL: _smooth_rankfull}


def gen_graphon(n, graphon, rng) -> PlantedInstance:
    """Sample latent positions uniformly and the network from M_ij = f(xi_i, xi_j)."""
    if n < 3:
        raise ValueError("need at least three nodes")
    try:
        f = GRAPHONS[graphon]
    except KeyError:
        raise ValueError(f"unknown graphon {graphon!r}") from None
    xi = rng.random(n)
    M = f(xi[:, None], xi[None, :])
    A = _sample_symmetric(M, rng)
    return PlantedInstance(A=A, truth=None, M=M)


def export_instance(inst: PlantedInstance, prefix):
    """Write the network as an edge list, plus a "node label" sidecar when the
    planted communities are known. Returns the written paths."""
    edge_path = f"{prefix}.edges.txt"
    save_edge_list(inst.A, edge_path)
    paths = [edge_path]
    if inst.truth is not None:
        label_path = f"{prefix}.labels.txt"
        with open(label_path, "w", encoding="utf-8") as fh:
            for node, lab in enumerate(inst.truth.labels):
                fh.write(f"{node} {lab}\n")
        paths.append(label_path)
    return paths
