"""Loss and evaluation functions for held-out pair scoring and clusterings."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.optimize import linear_sum_assignment
from scipy.stats import rankdata

from .cluster import CommunityAssignment

DEVIANCE_CLIP = 1e-6


@dataclass(frozen=True)
class PairScoreSet:
    """Held-out pairs with their observed values and predictions."""

    rows: np.ndarray
    cols: np.ndarray
    truths: np.ndarray
    preds: np.ndarray

    def __post_init__(self):
        sizes = {self.rows.size, self.cols.size, self.truths.size, self.preds.size}
        if len(sizes) != 1:
            raise ValueError("pair, truth and prediction arrays must align")

    def __len__(self):
        return self.truths.size


def _require_nonempty(s: PairScoreSet):
    if len(s) == 0:
        raise ValueError("no held-out pairs to score")


def _require_binary(truths):
    if not np.all(np.isin(truths, (0.0, 1.0))):
        raise ValueError("observed values must be binary")


def sse_loss(s: PairScoreSet) -> float:
    """Mean squared error over the held-out pairs."""
    _require_nonempty(s)
    return float(np.mean((s.truths - s.preds) ** 2))


def deviance_loss(s: PairScoreSet) -> float:
    """Mean binomial deviance -x log(y) - (1-x) log(1-y) with predictions
    clipped away from {0, 1} for stability."""
    _require_nonempty(s)
    _require_binary(s.truths)
    y = np.clip(s.preds, DEVIANCE_CLIP, 1.0 - DEVIANCE_CLIP)
    x = s.truths
    return float(np.mean(-x * np.log(y) - (1.0 - x) * np.log(1.0 - y)))


def auc(s: PairScoreSet) -> float:
    """Rank-based AUC: probability a positive pair outranks a negative one,
    ties counted half."""
    _require_nonempty(s)
    _require_binary(s.truths)
    pos = s.truths == 1.0
    n_pos = int(pos.sum())
    n_neg = len(s) - n_pos
    if n_pos == 0 or n_neg == 0:
        raise ValueError("AUC needs both a positive and a negative pair")
    ranks = rankdata(s.preds, method="average")
    return float((ranks[pos].sum() - n_pos * (n_pos + 1) / 2.0) / (n_pos * n_neg))


def _pair_class_keys(assignment: CommunityAssignment, rows, cols):
    """Unordered label-pair class of each node pair, encoded as an integer."""
    a = assignment.labels[rows]
    b = assignment.labels[cols]
    lo = np.minimum(a, b).astype(np.int64)
    hi = np.maximum(a, b).astype(np.int64)
    return lo * assignment.K + hi


def _sum_sq_counts(keys):
    _, counts = np.unique(keys, return_counts=True)
    return int((counts.astype(np.int64) ** 2).sum())


def ccd(labels1: CommunityAssignment, labels2: CommunityAssignment, rows, cols) -> float:
    """Co-clustering difference between two labelings restricted to a pair list.

    Half the squared Frobenius distance between the pair-by-pair co-membership
    indicators of the two induced pair partitions, computed by class-size
    counting so the indicator matrices are never materialized.
    """
    if labels1.n != labels2.n:
        raise ValueError("labelings must cover the same nodes")
    rows = np.asarray(rows)
    cols = np.asarray(cols)
    if rows.size == 0:
        raise ValueError("pair list must be nonempty")
    k1 = _pair_class_keys(labels1, rows, cols)
    k2 = _pair_class_keys(labels2, rows, cols)
    joint = k1 * np.int64(labels2.K) ** 2 + k2
    g1 = _sum_sq_counts(k1)
    g2 = _sum_sq_counts(k2)
    g12 = _sum_sq_counts(joint)
    return (g1 + g2 - 2 * g12) / 2.0


def nmi(labels1: CommunityAssignment, labels2: CommunityAssignment) -> float:
    """Normalized mutual information I / sqrt(H1 H2) from the empirical
    contingency table; 1 when both labelings are constant, 0 when exactly one is."""
    if labels1.n != labels2.n:
        raise ValueError("labelings must cover the same nodes")
    n = labels1.n
    if n == 0:
        raise ValueError("labelings must be nonempty")
    joint = labels1.labels.astype(np.int64) * labels2.K + labels2.labels
    pxy = np.bincount(joint, minlength=labels1.K * labels2.K).astype(float)
    pxy = (pxy / n).reshape(labels1.K, labels2.K)
    px = pxy.sum(axis=1)
    py = pxy.sum(axis=0)
    hx = -np.sum(px[px > 0] * np.log(px[px > 0]))
    hy = -np.sum(py[py > 0] * np.log(py[py > 0]))
    if hx == 0.0 and hy == 0.0:
        return 1.0
    if hx == 0.0 or hy == 0.0:
        return 0.0
    nz = pxy > 0
    outer = np.outer(px, py)
    info = np.sum(pxy[nz] * np.log(pxy[nz] / outer[nz]))
    return float(info / np.sqrt(hx * hy))


def clustering_accuracy(est: CommunityAssignment, truth: CommunityAssignment) -> float:
    """Fraction of correctly labeled nodes under the best label matching.

    The optimal matching over the (padded) confusion matrix is found by the
    Hungarian assignment, which equals the max over label permutations.
    """
    if est.n != truth.n:
        raise ValueError("labelings must cover the same nodes")
    K = max(est.K, truth.K)
    joint = truth.labels.astype(np.int64) * K + est.labels
    conf = np.bincount(joint, minlength=K * K).reshape(K, K)
    r, c = linear_sum_assignment(-conf)
    return float(conf[r, c].sum() / est.n)
