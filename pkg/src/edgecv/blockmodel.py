"""Block-model parameter estimation from the observed (training) node pairs.

Both estimators condition on a given label vector and use only training
pairs. The plain block-model estimator needs no explicit 1/p correction: the
numerator and denominator both range over training pairs. The degree-corrected
estimator divides by p to compensate for unobserved pairs.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .netgraph import AdjacencyMatrix, degrees
from .holdout import HoldoutMask
from .cluster import CommunityAssignment

SBM = "sbm"
DCSBM = "dcsbm"


@dataclass(frozen=True)
class FittedBlockModel:
    """Fitted block model: labels plus either the block probability matrix
    (plain) or block totals and per-node propensities (degree-corrected)."""

    kind: str
    labels: CommunityAssignment
    p: float
    Bhat: np.ndarray | None = None
    Ostar: np.ndarray | None = None
    theta: np.ndarray | None = None

    def predicted_at(self, rows, cols) -> np.ndarray:
        """Edge-probability predictions for the given node pairs."""
        c = self.labels.labels
        if self.kind == SBM:
            return self.Bhat[c[rows], c[cols]]
        return self.theta[rows] * self.theta[cols] * self.Ostar[c[rows], c[cols]] / self.p


def probability_matrix(model: FittedBlockModel) -> np.ndarray:
    """Dense n x n matrix of predicted edge probabilities, zero diagonal.

    Degree-corrected predictions may exceed 1; they are preserved here and
    clipped only by losses that require probabilities.
    """
    c = model.labels.labels
    if model.kind == SBM:
        P = model.Bhat[np.ix_(c, c)]
    else:
        block = model.Ostar[np.ix_(c, c)] / model.p
        P = block * np.outer(model.theta, model.theta)
    P = np.array(P, dtype=float)
    np.fill_diagonal(P, 0.0)
    return P


def _sym_unordered(T):
    """Fold an ordered (i<j)-keyed block tally into an unordered-pair tally."""
    return T + T.T - np.diag(np.diag(T))


def _block_tallies(A: AdjacencyMatrix, mask: HoldoutMask, labels: CommunityAssignment):
    """Per block pair: training-pair counts and training edge-weight sums.

    Both are computed over unordered pairs (i < j) by subtracting held-out
    tallies from full-graph tallies, which is cheap when the held-out set is
    small.
    """
    K = labels.K
    c = labels.labels
    nk = np.bincount(c, minlength=K).astype(float)
    cnt_total = np.outer(nk, nk)
    np.fill_diagonal(cnt_total, nk * (nk - 1) / 2.0)

    eI, eJ, eV = A.entries()
    T = np.bincount(c[eI] * K + c[eJ], weights=eV,
                    minlength=K * K).reshape(K, K).astype(float)
    sum_total = _sym_unordered(T)

    hI, hJ = mask.heldout_pairs()
    hV = A.values_at(hI, hJ)
    Tc = np.bincount(c[hI] * K + c[hJ], minlength=K * K).reshape(K, K).astype(float)
    Ts = np.bincount(c[hI] * K + c[hJ], weights=hV,
                     minlength=K * K).reshape(K, K).astype(float)
    cnt_train = cnt_total - _sym_unordered(Tc)
    sum_train = sum_total - _sym_unordered(Ts)
    return cnt_train, sum_train, hI, hJ, hV


def _check_inputs(A, mask, labels):
    if A.directed:
        raise ValueError("block models require an undirected graph")
    if mask.n != A.n or mask.directed:
        raise ValueError("mask does not match the graph")
    if labels.n != A.n:
        raise ValueError("labels do not match the graph")


def estimate_sbm(A, mask, labels) -> FittedBlockModel:
    """Block probability estimates: training edge sums over training pair
    counts per block pair; empty block pairs get probability 0."""
    _check_inputs(A, mask, labels)
    cnt, tot, _, _, _ = _block_tallies(A, mask, labels)
    Bhat = np.divide(tot, cnt, out=np.zeros_like(tot), where=cnt > 0)
    return FittedBlockModel(kind=SBM, labels=labels, p=mask.p, Bhat=Bhat)


def estimate_dcsbm(A, mask, labels) -> FittedBlockModel:
    """Degree-corrected estimates via ordered block totals and per-node
    training degrees; nodes in blocks with zero total get propensity 0."""
    _check_inputs(A, mask, labels)
    _, sum_train, hI, hJ, hV = _block_tallies(A, mask, labels)
    Ostar = sum_train + np.diag(np.diag(sum_train))  # ordered pairs count both ways
    train_deg = degrees(A)
    np.subtract.at(train_deg, hI, hV)
    np.subtract.at(train_deg, hJ, hV)
    denom = Ostar.sum(axis=1)[labels.labels]
    theta = np.divide(train_deg, denom, out=np.zeros_like(train_deg), where=denom > 0)
    return FittedBlockModel(kind=DCSBM, labels=labels, p=mask.p, Ostar=Ostar, theta=theta)
