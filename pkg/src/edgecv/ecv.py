"""Edge cross-validation drivers.

Every driver follows the same scheme: sample a training set of node pairs,
reconstruct the network from the training pairs by low-rank completion, fit
each candidate on the reconstruction, and score it on the held-out pairs.
Losses are averaged over independent splits and the arg-min candidate wins,
with ties broken toward the simpler candidate.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .netgraph import AdjacencyMatrix
from .holdout import sample_mask
from .lowrank import complete
from .cluster import (
    spectral_clustering,
    spherical_spectral_clustering,
    regularized_spectral_clustering,
)
from .blockmodel import SBM, DCSBM, estimate_sbm, estimate_dcsbm
from .metrics import PairScoreSet, sse_loss, deviance_loss, auc, ccd

RANK = "rank"
TAU_REG = "tau_reg"
TAU_GRAPHON = "tau_graphon"

_FAMILY_ORDER = {SBM: 0, DCSBM: 1, RANK: 0, TAU_REG: 0, TAU_GRAPHON: 0}
_INTEGER_FAMILIES = {SBM, DCSBM, RANK}

MOST_FREQUENT = "most_frequent"
AVERAGE = "average"


@dataclass(frozen=True)
class CandidateId:
    """One entry of a candidate menu: a model family plus its K or tau."""

    family: str
    value: float

    def __post_init__(self):
        if self.family not in _FAMILY_ORDER:
            raise ValueError(f"unknown candidate family {self.family!r}")
        if self.family in _INTEGER_FAMILIES:
            if self.value < 1 or self.value != int(self.value):
                raise ValueError("K must be a positive integer")
        elif self.value < 0:
            raise ValueError("tau must be >= 0")

    @property
    def sort_key(self):
        """Simplicity order used for tie-breaking: smaller value first, then
        the plain block model before the degree-corrected one."""
        return (self.value, _FAMILY_ORDER[self.family])

    def __str__(self):
        if self.family in (SBM, DCSBM):
            return f"{self.family.upper()}-{int(self.value)}"
        if self.family == RANK:
            return f"K={int(self.value)}"
        return f"tau={self.value:g}"


@dataclass(frozen=True)
class SelectionResult:
    """Per-candidate per-split losses and the winning candidate.

    `losses` has one row per split and one column per candidate; NaN marks a
    loss that could not be evaluated. Candidates missing in every split are
    excluded from the comparison. When a selection is repeated for stability
    aggregation, `per_rep_choices` carries every repetition's winner.
    """

    candidates: tuple
    losses: np.ndarray
    mean_loss: np.ndarray
    chosen: CandidateId
    per_rep_choices: tuple | None = None

    def loss_of(self, candidate: CandidateId) -> float:
        return float(self.mean_loss[self.candidates.index(candidate)])

    def with_choices(self, choices) -> "SelectionResult":
        from dataclasses import replace

        return replace(self, per_rep_choices=tuple(choices))


def _finish(candidates, losses) -> SelectionResult:
    with np.errstate(invalid="ignore"):
        mean = np.full(len(candidates), np.nan)
        have = ~np.all(np.isnan(losses), axis=0)
        mean[have] = np.nanmean(losses[:, have], axis=0)
    scored = [
        (mean[q], cand.sort_key, cand)
        for q, cand in enumerate(candidates)
        if np.isfinite(mean[q])
    ]
    if not scored:
        raise RuntimeError("no candidate produced a finite loss")
    chosen = min(scored, key=lambda t: (t[0], t[1]))[2]
    return SelectionResult(
        candidates=tuple(candidates), losses=losses, mean_loss=mean, chosen=chosen
    )


_PAIR_LOSSES = {
    "l2": sse_loss,
    "sse": sse_loss,
    "dev": deviance_loss,
    "deviance": deviance_loss,
}


def _pair_loss(loss, score_set):
    """Evaluate a named loss; AUC is stored as 1 - AUC so smaller is better."""
    if loss == "auc":
        return 1.0 - auc(score_set)
    return _PAIR_LOSSES[loss](score_set)


def _check_driver_params(p, n_splits, loss, allowed):
    if not 0 < p < 1:
        raise ValueError("p must be strictly between 0 and 1")
    if n_splits < 1:
        raise ValueError("need at least one split")
    if loss not in allowed:
        raise ValueError(f"loss must be one of {sorted(allowed)}")


def ecv_generic(A, candidates, fit_and_predict, loss, p=0.9, n_splits=3,
                rng=None, completion_rank=None) -> SelectionResult:
    """Generic driver: `fit_and_predict(completed, candidate)` returns an
    n x n prediction matrix scored on the held-out pairs.

    Candidates from the rank family are completed at their own rank; other
    families use `completion_rank`. A callback failure marks that candidate's
    loss missing for the split only.
    """
    candidates = list(candidates)
    if not candidates:
        raise ValueError("candidate set is empty")
    _check_driver_params(p, n_splits, loss, {"l2", "sse", "dev", "deviance", "auc"})

    def rank_of(cand):
        if cand.family == RANK:
            return int(cand.value)
        if completion_rank is None:
            raise ValueError("completion_rank is required for non-rank candidates")
        return int(completion_rank)

    kmax = max(rank_of(c) for c in candidates)
    losses = np.full((n_splits, len(candidates)), np.nan)
    for m, srng in enumerate(rng.spawn(n_splits)):
        mask = sample_mask(A.n, p, A.directed, srng)
        rows, cols = mask.heldout_pairs()
        truths = A.values_at(rows, cols)
        full = complete(A, mask, kmax, srng)
        for q, cand in enumerate(candidates):
            try:
                preds = fit_and_predict(full.truncated(rank_of(cand)), cand)
                score = PairScoreSet(rows, cols, truths, np.asarray(preds)[rows, cols])
                losses[m, q] = _pair_loss(loss, score)
            except Exception:
                continue
    return _finish(candidates, losses)


def select_block_model(A, kmax, p=0.9, n_splits=3, loss="l2", rng=None,
                       restarts=10) -> SelectionResult:
    """Choose between plain and degree-corrected block models with 1..kmax
    communities.

    Per split and rank: reconstruct at that rank, cluster the reconstruction
    (plain and row-normalized spectral clustering), estimate both models on
    the training pairs, and score their predicted probabilities on the
    held-out pairs.
    """
    if A.directed:
        raise ValueError("block-model selection requires an undirected graph")
    if kmax < 1:
        raise ValueError("kmax must be >= 1")
    _check_driver_params(p, n_splits, loss, {"l2", "sse", "dev", "deviance"})
    candidates = []
    for K in range(1, kmax + 1):
        candidates.append(CandidateId(SBM, K))
        candidates.append(CandidateId(DCSBM, K))
    losses = np.full((n_splits, len(candidates)), np.nan)
    for m, srng in enumerate(rng.spawn(n_splits)):
        mask = sample_mask(A.n, p, False, srng)
        rows, cols = mask.heldout_pairs()
        truths = A.values_at(rows, cols)
        full = complete(A, mask, kmax, srng)
        for K in range(1, kmax + 1):
            rec = full.truncated(K)
            fits = (
                estimate_sbm(A, mask, spectral_clustering(rec, K, srng, restarts)),
                estimate_dcsbm(A, mask, spherical_spectral_clustering(rec, K, srng, restarts)),
            )
            for offset, fit in enumerate(fits):
                preds = fit.predicted_at(rows, cols)
                score = PairScoreSet(rows, cols, truths, preds)
                losses[m, 2 * (K - 1) + offset] = _pair_loss(loss, score)
    return _finish(candidates, losses)


def select_rank(A, kmax, p=0.9, n_splits=3, loss="sse", rng=None) -> SelectionResult:
    """Choose the reconstruction rank by scoring the completed entries
    directly against the held-out observations.

    The AUC variant needs binary input; a split whose held-out pairs are all
    of one class is skipped for every candidate.
    """
    if kmax < 1 or kmax > A.n:
        raise ValueError("kmax must satisfy 1 <= kmax <= n")
    _check_driver_params(p, n_splits, loss, {"l2", "sse", "dev", "deviance", "auc"})
    if loss in ("auc", "dev", "deviance") and A.weighted:
        raise ValueError(f"{loss} rank selection requires a binary network")
    candidates = [CandidateId(RANK, K) for K in range(1, kmax + 1)]
    losses = np.full((n_splits, kmax), np.nan)
    for m, srng in enumerate(rng.spawn(n_splits)):
        mask = sample_mask(A.n, p, A.directed, srng)
        rows, cols = mask.heldout_pairs()
        truths = A.values_at(rows, cols)
        full = complete(A, mask, kmax, srng)
        for q in range(kmax):
            preds = full.truncated(q + 1).values_at(rows, cols)
            try:
                losses[m, q] = _pair_loss(loss, PairScoreSet(rows, cols, truths, preds))
            except ValueError:
                continue
    return _finish(candidates, losses)


def tune_regularization(A, tau_grid, K, p=0.9, n_splits=3, rng=None,
                        restarts=10) -> SelectionResult:
    """Tune the spectral-clustering regularizer by partition stability.

    For each tau, the partition from regularized spectral clustering of the
    completed network is compared (on the held-out pairs) with the partition
    from the same clustering of the full network; the tau whose partitions
    agree best across splits wins.
    """
    if A.directed or A.weighted:
        raise ValueError("regularization tuning expects an undirected binary graph")
    taus = sorted(set(float(t) for t in tau_grid))
    if not taus:
        raise ValueError("tau grid is empty")
    _check_driver_params(p, n_splits, "l2", {"l2"})
    candidates = [CandidateId(TAU_REG, t) for t in taus]
    rng_full, rng_splits = rng.spawn(2)
    dense = A.to_dense()
    full_labels = [
        regularized_spectral_clustering(dense, t, K, child, restarts)
        for t, child in zip(taus, rng_full.spawn(len(taus)))
    ]
    losses = np.full((n_splits, len(taus)), np.nan)
    for m, srng in enumerate(rng_splits.spawn(n_splits)):
        mask = sample_mask(A.n, p, False, srng)
        rows, cols = mask.heldout_pairs()
        W = complete(A, mask, K, srng).to_dense()
        for q, tau in enumerate(taus):
            split_labels = regularized_spectral_clustering(W, tau, K, srng, restarts)
            losses[m, q] = ccd(split_labels, full_labels[q], rows, cols)
    return _finish(candidates, losses)


def tune_graphon(A, tau_grid, p=0.9, n_splits=3, kmax=10, rng=None) -> SelectionResult:
    """Tune the neighborhood-smoothing bandwidth multiplier.

    Per split, the reconstruction rank is first chosen by held-out squared
    error, then each tau smooths the clipped reconstruction with bandwidth
    h = tau * sqrt(log n / n) and is scored on the held-out pairs. Taus whose
    bandwidth falls outside (0, 1) are recorded as missing.
    """
    from .graphon import pairwise_dissimilarity, smooth_with_dissimilarity

    if A.directed or A.weighted:
        raise ValueError("graphon tuning expects an undirected binary graph")
    taus = sorted(set(float(t) for t in tau_grid))
    if not taus:
        raise ValueError("tau grid is empty")
    _check_driver_params(p, n_splits, "sse", {"sse"})
    candidates = [CandidateId(TAU_GRAPHON, t) for t in taus]
    scale = math.sqrt(math.log(A.n) / A.n)
    losses = np.full((n_splits, len(taus)), np.nan)
    for m, srng in enumerate(rng.spawn(n_splits)):
        mask = sample_mask(A.n, p, False, srng)
        rows, cols = mask.heldout_pairs()
        truths = A.values_at(rows, cols)
        full = complete(A, mask, kmax, srng)
        rank_sse = [
            sse_loss(PairScoreSet(rows, cols, truths,
                                  full.truncated(K).values_at(rows, cols)))
            for K in range(1, kmax + 1)
        ]
        best_k = int(np.argmin(rank_sse)) + 1
        W = np.clip(full.truncated(best_k).to_dense(), 0.0, 1.0)
        dist = pairwise_dissimilarity(W)
        for q, tau in enumerate(taus):
            h = tau * scale
            if not 0.0 < h < 1.0:
                continue
            smoothed = smooth_with_dissimilarity(W, dist, h)
            preds = smoothed[rows, cols]
            losses[m, q] = sse_loss(PairScoreSet(rows, cols, truths, preds))
    return _finish(candidates, losses)


def stability_select(per_rep_choices, mode=MOST_FREQUENT) -> CandidateId:
    """Aggregate repeated selections: the modal choice (ties to the simpler
    candidate) or the round-half-up average for integer-valued families.

    Averaging requires all choices to come from one family; real-valued
    families average without rounding.
    """
    choices = list(per_rep_choices)
    if not choices:
        raise ValueError("no choices to aggregate")
    if mode == MOST_FREQUENT:
        counts = {}
        for c in choices:
            counts[c] = counts.get(c, 0) + 1
        top = max(counts.values())
        return min((c for c, k in counts.items() if k == top), key=lambda c: c.sort_key)
    if mode == AVERAGE:
        families = {c.family for c in choices}
        if len(families) != 1:
            raise ValueError("cannot average choices across families")
        family = families.pop()
        mean = float(np.mean([c.value for c in choices]))
        if family in _INTEGER_FAMILIES:
            return CandidateId(family, math.floor(mean + 0.5))
        return CandidateId(family, mean)
    raise ValueError(f"unknown stability mode {mode!r}")
