"""Experiment harness: run selection tasks on generated or loaded networks
over seeded replications and emit CSV rows plus a JSON summary."""

from __future__ import annotations

import hashlib
import json
import math
import time
from dataclasses import dataclass, field, asdict, replace

import numpy as np

from . import ecv
from .netgraph import load_edge_list
from .holdout import sample_mask
from .lowrank import complete
from .cluster import regularized_spectral_clustering
from .metrics import clustering_accuracy
from .graphon import pairwise_dissimilarity, smooth_with_dissimilarity
from .simgen import (
    BlockDesign,
    PlantedInstance,
    PIECEWISE_K3,
    SMOOTH_RANKFULL,
    gen_block_model,
    gen_graphon,
    gen_rdpg_directed,
)

TASKS = ("select_model", "select_rank", "tune_reg", "tune_graphon",
         "sweep_pn", "concentration")

CSV_COLUMNS = (
    "rep", "n", "K_true", "lambda", "t", "beta", "model_true", "method",
    "family_hat", "value_hat", "correct", "loss_best", "ms", "p", "n_splits",
)

# default candidate grids for the two bandwidth-style parameters: the
# regularizer grid spans (0, 2] finely; the smoothing multiplier uses integer
# steps, matching the resolution cross-validation can actually distinguish
_DEF_TAU_GRID_REG = [round(0.1 * k, 1) for k in range(1, 21)]
_DEF_TAU_GRID_GRAPHON = [float(k) for k in range(1, 7)]


def _parse_bool(text):
    return text.strip().lower() in ("1", "true", "yes", "on")


@dataclass
class ExperimentConfig:
    """One experiment: a task, a data source, the candidate grid and the
    cross-validation settings. Parsed from flat "key = value" files."""

    task: str
    generator: str = ""
    input_path: str = ""
    directed: bool = False
    weighted: bool = False
    n: int = 0
    k_true: int = 0
    lam: float = 0.0
    t: float = 0.0
    beta: float = 0.2
    kmax: int = 6
    k: int = 0
    p: float = 0.9
    n_splits: int = 3
    loss: str = "l2"
    stability: str = "none"
    stability_reps: int = 20
    replications: int = 50
    seed: int = 0
    score: str = "model"
    restarts: int = 10
    tau_grid: list = field(default_factory=list)
    p_grid: list = field(default_factory=list)
    n_grid: list = field(default_factory=list)
    out: str = ""
    raw: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.task not in TASKS:
            raise ValueError(f"unknown task {self.task!r}")
        if self.replications < 1:
            raise ValueError("replications must be >= 1")
        if not 0 < self.p < 1:
            raise ValueError("p must be strictly between 0 and 1")
        if self.stability not in ("none", "mode", "avg", "both"):
            raise ValueError("stability must be none, mode, avg or both")
        if self.score not in ("model", "k"):
            raise ValueError("score must be 'model' or 'k'")
        if not self.generator and not self.input_path:
            raise ValueError("config needs a generator or an input path")


def _parse_list(text, cast):
    return [cast(tok) for tok in text.split(",") if tok.strip()]


_CONFIG_FIELDS = {
    "task": str, "generator": str, "input_path": str, "out": str, "loss": str,
    "stability": str, "score": str,
    "directed": _parse_bool, "weighted": _parse_bool,
    "n": int, "k_true": int, "kmax": int, "k": int, "n_splits": int,
    "stability_reps": int, "replications": int, "seed": int, "restarts": int,
    "lam": float, "t": float, "beta": float, "p": float,
    "tau_grid": lambda s: _parse_list(s, float),
    "p_grid": lambda s: _parse_list(s, float),
    "n_grid": lambda s: _parse_list(s, int),
}
_KEY_ALIASES = {"lambda": "lam", "input": "input_path"}


def parse_config(text) -> ExperimentConfig:
    """Parse a flat key = value config; '#' starts a comment, lists are
    comma-separated."""
    values = {}
    for line_no, raw_line in enumerate(text.splitlines(), start=1):
        line = raw_line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ValueError(f"config line {line_no}: expected 'key = value'")
        key, _, val = line.partition("=")
        key = _KEY_ALIASES.get(key.strip().lower(), key.strip().lower())
        if key not in _CONFIG_FIELDS:
            raise ValueError(f"config line {line_no}: unknown key {key!r}")
        values[key] = _CONFIG_FIELDS[key](val.strip())
    if "task" not in values:
        raise ValueError("config must set a task")
    return ExperimentConfig(raw=dict(values), **values)


def load_config(path) -> ExperimentConfig:
    with open(path, "r", encoding="utf-8") as fh:
        return parse_config(fh.read())


def config_hash(cfg: ExperimentConfig) -> str:
    payload = {k: v for k, v in asdict(cfg).items() if k != "raw"}
    blob = json.dumps(payload, sort_keys=True).encode()
    return hashlib.sha256(blob).hexdigest()[:16]


def _rep_rng(cfg, rep, stream):
    return np.random.default_rng(np.random.SeedSequence([cfg.seed, rep, stream]))


def _generate(cfg, rep):
    if cfg.input_path:
        A = load_edge_list(cfg.input_path, directed=cfg.directed,
                           weighted=cfg.weighted)
        return PlantedInstance(A=A, truth=None, M=None)
    gen = cfg.generator
    if gen in ("sbm", "dcsbm"):
        design = BlockDesign(n=cfg.n, K=cfg.k_true, lam=cfg.lam, t=cfg.t,
                             beta=cfg.beta, degree_corrected=gen == "dcsbm")
        return gen_block_model(design, _rep_rng(cfg, rep, 0))
    if gen == "rdpg":
        return gen_rdpg_directed(cfg.n, cfg.k_true, _rep_rng(cfg, rep, 0))
    if gen in (PIECEWISE_K3, SMOOTH_RANKFULL):
        return gen_graphon(cfg.n, gen, _rep_rng(cfg, rep, 0))
    raise ValueError(f"unknown generator {cfg.generator!r}")


def _fmt(x):
    if x is None:
        return ""
    if isinstance(x, (bool, np.bool_)):
        return str(int(x))
    return str(x)


def _row(cfg, rep, method, family_hat, value_hat, correct, loss_best, ms):
    block = cfg.generator in ("sbm", "dcsbm")
    return {
        "rep": str(rep),
        "n": str(cfg.n) if cfg.n else "",
        "K_true": str(cfg.k_true) if cfg.k_true else "",
        "lambda": str(cfg.lam) if block else "",
        "t": str(cfg.t) if block else "",
        "beta": str(cfg.beta) if block else "",
        "model_true": cfg.generator or "input",
        "method": method,
        "family_hat": _fmt(family_hat),
        "value_hat": _fmt(value_hat),
        "correct": _fmt(correct),
        "loss_best": _fmt(loss_best),
        "ms": str(int(ms)),
        "p": str(cfg.p),
        "n_splits": str(cfg.n_splits),
    }


def _stability_tags(cfg):
    base = {"l2": "ECV-l2", "dev": "ECV-dev", "deviance": "ECV-dev",
            "sse": "ECV-SSE", "auc": "ECV-AUC"}[cfg.loss]
    tags = [base]
    if cfg.stability in ("mode", "both"):
        tags.append(base + "-mode")
    if cfg.stability in ("avg", "both"):
        tags.append(base + "-avg")
    return base, tags


def _aggregate_choices(choices, suffix, score):
    """Stability aggregation for one method-tag suffix.

    Averaging works on the K values only (never across families); the family
    attached to an averaged K is the modal family.
    """
    if suffix == "":
        return choices[0]
    if suffix == "-mode":
        if score == "k":
            return ecv.stability_select(
                [ecv.CandidateId(ecv.RANK, c.value) for c in choices],
                ecv.MOST_FREQUENT)
        return ecv.stability_select(choices, ecv.MOST_FREQUENT)
    avg_k = ecv.stability_select(
        [ecv.CandidateId(ecv.RANK, c.value) for c in choices], ecv.AVERAGE)
    if score == "k" or choices[0].family == ecv.RANK:
        return avg_k
    fam = ecv.stability_select(choices, ecv.MOST_FREQUENT).family
    return ecv.CandidateId(fam, avg_k.value)


def _fmt_value(candidate):
    v = candidate.value
    return int(v) if candidate.family in (ecv.SBM, ecv.DCSBM, ecv.RANK) else v


def _is_correct(cfg, pick):
    if not cfg.k_true:
        return None
    if cfg.score == "k" or pick.family == ecv.RANK:
        return pick.value == cfg.k_true
    return pick.family == cfg.generator and pick.value == cfg.k_true


def _replication_loop(cfg, body):
    """Run body(rep) for every replication; failures are recorded and the
    run continues."""
    failures = []
    for rep in range(cfg.replications):
        try:
            body(rep)
        except Exception as exc:
            failures.append({"rep": rep, "error": str(exc)})
    return failures


def _select_model_batch(cfg):
    """Replication loop shared by select_model, select_rank and the sweeps."""
    base, tags = _stability_tags(cfg)
    needed = cfg.stability_reps if len(tags) > 1 else 1
    rows = []
    per_method_correct = {t: [] for t in tags}
    rank_task = cfg.task == "select_rank"

    def body(rep):
        t0 = time.perf_counter()
        inst = _generate(cfg, rep)
        first = None
        choices = []
        for s in range(needed):
            rng = np.random.default_rng(np.random.SeedSequence([cfg.seed, rep, 1, s]))
            if rank_task:
                res = ecv.select_rank(inst.A, cfg.kmax, p=cfg.p,
                                      n_splits=cfg.n_splits, loss=cfg.loss, rng=rng)
            else:
                res = ecv.select_block_model(inst.A, cfg.kmax, p=cfg.p,
                                             n_splits=cfg.n_splits, loss=cfg.loss,
                                             rng=rng, restarts=cfg.restarts)
            if first is None:
                first = res
            choices.append(res.chosen)
        ms = (time.perf_counter() - t0) * 1000.0
        for tag in tags:
            suffix = tag[len(base):]
            pick = _aggregate_choices(choices, suffix, cfg.score)
            correct = _is_correct(cfg, pick)
            loss_best = first.loss_of(first.chosen) if suffix == "" else None
            rows.append(_row(cfg, rep, tag, pick.family, _fmt_value(pick),
                             correct, loss_best, ms))
            if correct is not None:
                per_method_correct[tag].append(bool(correct))

    failures = _replication_loop(cfg, body)
    summary = {
        tag: {"fraction_correct": float(np.mean(oks)), "reps": len(oks)}
        for tag, oks in per_method_correct.items() if oks
    }
    return rows, summary, failures


def _run_select_model(cfg):
    rows, summary, failures = _select_model_batch(cfg)
    return rows, {"methods": summary, "failures": failures}


def _run_sweep_pn(cfg):
    p_grid = cfg.p_grid or [cfg.p]
    n_grid = cfg.n_grid or [cfg.n_splits]
    rows = []
    rates = {}
    failures = []
    for p in p_grid:
        for n_splits in n_grid:
            sub = replace(cfg, task="select_model", p=p, n_splits=n_splits,
                          p_grid=[], n_grid=[])
            sub_rows, summary, sub_failures = _select_model_batch(sub)
            rows.extend(sub_rows)
            failures.extend(sub_failures)
            for tag, stats in summary.items():
                rates[f"{tag}@p={p:g},N={n_splits}"] = stats["fraction_correct"]
    by_n = {}
    for key, rate in rates.items():
        tag, coords = key.split("@")
        n_label = coords.split(",")[1]
        by_n.setdefault(f"{tag}@{n_label}", []).append(rate)
    ranges = {key: (max(vals) - min(vals)) for key, vals in by_n.items()}
    return rows, {"rates": rates, "range_over_p": ranges, "failures": failures}


def _run_concentration(cfg):
    rows = []
    ratios = []

    def body(rep):
        t0 = time.perf_counter()
        inst = _generate(cfg, rep)
        rng = _rep_rng(cfg, rep, 1)
        mask = sample_mask(inst.A.n, cfg.p, inst.A.directed, rng)
        rank = cfg.k or cfg.k_true
        rec = complete(inst.A, mask, rank, rng).to_dense()
        err_completed = np.linalg.norm(rec - inst.M, 2)
        err_observed = np.linalg.norm(inst.A.to_dense() - inst.M, 2)
        ratio = float(err_completed / err_observed)
        ratios.append(ratio)
        ms = (time.perf_counter() - t0) * 1000.0
        rows.append(_row(cfg, rep, "ECV-concentration", "ratio", ratio, None,
                         None, ms))

    failures = _replication_loop(cfg, body)
    arr = np.array(ratios)
    summary = {
        "ratio_median": float(np.median(arr)),
        "ratio_max": float(arr.max()),
        "fraction_le_3": float(np.mean(arr <= 3.0)),
        "failures": failures,
    }
    return rows, summary


def _run_tune_reg(cfg):
    taus = sorted(set(float(t) for t in (cfg.tau_grid or _DEF_TAU_GRID_REG)))
    K = cfg.k or cfg.k_true
    rows = []
    acc_fixed = []   # per rep: accuracy of the full-data clustering at each tau
    acc_chosen = []  # per rep: accuracy at the tau the driver picked

    def body(rep):
        t0 = time.perf_counter()
        inst = _generate(cfg, rep)
        res = ecv.tune_regularization(inst.A, taus, K, p=cfg.p,
                                      n_splits=cfg.n_splits,
                                      rng=_rep_rng(cfg, rep, 1),
                                      restarts=cfg.restarts)
        dense = inst.A.to_dense()
        accs = []
        for tau, child in zip(taus, _rep_rng(cfg, rep, 2).spawn(len(taus))):
            labels = regularized_spectral_clustering(dense, tau, K, child,
                                                     cfg.restarts)
            accs.append(clustering_accuracy(labels, inst.truth))
        acc_fixed.append(accs)
        chosen_tau = res.chosen.value
        acc_chosen.append(accs[taus.index(chosen_tau)])
        ms = (time.perf_counter() - t0) * 1000.0
        rows.append(_row(cfg, rep, "ECV-ccd", ecv.TAU_REG, chosen_tau, None,
                         res.loss_of(res.chosen), ms))

    failures = _replication_loop(cfg, body)
    med_fixed = np.median(np.array(acc_fixed), axis=0)
    summary = {
        "tau_grid": taus,
        "median_accuracy_per_tau": [float(v) for v in med_fixed],
        "best_fixed_tau": float(taus[int(np.argmax(med_fixed))]),
        "best_fixed_median_accuracy": float(med_fixed.max()),
        "chosen_median_accuracy": float(np.median(acc_chosen)),
        "failures": failures,
    }
    return rows, summary


def _offdiag_rel_error(P, M):
    off = ~np.eye(P.shape[0], dtype=bool)
    return float(np.linalg.norm((P - M)[off]) / np.linalg.norm(M[off]))


def _run_tune_graphon(cfg):
    taus = sorted(set(float(t) for t in (cfg.tau_grid or _DEF_TAU_GRID_GRAPHON)))
    rows = []
    err_chosen = []
    err_fixed = []

    def body(rep):
        t0 = time.perf_counter()
        inst = _generate(cfg, rep)
        res = ecv.tune_graphon(inst.A, taus, p=cfg.p, n_splits=cfg.n_splits,
                               kmax=cfg.kmax, rng=_rep_rng(cfg, rep, 1))
        dense = inst.A.to_dense()
        dist = pairwise_dissimilarity(dense)
        scale = math.sqrt(math.log(inst.A.n) / inst.A.n)
        errs = []
        for tau in taus:
            h = tau * scale
            if not 0.0 < h < 1.0:
                errs.append(float("nan"))
                continue
            est = smooth_with_dissimilarity(dense, dist, h)
            errs.append(_offdiag_rel_error(est, inst.M))
        err_fixed.append(errs)
        chosen_tau = res.chosen.value
        err_chosen.append(errs[taus.index(chosen_tau)])
        ms = (time.perf_counter() - t0) * 1000.0
        rows.append(_row(cfg, rep, "ECV-graphon", ecv.TAU_GRAPHON, chosen_tau,
                         None, res.loss_of(res.chosen), ms))

    failures = _replication_loop(cfg, body)
    med_fixed = np.nanmedian(np.array(err_fixed), axis=0)
    summary = {
        "tau_grid": taus,
        "median_error_per_tau": [float(v) for v in med_fixed],
        "oracle_best_median_error": float(np.nanmin(med_fixed)),
        "grid_median_of_median_errors": float(np.nanmedian(med_fixed)),
        "chosen_median_error": float(np.median(err_chosen)),
        "failures": failures,
    }
    return rows, summary


_RUNNERS = {
    "select_model": _run_select_model,
    "select_rank": _run_select_model,
    "sweep_pn": _run_sweep_pn,
    "concentration": _run_concentration,
    "tune_reg": _run_tune_reg,
    "tune_graphon": _run_tune_graphon,
}


def rows_to_csv(rows) -> str:
    lines = [",".join(CSV_COLUMNS)]
    for row in rows:
        lines.append(",".join(row[col] for col in CSV_COLUMNS))
    return "\n".join(lines) + "\n"


def run_experiment(cfg: ExperimentConfig, out_prefix=None):
    """Run all replications of an experiment; returns (rows, summary) and, if
    an output prefix is configured, writes <prefix>.csv and <prefix>.json."""
    prefix = out_prefix or cfg.out
    if prefix:
        # Fail on unwritable output before any compute.
        with open(prefix + ".csv", "w", encoding="utf-8"):
            pass
    rows, summary = _RUNNERS[cfg.task](cfg)
    summary = {
        "task": cfg.task,
        "config": {k: v for k, v in asdict(cfg).items()
                   if k != "raw" and v not in ("", [], {})},
        "config_hash": config_hash(cfg),
        "seed": cfg.seed,
        **summary,
    }
    if prefix:
        with open(prefix + ".csv", "w", encoding="utf-8") as fh:
            fh.write(rows_to_csv(rows))
        with open(prefix + ".json", "w", encoding="utf-8") as fh:
            json.dump(summary, fh, indent=2, sort_keys=True)
            fh.write("\n")
    return rows, summary
