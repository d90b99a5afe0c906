"""Command-line interface.

Subcommands: select-model, select-rank, tune-reg, tune-graphon, complete,
simulate. Selection subcommands print the chosen candidate and can write the
full per-candidate loss table; `simulate` runs a config-file experiment.
"""

from __future__ import annotations

import argparse
import json
import sys

import numpy as np

from . import ecv
from .bench import load_config, run_experiment
from .holdout import sample_mask
from .lowrank import complete as complete_matrix, truncate_entries
from .netgraph import load_edge_list


def _add_common(sub, with_loss=None, with_kmax=True):
    sub.add_argument("--input", required=True, help="edge-list file")
    sub.add_argument("--directed", action="store_true")
    sub.add_argument("--weighted", action="store_true")
    if with_kmax:
        sub.add_argument("--kmax", type=int, default=6)
    sub.add_argument("--p", type=float, default=0.9)
    sub.add_argument("--n-splits", type=int, default=3)
    if with_loss:
        sub.add_argument("--loss", choices=with_loss, default=with_loss[0])
    sub.add_argument("--stability", choices=("none", "mode", "avg", "both"),
                     default="none")
    sub.add_argument("--stability-reps", type=int, default=20)
    sub.add_argument("--seed", type=int, default=0)
    sub.add_argument("--out", default="", help="output path prefix")
    sub.add_argument("--format", choices=("csv", "json"), default="csv")


def build_parser():
    parser = argparse.ArgumentParser(
        prog="edgecv",
        description="Network model selection by cross-validation over node pairs",
    )
    subs = parser.add_subparsers(dest="command", required=True)

    sm = subs.add_parser("select-model", help="choose a block model and K")
    _add_common(sm, with_loss=("l2", "dev"))

    sr = subs.add_parser("select-rank", help="choose a reconstruction rank")
    _add_common(sr, with_loss=("sse", "auc", "dev"))

    tr = subs.add_parser("tune-reg", help="tune spectral-clustering regularization")
    _add_common(tr, with_kmax=False)
    tr.add_argument("--k", type=int, required=True, help="number of clusters")
    tr.add_argument("--tau-grid", required=True, help="comma list of tau values")

    tg = subs.add_parser("tune-graphon", help="tune neighborhood smoothing")
    _add_common(tg)
    tg.add_argument("--tau-grid", required=True, help="comma list of tau values")

    cp = subs.add_parser("complete", help="reconstruct a partially held-out network")
    cp.add_argument("--input", required=True)
    cp.add_argument("--directed", action="store_true")
    cp.add_argument("--weighted", action="store_true")
    cp.add_argument("--k", type=int, required=True, help="reconstruction rank")
    cp.add_argument("--p", type=float, default=0.9)
    cp.add_argument("--allow-full", action="store_true",
                    help="permit p = 1 (no held-out set)")
    cp.add_argument("--seed", type=int, default=0)
    cp.add_argument("--out", required=True, help="output path prefix")
    cp.add_argument("--mode", choices=("dense", "factors"), default="factors")
    cp.add_argument("--truncate", default="",
                    help="clamp entries to LO,HI (dense mode only; off by default)")

    sim = subs.add_parser("simulate", help="run a config-file experiment")
    sim.add_argument("--config", required=True)
    sim.add_argument("--out", default="", help="override the config's output prefix")
    return parser


def _stability_plan(args):
    modes = []
    if args.stability in ("mode", "both"):
        modes.append("mode")
    if args.stability in ("avg", "both"):
        modes.append("avg")
    return modes


def _selection_to_dict(result):
    payload = {
        "chosen": {"family": result.chosen.family, "value": result.chosen.value},
        "candidates": [
            {"family": c.family, "value": c.value, "mean_loss": _nan_none(m),
             "split_losses": [_nan_none(v) for v in result.losses[:, q]]}
            for q, (c, m) in enumerate(zip(result.candidates, result.mean_loss))
        ],
    }
    if result.per_rep_choices is not None:
        payload["per_rep_choices"] = [
            {"family": c.family, "value": c.value} for c in result.per_rep_choices
        ]
    return payload


def _nan_none(x):
    x = float(x)
    return None if np.isnan(x) else x


def _selection_to_csv(result):
    lines = ["family,value,mean_loss," +
             ",".join(f"loss_split_{m + 1}" for m in range(result.losses.shape[0]))]
    for q, cand in enumerate(result.candidates):
        vals = [str(v) for v in result.losses[:, q]]
        lines.append(f"{cand.family},{cand.value},{result.mean_loss[q]}," + ",".join(vals))
    return "\n".join(lines) + "\n"


def _write_selection(args, result, aggregated):
    if not args.out:
        return
    if args.format == "json":
        payload = _selection_to_dict(result)
        payload["stability"] = {
            mode: {"family": c.family, "value": c.value}
            for mode, c in aggregated.items()
        }
        with open(args.out + ".json", "w", encoding="utf-8") as fh:
            json.dump(payload, fh, indent=2)
            fh.write("\n")
    else:
        with open(args.out + ".csv", "w", encoding="utf-8") as fh:
            fh.write(_selection_to_csv(result))


def _run_selection(args, run_once, base_tag):
    """Shared driver for the selection subcommands: optional stability
    replications, printed choices, optional result files."""
    modes = _stability_plan(args)
    needed = args.stability_reps if modes else 1
    results = []
    for s in range(needed):
        rng = np.random.default_rng(np.random.SeedSequence([args.seed, s]))
        results.append(run_once(rng))
    first = results[0]
    if modes:
        first = first.with_choices(r.chosen for r in results)
    print(f"selected ({base_tag}): {first.chosen}")
    aggregated = {}
    choices = [r.chosen for r in results]
    for mode in modes:
        if mode == "avg":
            if len({c.family for c in choices}) == 1:
                pick = ecv.stability_select(choices, ecv.AVERAGE)
            else:
                # block-model menu: average the K values, take the modal family
                ks = [ecv.CandidateId(ecv.RANK, c.value) for c in choices]
                avg_k = ecv.stability_select(ks, ecv.AVERAGE)
                fam = ecv.stability_select(choices, ecv.MOST_FREQUENT).family
                pick = ecv.CandidateId(fam, avg_k.value)
        else:
            pick = ecv.stability_select(choices, ecv.MOST_FREQUENT)
        aggregated[mode] = pick
        print(f"selected ({base_tag}-{mode}): {pick}")
    _write_selection(args, first, aggregated)
    return 0


def _cmd_select_model(args):
    A = load_edge_list(args.input, directed=args.directed, weighted=args.weighted)
    return _run_selection(
        args,
        lambda rng: ecv.select_block_model(A, args.kmax, p=args.p,
                                           n_splits=args.n_splits,
                                           loss=args.loss, rng=rng),
        f"ECV-{args.loss}",
    )


def _cmd_select_rank(args):
    A = load_edge_list(args.input, directed=args.directed, weighted=args.weighted)
    return _run_selection(
        args,
        lambda rng: ecv.select_rank(A, args.kmax, p=args.p,
                                    n_splits=args.n_splits,
                                    loss=args.loss, rng=rng),
        f"ECV-{args.loss.upper() if args.loss in ('sse', 'auc') else args.loss}",
    )


def _parse_grid(text):
    return [float(tok) for tok in text.split(",") if tok.strip()]


def _cmd_tune_reg(args):
    A = load_edge_list(args.input, directed=args.directed, weighted=args.weighted)
    return _run_selection(
        args,
        lambda rng: ecv.tune_regularization(A, _parse_grid(args.tau_grid),
                                            args.k, p=args.p,
                                            n_splits=args.n_splits, rng=rng),
        "ECV-ccd",
    )


def _cmd_tune_graphon(args):
    A = load_edge_list(args.input, directed=args.directed, weighted=args.weighted)
    return _run_selection(
        args,
        lambda rng: ecv.tune_graphon(A, _parse_grid(args.tau_grid), p=args.p,
                                     n_splits=args.n_splits, kmax=args.kmax,
                                     rng=rng),
        "ECV-graphon",
    )


def _cmd_complete(args):
    if args.p >= 1.0 and not args.allow_full:
        print("error: --p 1.0 leaves no held-out set; pass --allow-full "
              "to reconstruct anyway", file=sys.stderr)
        return 2
    if not 0 < args.p <= 1:
        print("error: --p must be in (0, 1]", file=sys.stderr)
        return 2
    if args.truncate and args.mode != "dense":
        print("error: --truncate requires --mode dense", file=sys.stderr)
        return 2
    A = load_edge_list(args.input, directed=args.directed, weighted=args.weighted)
    rng = np.random.default_rng(np.random.SeedSequence([args.seed]))
    mask = sample_mask(A.n, args.p, A.directed, rng)
    rec = complete_matrix(A, mask, args.k, rng)
    if args.mode == "dense":
        path = args.out + ".txt"
        if args.truncate:
            lo, hi = (float(tok) for tok in args.truncate.split(","))
            np.savetxt(path, truncate_entries(rec, lo, hi))
        else:
            np.savetxt(path, rec.to_dense())
    else:
        path = args.out + ".npz"
        np.savez(path, U=rec.U, sigma=rec.sigma, V=rec.V, p=rec.p)
    print(f"wrote {path}")
    return 0


def _cmd_simulate(args):
    cfg = load_config(args.config)
    out = args.out or cfg.out
    _, summary = run_experiment(cfg, out_prefix=out)
    if out:
        print(f"wrote {out}.csv and {out}.json")
    else:
        print(json.dumps(summary, indent=2, sort_keys=True))
    return 0


_COMMANDS = {
    "select-model": _cmd_select_model,
    "select-rank": _cmd_select_rank,
    "tune-reg": _cmd_tune_reg,
    "tune-graphon": _cmd_tune_graphon,
    "complete": _cmd_complete,
    "simulate": _cmd_simulate,
}


def main(argv=None):
    args = build_parser().parse_args(argv)
    return _COMMANDS[args.command](args)


if __name__ == "__main__":
    sys.exit(main())
