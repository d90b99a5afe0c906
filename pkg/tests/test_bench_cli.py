import json

import numpy as np
import pytest

from edgecv import bench, cli
from edgecv.simgen import BlockDesign, gen_block_model, gen_rdpg_directed, export_instance

TINY_SELECT_MODEL = """
task = select_model
generator = sbm
n = 100
k_true = 2
lambda = 12
kmax = 3
replications = 2
stability = mode
stability_reps = 3
seed = 11
"""


def strip_ms(csv_text):
    out = []
    for line in csv_text.strip().splitlines():
        cells = line.split(",")
        del cells[bench.CSV_COLUMNS.index("ms")]
        out.append(",".join(cells))
    return "\n".join(out)


class TestConfigParsing:
    def test_round_trip_fields(self):
        cfg = bench.parse_config(TINY_SELECT_MODEL)
        assert cfg.task == "select_model"
        assert cfg.generator == "sbm"
        assert cfg.n == 100 and cfg.k_true == 2 and cfg.lam == 12.0
        assert cfg.stability == "mode" and cfg.stability_reps == 3

    def test_comments_and_lists(self):
        cfg = bench.parse_config(
            "task = tune_reg\ngenerator = dcsbm\nn = 50\nk_true = 2\n"
            "lambda = 5\ntau_grid = 0.1, 0.5, 1.0  # grid\nreplications = 1\n")
        assert cfg.tau_grid == [0.1, 0.5, 1.0]

    def test_unknown_key_rejected(self):
        with pytest.raises(ValueError, match="unknown key"):
            bench.parse_config("task = select_model\nwat = 1\n")

    def test_missing_task_rejected(self):
        with pytest.raises(ValueError):
            bench.parse_config("n = 5\n")

    def test_bad_stability_rejected(self):
        with pytest.raises(ValueError):
            bench.parse_config(
                "task = select_model\ngenerator = sbm\nn = 10\nstability = maybe\n")


class TestRunExperiment:
    def test_rows_follow_schema(self):
        cfg = bench.parse_config(TINY_SELECT_MODEL)
        rows, summary = bench.run_experiment(cfg)
        assert len(rows) == 4  # 2 reps x (base + mode)
        for row in rows:
            assert tuple(row.keys()) == bench.CSV_COLUMNS
        assert set(summary["methods"]) == {"ECV-l2", "ECV-l2-mode"}
        assert summary["config_hash"]

    def test_csv_written_with_stable_schema(self, tmp_path):
        cfg = bench.parse_config(TINY_SELECT_MODEL)
        out = str(tmp_path / "res")
        bench.run_experiment(cfg, out_prefix=out)
        text = (tmp_path / "res.csv").read_text()
        assert text.splitlines()[0] == ",".join(bench.CSV_COLUMNS)
        summary = json.loads((tmp_path / "res.json").read_text())
        assert summary["task"] == "select_model"

    def test_select_rank_task(self):
        cfg = bench.parse_config(
            "task = select_rank\ngenerator = rdpg\nn = 150\nk_true = 2\n"
            "kmax = 4\nloss = auc\nreplications = 2\nseed = 3\n")
        rows, summary = bench.run_experiment(cfg)
        assert all(row["model_true"] == "rdpg" for row in rows)
        assert all(row["family_hat"] == "rank" for row in rows)

    def test_k_only_scoring(self):
        # scoring by K alone counts DCSBM-2 as correct on an SBM-2 truth
        cfg = bench.parse_config(
            "task = select_model\ngenerator = sbm\nn = 100\nk_true = 2\n"
            "lambda = 12\nkmax = 3\nreplications = 2\nscore = k\n"
            "stability = avg\nstability_reps = 3\nseed = 11\n")
        rows, summary = bench.run_experiment(cfg)
        avg_rows = [r for r in rows if r["method"].endswith("-avg")]
        assert avg_rows and all(r["value_hat"] in ("1", "2", "3") for r in avg_rows)

    def test_sweep_pn_rates(self):
        cfg = bench.parse_config(
            "task = sweep_pn\ngenerator = sbm\nn = 80\nk_true = 2\nlambda = 12\n"
            "kmax = 3\nreplications = 2\np_grid = 0.85,0.9\nn_grid = 2\nseed = 5\n")
        rows, summary = bench.run_experiment(cfg)
        assert len(summary["rates"]) == 2
        assert len(rows) == 4
        assert {row["p"] for row in rows} == {"0.85", "0.9"}

    def test_concentration_summary(self):
        cfg = bench.parse_config(
            "task = concentration\ngenerator = sbm\nn = 100\nk_true = 2\n"
            "lambda = 15\nreplications = 2\nseed = 5\n")
        _, summary = bench.run_experiment(cfg)
        assert 0 < summary["ratio_median"] < 10

    def test_input_path_source(self, tmp_path):
        inst = gen_block_model(BlockDesign(n=60, K=2, lam=10),
                               np.random.default_rng(0))
        export_instance(inst, tmp_path / "g")
        cfg = bench.parse_config(
            f"task = select_model\ninput = {tmp_path / 'g.edges.txt'}\n"
            "kmax = 3\nreplications = 1\nseed = 2\n")
        rows, _ = bench.run_experiment(cfg)
        assert rows[0]["correct"] == ""  # no planted truth for loaded graphs


class TestDeterminism:
    def test_double_run_identical_modulo_timing(self):
        cfg = bench.parse_config(TINY_SELECT_MODEL)
        rows1, _ = bench.run_experiment(cfg)
        rows2, _ = bench.run_experiment(cfg)
        assert strip_ms(bench.rows_to_csv(rows1)) == strip_ms(bench.rows_to_csv(rows2))


@pytest.fixture
def exported_rdpg(tmp_path):
    inst = gen_rdpg_directed(120, 2, np.random.default_rng(8))
    export_instance(inst, tmp_path / "rdpg")
    return tmp_path / "rdpg.edges.txt"


class TestCli:
    def test_select_rank_matches_library(self, tmp_path, exported_rdpg, capsys):
        rc = cli.main(["select-rank", "--input", str(exported_rdpg), "--directed",
                       "--kmax", "3", "--loss", "auc", "--seed", "4",
                       "--out", str(tmp_path / "sel"), "--format", "json"])
        assert rc == 0
        printed = capsys.readouterr().out
        from edgecv.netgraph import load_edge_list
        from edgecv import ecv

        A = load_edge_list(exported_rdpg, directed=True)
        want = ecv.select_rank(
            A, 3, loss="auc",
            rng=np.random.default_rng(np.random.SeedSequence([4, 0])))
        assert f"selected (ECV-AUC): {want.chosen}" in printed
        payload = json.loads((tmp_path / "sel.json").read_text())
        assert payload["chosen"]["value"] == want.chosen.value

    def test_simulate_writes_csv_and_json(self, tmp_path):
        cfg_path = tmp_path / "exp.cfg"
        cfg_path.write_text(TINY_SELECT_MODEL + f"\nout = {tmp_path / 'run'}\n")
        rc = cli.main(["simulate", "--config", str(cfg_path)])
        assert rc == 0
        lines = (tmp_path / "run.csv").read_text().strip().splitlines()
        assert len(lines) == 1 + 4
        assert json.loads((tmp_path / "run.json").read_text())["seed"] == 11

    def test_simulate_double_run_byte_identical(self, tmp_path):
        cfg_path = tmp_path / "exp.cfg"
        cfg_path.write_text(TINY_SELECT_MODEL)
        texts = []
        for run in ("a", "b"):
            out = str(tmp_path / run)
            assert cli.main(["simulate", "--config", str(cfg_path), "--out", out]) == 0
            texts.append(strip_ms((tmp_path / f"{run}.csv").read_text()))
        assert texts[0] == texts[1]

    def test_complete_full_p_needs_flag(self, tmp_path, exported_rdpg):
        rc = cli.main(["complete", "--input", str(exported_rdpg), "--directed",
                       "--k", "2", "--p", "1.0", "--out", str(tmp_path / "rec")])
        assert rc == 2
        rc = cli.main(["complete", "--input", str(exported_rdpg), "--directed",
                       "--k", "2", "--p", "1.0", "--allow-full",
                       "--out", str(tmp_path / "rec")])
        assert rc == 0
        with np.load(str(tmp_path / "rec.npz")) as payload:
            assert payload["U"].shape == (120, 2)

    def test_complete_dense_mode(self, tmp_path, exported_rdpg):
        rc = cli.main(["complete", "--input", str(exported_rdpg), "--directed",
                       "--k", "2", "--p", "0.9", "--seed", "3",
                       "--mode", "dense", "--out", str(tmp_path / "rec")])
        assert rc == 0
        dense = np.loadtxt(str(tmp_path / "rec.txt"))
        assert dense.shape == (120, 120)

    def test_complete_truncation_flag(self, tmp_path, exported_rdpg):
        rc = cli.main(["complete", "--input", str(exported_rdpg), "--directed",
                       "--k", "2", "--p", "0.9", "--seed", "3",
                       "--mode", "dense", "--truncate", "0,1",
                       "--out", str(tmp_path / "clamped")])
        assert rc == 0
        dense = np.loadtxt(str(tmp_path / "clamped.txt"))
        assert dense.min() >= 0.0 and dense.max() <= 1.0
        rc = cli.main(["complete", "--input", str(exported_rdpg), "--directed",
                       "--k", "2", "--truncate", "0,1",
                       "--out", str(tmp_path / "bad")])
        assert rc == 2  # factors mode cannot clamp

    def test_unknown_flag_exits_nonzero(self):
        with pytest.raises(SystemExit) as err:
            cli.main(["select-rank", "--nope"])
        assert err.value.code != 0

    def test_tune_reg_cli(self, tmp_path, capsys):
        inst = gen_block_model(BlockDesign(n=80, K=2, lam=6),
                               np.random.default_rng(1))
        export_instance(inst, tmp_path / "g")
        rc = cli.main(["tune-reg", "--input", str(tmp_path / "g.edges.txt"),
                       "--k", "2", "--tau-grid", "0.3,0.9", "--seed", "2"])
        assert rc == 0
        assert "selected (ECV-ccd): tau=" in capsys.readouterr().out

    def test_tune_reg_cli_average_stability(self, tmp_path, capsys):
        # averaged tau choices stay in the tau family and are not rounded
        inst = gen_block_model(BlockDesign(n=80, K=2, lam=6),
                               np.random.default_rng(1))
        export_instance(inst, tmp_path / "g")
        rc = cli.main(["tune-reg", "--input", str(tmp_path / "g.edges.txt"),
                       "--k", "2", "--tau-grid", "0.3,0.9", "--seed", "2",
                       "--stability", "avg", "--stability-reps", "3",
                       "--out", str(tmp_path / "tr"), "--format", "json"])
        assert rc == 0
        out = capsys.readouterr().out
        assert "selected (ECV-ccd-avg): tau=" in out
        payload = json.loads((tmp_path / "tr.json").read_text())
        assert len(payload["per_rep_choices"]) == 3
