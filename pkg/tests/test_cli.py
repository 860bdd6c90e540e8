import json

import numpy as np
import pytest

from splr.cli import EXIT_CONFIG, EXIT_IO, EXIT_OK, build_parser, config_from_args, main
from splr.harness import load_convergence, load_metrics, load_ranking

SOLVER = ["--alpha", "0.1", "--lambda1", "0.5", "--lambda2", "0.01", "--lambda3", "10",
          "--subspace-dim", "3", "--max-iter", "30"]


@pytest.fixture
def files(tmp_path):
    rng = np.random.default_rng(3)
    y = np.repeat(np.arange(3), 10)
    X = rng.random((30, 8)) * 0.3
    X[:, :2] += y[:, None] * 0.5
    np.savetxt(tmp_path / "x.csv", X, delimiter=",")
    np.savetxt(tmp_path / "y.txt", y, fmt="%d")
    return tmp_path


def run(*argv):
    return main([str(a) for a in argv])


class TestParser:
    def test_flag_defaults_come_from_config(self):
        args = build_parser().parse_args(["sweep", "--out", "o"])
        c = config_from_args(args)
        assert c.solver.K is None and c.solver.subspace_dim(1000) == 200
        assert c.solver.gamma == 2 and c.solver.mu == 1.05 and c.solver.max_iter == 1500
        assert c.restarts == 20 and c.features == tuple(range(20, 201, 20))

    def test_flags_override_config(self, tmp_path):
        (tmp_path / "c.txt").write_text("alpha = 5\nrestarts = 7\nmu = 1.2\n")
        args = build_parser().parse_args(
            ["sweep", "--config", str(tmp_path / "c.txt"), "--out", "o", "--alpha", "0.1,1",
             "--features", "10:30:10"])
        c = config_from_args(args)
        assert c.sweep == {"alpha": (0.1, 1)} and c.restarts == 7 and c.solver.mu == 1.2
        assert c.features == (10, 20, 30)

    def test_no_guard(self):
        args = build_parser().parse_args(["fit", "--out", "o", "--no-guard"])
        assert config_from_args(args).solver.guard is False
        args = build_parser().parse_args(["fit", "--out", "o"])
        assert config_from_args(args).solver.guard is True


class TestCommands:
    def test_fit(self, files):
        out = files / "fit"
        assert run("fit", "--data", files / "x.csv", "--out", out, *SOLVER,
                   "--debug", "--track-weights") == EXIT_OK
        W = np.loadtxt(out / "W.csv", delimiter=",")
        H = np.loadtxt(out / "H.csv", delimiter=",")
        assert W.shape == (8, 3) and H.shape == (3, 8)
        it, _, _ = load_convergence(out / "convergence.csv")
        assert np.loadtxt(out / "weights.csv", delimiter=",").shape == (it.size, 30)
        ranking = load_ranking(out / "ranking.csv")
        np.testing.assert_array_equal(np.sort(ranking.order), np.arange(8))
        np.testing.assert_allclose(ranking.scores, (W**2).sum(axis=1), rtol=1e-15)
        for m in "SZL":
            assert (out / f"debug_{m}.csv").exists()

    def test_fit_rejects_baseline_method(self, files):
        (files / "c.txt").write_text("method = variance\n")
        assert run("fit", "--config", files / "c.txt", "--data", files / "x.csv",
                   "--out", files / "o") == EXIT_CONFIG

    @pytest.mark.parametrize("method", ["variance", "laplacian_score"])
    def test_rank_baseline(self, files, method):
        out = files / method
        assert run("rank", "--data", files / "x.csv", "--method", method, "--out", out) == EXIT_OK
        assert load_ranking(out / "ranking.csv").order.size == 8
        assert not (out / "convergence.csv").exists()

    def test_eval_with_ranking_file(self, files):
        run("rank", "--data", files / "x.csv", "--method", "variance", "--out", files / "r")
        out = files / "e"
        code = run("eval", "--data", files / "x.csv", "--labels", files / "y.txt",
                   "--ranking", files / "r" / "ranking.csv", "--features", "2,4",
                   "--restarts", "3", "--out", out)
        assert code == EXIT_OK
        doc = load_metrics(out / "metrics.json")
        assert [r["N"] for r in doc["records"]] == [2, 4]
        assert len(doc["records"][0]["summary"].acc_values) == 3

    def test_eval_pam(self, files):
        code = run("eval", "--data", files / "x.csv", "--labels", files / "y.txt",
                   "--features", "2", "--restarts", "2", "--clusterer", "pam",
                   "--out", files / "e", *SOLVER)
        assert code == EXIT_OK

    def test_sweep_and_compare(self, files, capsys):
        (files / "cfg.txt").write_text(
            f"data = {files / 'x.csv'}\nlabels = {files / 'y.txt'}\n"
            "alpha = [0.1, 1]\nlambda1 = 0.5\nlambda2 = 0.01\nlambda3 = 10\n"
            "subspace_dim = 3\nmax_iter = 30\nfeatures = 2:4:2\nrestarts = 12\n"
        )
        a, b = files / "a", files / "b"
        assert run("sweep", "--config", files / "cfg.txt", "--out", a) == EXIT_OK
        assert (a / "config.txt").read_text() == (files / "cfg.txt").read_text()
        assert len(load_metrics(a / "metrics.json")["records"]) == 4
        assert run("sweep", "--config", files / "cfg.txt", "--method", "variance",
                   "--out", b) == EXIT_OK
        capsys.readouterr()
        code = run("compare", a, b, "--metric", "nmi", "--alternative", "less",
                   "--out", files / "cmp")
        assert code == EXIT_OK
        rows = json.loads((files / "cmp" / "comparison.json").read_text())
        assert len(rows) == 1 and 0.0 <= rows[0]["p"] <= 1.0 and rows[0]["h"] in (0, 1)
        assert rows[0]["n_pairs"] == 12 and rows[0]["metric"] == "nmi"
        assert "p=" in capsys.readouterr().out

    def test_compare_identical_outputs(self, files, capsys):
        argv = ["sweep", "--data", files / "x.csv", "--labels", files / "y.txt",
                "--method", "variance", "--features", "2", "--restarts", "3"]
        run(*argv, "--out", files / "a")
        run(*argv, "--out", files / "b")
        assert run("compare", files / "a", files / "b") == EXIT_CONFIG
        assert "all differences zero" in capsys.readouterr().err

    def test_sweep_deterministic(self, files):
        argv = ["sweep", "--data", files / "x.csv", "--labels", files / "y.txt", *SOLVER,
                "--mu", "1.0,1.05", "--features", "2,4", "--restarts", "3"]
        assert run(*argv, "--out", files / "o1") == EXIT_OK
        assert run(*argv, "--out", files / "o2", "--workers", "2") == EXIT_OK
        for path in (files / "o1").iterdir():
            if path.name in ("timing.json", "resolved_config.txt"):
                continue
            assert path.read_bytes() == (files / "o2" / path.name).read_bytes(), path.name


class TestExitCodes:
    def test_missing_data_file(self, files):
        assert run("fit", "--data", files / "nope.csv", "--out", files / "o") == EXIT_IO

    def test_missing_config_file(self, files):
        assert run("sweep", "--config", files / "nope.txt", "--out", files / "o") == EXIT_IO

    def test_malformed_data(self, files):
        (files / "bad.csv").write_text("1,2\n3\n")
        assert run("fit", "--data", files / "bad.csv", "--out", files / "o") == EXIT_IO

    def test_unknown_subcommand(self, files):
        assert run("frobnicate") == EXIT_CONFIG

    def test_bad_flag_value(self, files):
        assert run("fit", "--data", files / "x.csv", "--seed", "x", "--out", files / "o") == EXIT_CONFIG

    def test_negative_weight(self, files):
        assert run("fit", "--data", files / "x.csv", "--alpha", "-1", "--out", files / "o") == EXIT_CONFIG

    def test_sweep_list_outside_sweep(self, files):
        assert run("fit", "--data", files / "x.csv", "--alpha", "1,2", "--out", files / "o") == EXIT_CONFIG

    def test_N_exceeds_d(self, files):
        assert run("eval", "--data", files / "x.csv", "--labels", files / "y.txt",
                   "--out", files / "o") == EXIT_CONFIG

    def test_label_mismatch(self, files):
        (files / "short.txt").write_text("0\n1\n")
        assert run("eval", "--data", files / "x.csv", "--labels", files / "short.txt",
                   "--features", "2", "--out", files / "o") == EXIT_CONFIG

    def test_eval_needs_labels(self, files):
        assert run("eval", "--data", files / "x.csv", "--features", "2",
                   "--out", files / "o") == EXIT_CONFIG

    def test_compare_missing_dir(self, files):
        assert run("compare", files / "a", files / "b") == EXIT_IO

    def test_compare_corrupt_metrics(self, files):
        for side in "ab":
            (files / side).mkdir()
            (files / side / "metrics.json").write_text("{not json")
        assert run("compare", files / "a", files / "b") == EXIT_IO
