import json

import numpy as np
import pytest
from scipy import stats

from royexact import cli


def run(argv):
    return cli.main(argv)


class TestCmdCdf:
    def test_default_grid_is_monotone_512_rows(self, tmp_path):
        rc = run(["cdf", "--p", "500", "--m", "100", "--q", "6",
                  "--method", "exact", "--out", str(tmp_path)])
        assert rc == 0
        rows = (tmp_path / "cdf.csv").read_text().splitlines()
        assert rows[0] == "x,F"
        assert len(rows) == 513
        data = np.loadtxt(tmp_path / "cdf.csv", delimiter=",", skiprows=1)
        assert np.all(np.diff(data[:, 0]) > 0)
        assert np.all(np.diff(data[:, 1]) >= 0)
        assert data[-1, 1] > 0.99
        manifest = json.loads((tmp_path / "manifest.json").read_text())
        assert manifest["command"] == "cdf"
        assert manifest["outputs"] == ["cdf.csv"]
        assert list(manifest) == sorted(manifest)

    def test_matches_f_oracle_for_q1(self, tmp_path):
        rc = run(["cdf", "--p", "5", "--m", "2", "--q", "1", "--method", "exact",
                  "--grid-min", "0", "--grid-max", "6", "--grid-points", "60",
                  "--out", str(tmp_path)])
        assert rc == 0
        data = np.loadtxt(tmp_path / "cdf.csv", delimiter=",", skiprows=1)
        # (p=5, m=2, q=1): largest root ~ (2/4) F(2, 4)
        np.testing.assert_allclose(
            data[:, 1], stats.f.cdf(2.0 * data[:, 0], 2, 4), atol=1e-8)

    def test_theorem2_requires_b_or_sigma(self, tmp_path, capsys):
        with pytest.raises(SystemExit) as exc:
            run(["cdf", "--p", "500", "--m", "96", "--q", "4",
                 "--method", "theorem2", "--out", str(tmp_path)])
        assert exc.value.code == 2

    def test_invalid_regime_exits_2(self, tmp_path):
        with pytest.raises(SystemExit) as exc:
            run(["cdf", "--p", "50", "--m", "100", "--q", "6", "--out", str(tmp_path)])
        assert exc.value.code == 2

    def test_theorem2_with_b(self, tmp_path):
        rc = run(["cdf", "--p", "800", "--m", "96", "--q", "4",
                  "--method", "theorem2", "--b", "0.9", "--out", str(tmp_path)])
        assert rc == 0
        manifest = json.loads((tmp_path / "manifest.json").read_text())
        assert manifest["parameters"]["b_used"] == pytest.approx(0.9)


class TestCmdPvalue:
    def test_zero_statistic(self, capsys):
        rc = run(["pvalue", "--p", "100", "--m", "20", "--q", "3", "--stat", "0"])
        assert rc == 0
        report = json.loads(capsys.readouterr().out)
        assert report["p_value"] == 1.0
        assert report["method"] == "exact"
        assert report["b_used"] == 1.0

    def test_exact_vs_tw_small_gap(self, capsys):
        args = ["--p", "1000", "--m", "100", "--q", "6", "--stat", "0.17"]
        run(["pvalue", *args, "--method", "exact"])
        exact = json.loads(capsys.readouterr().out)["p_value"]
        run(["pvalue", *args, "--method", "tw"])
        tw = json.loads(capsys.readouterr().out)["p_value"]
        assert abs(exact - tw) <= 0.05

    def test_data_triggers_estimation_and_correction(self, tmp_path, capsys):
        rng = np.random.default_rng(12)
        p, m = 300, 64
        path = tmp_path / "data.csv"
        np.savetxt(path, rng.standard_normal((p, m)), delimiter=",")
        rc = run(["pvalue", "--p", str(p), "--m", str(m), "--q", "4",
                  "--stat", "0.3", "--data", str(path)])
        assert rc == 0
        report = json.loads(capsys.readouterr().out)
        assert report["method"] == "theorem2"
        assert report["b_used"] == pytest.approx(1.0, abs=0.05)

    def test_data_conflicts_with_other_method(self, tmp_path):
        path = tmp_path / "data.csv"
        np.savetxt(path, np.eye(5), delimiter=",")
        with pytest.raises(SystemExit) as exc:
            run(["pvalue", "--p", "10", "--m", "5", "--q", "2", "--stat", "1",
                 "--data", str(path), "--method", "tw"])
        assert exc.value.code == 2


class TestCmdSimulate:
    def test_reproducible_byte_for_byte(self, tmp_path):
        base = ["simulate", "--p", "40", "--m", "8", "--q", "3",
                "--n-sims", "100", "--seed", "7"]
        for d in ("a", "b"):
            rc = run([*base, "--out", str(tmp_path / d)])
            assert rc == 0
        assert (tmp_path / "a/empirical.csv").read_bytes() == \
               (tmp_path / "b/empirical.csv").read_bytes()

    def test_worker_count_invariant(self, tmp_path):
        base = ["simulate", "--p", "40", "--m", "8", "--q", "3",
                "--n-sims", "64", "--seed", "9"]
        rc = run([*base, "--workers", "1", "--out", str(tmp_path / "w1")])
        assert rc == 0
        rc = run([*base, "--workers", "8", "--out", str(tmp_path / "w8")])
        assert rc == 0
        assert (tmp_path / "w1/empirical.csv").read_bytes() == \
               (tmp_path / "w8/empirical.csv").read_bytes()

    def test_sorted_sample_rows(self, tmp_path):
        rc = run(["simulate", "--p", "30", "--m", "6", "--q", "2",
                  "--n-sims", "50", "--seed", "3", "--sigma", "random:diag-uniform",
                  "--out", str(tmp_path)])
        assert rc == 0
        data = np.loadtxt(tmp_path / "empirical.csv", delimiter=",", skiprows=1)
        assert data.shape == (50, 2)
        assert np.all(np.diff(data[:, 0]) >= 0)
        assert data[-1, 1] == 1.0

    def test_sigma_csv_input(self, tmp_path):
        sigma = tmp_path / "sigma.csv"
        np.savetxt(sigma, np.diag([1.0, 2.0, 1.5, 0.5] + [1.0] * 26), delimiter=",")
        rc = run(["simulate", "--p", "30", "--m", "6", "--q", "2",
                  "--n-sims", "20", "--seed", "4", "--sigma", str(sigma),
                  "--out", str(tmp_path)])
        assert rc == 0


class TestCmdValidate:
    def test_dw_small_run_writes_report_and_fails_thresholds(self, tmp_path):
        # tiny n: the report must appear, thresholds evaluated, exit 5 on noise
        rc = run(["validate", "--figure", "dw", "--n-sims", "60",
                  "--p-grid", "60,120", "--m", "20", "--q", "3",
                  "--seed", "1", "--out", str(tmp_path)])
        assert rc == 5
        summary = (tmp_path / "summary.csv").read_text().splitlines()
        assert len(summary) == 3
        assert (tmp_path / "dw_p60.csv").exists()
        assert (tmp_path / "dw_p120.csv").exists()
        assert json.loads((tmp_path / "manifest.json").read_text())["command"] == "validate"

    def test_dw_rich_run_passes(self, tmp_path):
        rc = run(["validate", "--figure", "dw", "--n-sims", "4000",
                  "--p-grid", "60", "--m", "20", "--q", "3",
                  "--seed", "2", "--out", str(tmp_path)])
        assert rc == 0
        header, row = (tmp_path / "summary.csv").read_text().splitlines()
        vals = dict(zip(header.split(","), row.split(",")))
        assert vals["pass"] == "true"
        assert float(vals["ks_exact"]) <= 0.02

    def test_t1_report_columns(self, tmp_path):
        rc = run(["validate", "--figure", "t1", "--n-sims", "150",
                  "--p-grid", "100,200", "--m", "24", "--q", "3",
                  "--seed", "3", "--out", str(tmp_path)])
        assert rc in (0, 5)
        data = (tmp_path / "t1_p100.csv").read_text().splitlines()
        assert data[0] == "x_scaled,x_raw,exact,empirical,approx"
        first = [float(v) for v in data[1].split(",")]
        assert first[0] == pytest.approx(100 * first[1])

    def test_t2_medians_and_fixed_run(self, tmp_path):
        rc = run(["validate", "--figure", "t2", "--p-grid", "150,300",
                  "--m", "24", "--q", "3", "--reps", "6", "--rep-sims", "40",
                  "--n-sims", "300", "--seed", "4", "--out", str(tmp_path)])
        assert rc in (0, 5)
        lines = (tmp_path / "summary.csv").read_text().splitlines()
        assert len(lines) == 4  # two p rows, one fixed-scale row, plus header
        assert (tmp_path / "t2_p150_replicates.csv").exists()
        assert (tmp_path / "t2_p300_fixed_scale.csv").exists()

    def test_tw_figure_report(self, tmp_path):
        rc = run(["validate", "--figure", "tw", "--n-sims", "80",
                  "--p-grid", "400", "--m", "40", "--q", "3",
                  "--seed", "5", "--out", str(tmp_path)])
        assert rc in (0, 5)
        data = (tmp_path / "tw_p400.csv").read_text().splitlines()
        assert data[0] == "x,exact,empirical,approx"


class TestErrorMapping:
    def test_unsupported_params_exit_3(self, monkeypatch, tmp_path):
        from royexact.exact_dist import UnsupportedParams

        def boom(pp, x):
            raise UnsupportedParams("not in the implemented family")

        monkeypatch.setattr(cli, "theorem3_cdf", boom)
        rc = run(["cdf", "--p", "50", "--m", "10", "--q", "2",
                  "--grid-max", "5", "--out", str(tmp_path)])
        assert rc == 3

    def test_simulation_failure_cap_exit_4(self, monkeypatch, tmp_path):
        from royexact.matrix_core import RankDeficient

        def always_degenerate(*a, **k):
            raise RankDeficient("synthetic failure")

        monkeypatch.setattr(cli, "simulate_empirical_cdf", always_degenerate)
        rc = run(["simulate", "--p", "30", "--m", "6", "--q", "2",
                  "--n-sims", "10", "--seed", "1", "--out", str(tmp_path)])
        assert rc == 4

    def test_bad_sigma_matrix_exit_2(self, tmp_path):
        sigma = tmp_path / "sigma.csv"
        np.savetxt(sigma, np.diag([1.0, -2.0, 1.0]), delimiter=",")
        rc = run(["simulate", "--p", "3", "--m", "2", "--q", "1",
                  "--n-sims", "5", "--seed", "1", "--sigma", str(sigma),
                  "--out", str(tmp_path)])
        assert rc == 2


class TestEnvironment:
    def test_workers_env_default(self, monkeypatch):
        monkeypatch.setenv("ROY_EXACT_WORKERS", "5")
        parser = cli.build_parser()
        args = parser.parse_args(["simulate", "--p", "10", "--m", "2", "--q", "2",
                                  "--n-sims", "1", "--seed", "0"])
        assert args.workers == 5
