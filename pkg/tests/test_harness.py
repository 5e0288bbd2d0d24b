import json
import math
import os
import subprocess
import sys

import numpy as np
import pytest
from scipy.stats import binom

import wassbound as wb
from wassbound.cli import main as cli_main
from wassbound.errors import ConfigError
from wassbound.harness import CSV_HEADER, build_sampler, violations


def uniform_config(**overrides):
    raw = {
        "kind": "iid",
        "law": {"name": "uniform_cube", "d": 1},
        "bound": {"name": "dkw"},
        "n_grid": [50],
        "t_grid": [0.1, 0.2],
        "trials": 300,
        "seed": 11,
    }
    raw.update(overrides)
    return raw


class TestConfig:
    def test_round_trip(self):
        cfg = wb.ExperimentConfig.from_dict(uniform_config())
        assert cfg.kind == "iid"
        assert cfg.n_grid == (50,)
        assert cfg.trials == 300

    @pytest.mark.parametrize(
        "mutation,field",
        [
            ({"bound": {}}, "bound"),
            ({"n_grid": []}, "n_grid"),
            ({"t_grid": None}, "t_grid"),
            ({"trials": 0}, "trials"),
            ({"kind": "weird"}, "kind"),
        ],
    )
    def test_field_level_errors(self, mutation, field):
        raw = uniform_config()
        raw.update(mutation)
        with pytest.raises(ConfigError, match=field):
            wb.ExperimentConfig.from_dict(raw)

    def test_env_seed_default(self, monkeypatch):
        raw = uniform_config()
        del raw["seed"]
        monkeypatch.setenv("WASSBOUND_SEED", "77")
        assert wb.ExperimentConfig.from_dict(raw).seed == 77

    def test_unknown_law_and_bound(self):
        with pytest.raises(ConfigError, match="law.name"):
            build_sampler({"name": "cauchy"}, 0)
        with pytest.raises(ConfigError, match="bound.name"):
            wb.run_experiment(
                wb.ExperimentConfig.from_dict(uniform_config(bound={"name": "nope"}))
            )


class TestIidDeviationMc:
    def test_t_zero_frequency_one(self):
        s = wb.Sampler.uniform_cube(1, seed=1)
        freq, _ = wb.iid_deviation_mc(s, wb.UniformCdf(), n=20, t=0.0, trials=50, seed=1)
        assert freq == 1.0

    def test_two_point_binomial_oracle(self):
        # W1(L_n, mu) = |S_n/n - 1/2| for the two-point uniform law; t sits
        # between binomial support points so the event is float-robust
        meas = wb.DiscreteMeasure([[0.0], [1.0]], [0.5, 0.5])
        s = wb.Sampler.finite(meas, seed=2)
        n, t, trials = 100, 0.095, 4000
        freq, se = wb.iid_deviation_mc(s, meas, n=n, t=t, trials=trials, seed=3)
        ks = np.arange(n + 1)
        exact = float(np.sum(binom.pmf(ks, n, 0.5)[np.abs(ks / n - 0.5) >= t]))
        assert freq == pytest.approx(exact, abs=3 * math.sqrt(exact * (1 - exact) / trials) + 1e-9)

    def test_dkw_dominance_small_grid(self):
        s = wb.Sampler.uniform_cube(1, seed=4)
        for n, t in [(50, 0.1), (200, 0.05)]:
            freq, se = wb.iid_deviation_mc(s, wb.UniformCdf(), n=n, t=t, trials=2000, seed=5)
            assert freq <= 2 * math.exp(-2 * n * t * t) + 3 * se


class TestRunExperiment:
    def test_point_mass_trivial(self):
        raw = uniform_config(
            law={"name": "finite", "points": [[0.0]], "weights": [1.0]},
            reference={"type": "finite"},
            t_grid=[0.5],
            trials=10,
        )
        rows = wb.run_experiment(wb.ExperimentConfig.from_dict(raw))
        assert len(rows) == 1
        assert rows[0].empirical_freq == 0.0
        assert rows[0].verdict == "dominates"

    def test_gaussian_auto_grid_no_violations(self):
        raw = {
            "kind": "iid",
            "law": {"name": "gaussian", "mean": [0.0], "cov_diag": [1.0]},
            "bound": {"name": "gaussian_t1_auto", "a2": 0.25, "n_mc": 4000},
            "n_grid": [25, 50, 100, 200],
            "t_grid": [0.25, 0.5, 1.0, 2.0],
            "trials": 200,
            "seed": 9,
        }
        rows = wb.run_experiment(wb.ExperimentConfig.from_dict(raw))
        assert len(rows) == 16
        assert not violations(rows)

    def test_markov_dispatch(self):
        raw = {
            "kind": "markov",
            "kernel": {"name": "ar1", "r": 0.5},
            "bound": {"name": "markov", "C": 2.0, "m1": "auto", "d": 1},
            "reference": {"run_length": 20_000, "support": 400},
            "n_grid": [200],
            "t_grid": [0.5, 2.0],
            "trials": 30,
            "seed": 13,
        }
        rows = wb.run_experiment(wb.ExperimentConfig.from_dict(raw))
        assert len(rows) == 2
        assert not violations(rows)

    def test_quantized_reference_correction(self):
        raw = uniform_config(
            law={"name": "gaussian", "mean": [0.0, 0.0], "cov_diag": [1.0, 1.0]},
            reference={"type": "quantized", "points": 2000},
            n_grid=[20],
            t_grid=[2.0],
            trials=20,
        )
        rows = wb.run_experiment(wb.ExperimentConfig.from_dict(raw))
        assert rows[0].t_correction > 0.0

    def test_outputs_written(self, tmp_path):
        base = str(tmp_path / "out")
        raw = uniform_config(trials=50, output=base)
        wb.run_experiment(wb.ExperimentConfig.from_dict(raw))
        assert (tmp_path / "out.csv").exists()
        payload = json.loads((tmp_path / "out.json").read_text())
        assert "rows" in payload and len(payload["rows"]) == 2


class TestReportTables:
    def make_rows(self):
        return [
            wb.ComparisonRow(100, 0.2, 0.0, 0.0, -3.0, "dominates"),
            wb.ComparisonRow(50, 0.1, 0.5, 0.05, 0.2, "vacuous"),
        ]

    def test_single_row(self):
        text, csv_text = wb.report_tables(self.make_rows()[:1])
        assert len(text.strip().splitlines()) == 2
        assert csv_text.splitlines()[0] == CSV_HEADER

    def test_sorted_by_n_then_t(self):
        text, csv_text = wb.report_tables(self.make_rows())
        lines = csv_text.strip().splitlines()[1:]
        assert lines[0].startswith("50,") and lines[1].startswith("100,")

    def test_byte_identical_rerun(self):
        raw = uniform_config(trials=100)
        rows1 = wb.run_experiment(wb.ExperimentConfig.from_dict(raw))
        rows2 = wb.run_experiment(wb.ExperimentConfig.from_dict(raw))
        assert wb.report_tables(rows1)[1] == wb.report_tables(rows2)[1]

    def test_empty_rows_rejected(self):
        with pytest.raises(ValueError):
            wb.report_tables([])


class TestCli:
    def write_measure(self, path, rows):
        path.write_text("\n".join(",".join(str(v) for v in row) for row in rows) + "\n")

    def test_w1_subcommand(self, tmp_path, capsys):
        fa = tmp_path / "a.csv"
        fb = tmp_path / "b.csv"
        self.write_measure(fa, [[0.0, 0.5], [1.0, 0.5]])
        self.write_measure(fb, [[0.5, 1.0]])
        assert cli_main(["w1", str(fa), str(fb)]) == 0
        assert float(capsys.readouterr().out.strip()) == pytest.approx(0.5)

    def test_bound_subcommand(self, capsys):
        rc = cli_main(["bound", "t1", "-p", "C=1", "-p", "log_Ct=0", "-p", "t=1", "-p", "n=100"])
        assert rc == 0
        payload = json.loads(capsys.readouterr().out)
        assert payload["log_value"] == pytest.approx(-12.5)

    def test_cover_subcommand(self, capsys):
        rc = cli_main(["cover", "euclidean", "--R", "1", "--delta", "1", "--d", "2"])
        assert rc == 0
        assert float(capsys.readouterr().out.strip()) == pytest.approx(9.0)

    def test_simulate_exit_codes(self, tmp_path, capsys):
        cfg = tmp_path / "exp.json"
        cfg.write_text(json.dumps(uniform_config(trials=60)))
        assert cli_main(["simulate", "--config", str(cfg)]) == 0
        assert cli_main(["simulate", "--config", str(tmp_path / "missing.json")]) == 1

    def test_report_subcommand(self, tmp_path, capsys):
        base = str(tmp_path / "res")
        cfg = tmp_path / "exp.json"
        cfg.write_text(json.dumps(uniform_config(trials=60, output=base)))
        assert cli_main(["simulate", "--config", str(cfg)]) == 0
        capsys.readouterr()
        assert cli_main(["report", base + ".json"]) == 0
        out = capsys.readouterr().out
        assert "verdict" in out

    def test_violation_exit_code(self, tmp_path):
        # an impossibly strong bound claims P <= exp(-100) at t=0
        results = {
            "rows": [
                {
                    "n": 10,
                    "t": 0.0,
                    "empirical_freq": 1.0,
                    "stderr": 0.0,
                    "bound_log_value": -100.0,
                    "verdict": "violation",
                    "t_correction": 0.0,
                }
            ]
        }
        path = tmp_path / "res.json"
        path.write_text(json.dumps(results))
        assert cli_main(["report", str(path)]) == 2

    def test_installed_entry_point(self, tmp_path):
        fa = tmp_path / "a.csv"
        fa.write_text("0.0,1.0\n")
        proc = subprocess.run(
            [sys.executable, "-m", "wassbound.cli", "w1", str(fa), str(fa)],
            capture_output=True,
            text=True,
        )
        assert proc.returncode == 0
        assert float(proc.stdout.strip()) == 0.0
