"""Tests for the CLI app commands."""

from unittest.mock import patch

import numpy as np
import yaml
from typer.testing import CliRunner

from adaptive_bk.app import EXIT_CONFIG, EXIT_DEGENERATE_TRACE, app
from adaptive_bk.config import ExperimentConfig
from adaptive_bk.harness import build_problem
from adaptive_bk.serialization import read_matrix, write_trace_csv
from adaptive_bk.validation import load_experiment_config

runner = CliRunner()

SMALL_GAUSSIAN = ["--m", "40", "--n", "10", "--s", "3", "--blocks", "8", "--sigma", "0.05"]


def _write_config(tmp_path, data):
    path = tmp_path / "exp.yaml"
    path.write_text(yaml.safe_dump(data))
    return path


class TestGenerateCommand:
    def test_gaussian(self, tmp_path):
        out = tmp_path / "problem"
        result = runner.invoke(
            app, ["generate", "--out", str(out), "--seed", "3", *SMALL_GAUSSIAN]
        )
        assert result.exit_code == 0, result.output
        assert read_matrix(out / "matrix.mtx").shape == (40, 10)
        assert (out / "solution.mtx").exists()
        cfg = ExperimentConfig.model_validate(
            yaml.safe_load((out / "problem.yaml").read_text())["configuration"]
        )
        assert cfg.problem.kind == "files"
        assert cfg.problem.block_sizes == [5] * 8

    def test_config_paths_survive_a_directory_change(self, tmp_path, monkeypatch):
        monkeypatch.chdir(tmp_path)
        result = runner.invoke(app, ["generate", "--out", "gen", *SMALL_GAUSSIAN])
        assert result.exit_code == 0, result.output

        elsewhere = tmp_path / "elsewhere"
        elsewhere.mkdir()
        monkeypatch.chdir(elsewhere)
        cfg = load_experiment_config(tmp_path / "gen" / "problem.yaml")
        assert cfg.problem.matrix_path.is_absolute()
        assert cfg.output_dir == (tmp_path / "gen" / "results").resolve()
        assert build_problem(cfg.problem, 0).matrix.shape == (40, 10)

    def test_tomography(self, tmp_path):
        out = tmp_path / "tomo"
        result = runner.invoke(
            app,
            ["generate", "--out", str(out), "--kind", "tomography", "--n-pix", "8", "--n-angles", "3"],
        )
        assert result.exit_code == 0, result.output
        assert (out / "phantom.pgm").exists()

    def test_unknown_kind(self, tmp_path):
        result = runner.invoke(app, ["generate", "--out", str(tmp_path), "--kind", "ct"])
        assert result.exit_code == EXIT_CONFIG

    def test_inconsistent_blocks(self, tmp_path):
        result = runner.invoke(
            app, ["generate", "--out", str(tmp_path), "--m", "40", "--blocks", "7"]
        )
        assert result.exit_code == EXIT_CONFIG


class TestSolveCommand:
    def test_constant(self, tmp_path):
        result = runner.invoke(
            app,
            ["solve", "--epochs", "3", "--out", str(tmp_path / "solve"), *SMALL_GAUSSIAN],
        )
        assert result.exit_code == 0, result.output
        assert "Finished 24 iterations" in result.output
        assert (tmp_path / "solve" / "solve.csv").exists()

    def test_pilot_reports_estimates(self):
        result = runner.invoke(
            app,
            [
                "solve",
                "--schedule",
                "pilot",
                "--lambda",
                "0.05",
                "--n0",
                "10",
                "--n1",
                "5",
                "--epochs",
                "5",
                *SMALL_GAUSSIAN,
            ],
        )
        assert result.exit_code == 0, result.output
        assert "Heuristic Estimates" in result.output

    def test_unknown_schedule(self):
        result = runner.invoke(app, ["solve", "--schedule", "fancy", *SMALL_GAUSSIAN])
        assert result.exit_code == EXIT_CONFIG

    def test_invalid_eta(self):
        result = runner.invoke(app, ["solve", "--eta", "2.5", *SMALL_GAUSSIAN])
        assert result.exit_code == EXIT_CONFIG


class TestExperimentCommand:
    def test_runs_and_overrides(self, tmp_path, tiny_config_data):
        path = _write_config(tmp_path, tiny_config_data)
        out = tmp_path / "override"
        result = runner.invoke(
            app, ["experiment", "--config", str(path), "--out", str(out), "--seed", "4"]
        )
        assert result.exit_code == 0, result.output
        summary = yaml.safe_load((out / "summary.yaml").read_text())["configuration"]
        assert summary["seed"] == 4
        assert "Experiment Summary" in result.output

    def test_invalid_config(self, tmp_path, tiny_config_data):
        tiny_config_data["epochs"] = 0
        result = runner.invoke(
            app, ["experiment", "--config", str(_write_config(tmp_path, tiny_config_data))]
        )
        assert result.exit_code == EXIT_CONFIG

    def test_missing_config(self, tmp_path):
        result = runner.invoke(app, ["experiment", "--config", str(tmp_path / "none.yaml")])
        assert result.exit_code == EXIT_CONFIG


class TestEstimateCommand:
    def test_estimates_to_yaml(self, tmp_path):
        trace = tmp_path / "trace.csv"
        write_trace_csv(trace, 0.95 ** np.arange(200) + 1e-3)
        out = tmp_path / "est.yaml"
        result = runner.invoke(
            app, ["estimate", str(trace), "--n0", "50", "--n1", "20", "--out", str(out)]
        )
        assert result.exit_code == 0, result.output
        estimates = yaml.safe_load(out.read_text())["configuration"]
        assert 0 < estimates["gamma"] < 2
        assert estimates["n0"] == 50

    def test_degenerate_trace_exit_code(self, tmp_path):
        trace = tmp_path / "trace.csv"
        trace.write_text("j,bregman_to_final\n0,0\n1,0\n2,0\n3,0\n")
        result = runner.invoke(app, ["estimate", str(trace), "--n0", "2", "--n1", "1"])
        assert result.exit_code == EXIT_DEGENERATE_TRACE

    def test_bad_trace_file(self, tmp_path):
        trace = tmp_path / "trace.csv"
        trace.write_text("a,b\n")
        result = runner.invoke(app, ["estimate", str(trace)])
        assert result.exit_code == EXIT_CONFIG


class TestBoundCommand:
    def test_writes_csv(self, tmp_path):
        out = tmp_path / "bound.csv"
        result = runner.invoke(
            app,
            ["bound", "--gamma", "0.1", "--beta0", "100", "--k-max", "95", "--stride", "10", "--out", str(out)],
        )
        assert result.exit_code == 0, result.output
        lines = out.read_text().splitlines()
        assert lines[0].startswith("k,v_recursion")
        assert len(lines) == 1 + 11
        assert lines[-1].startswith("95,")

    def test_invalid_gamma(self, tmp_path):
        result = runner.invoke(
            app, ["bound", "--gamma", "3", "--beta0", "1", "--out", str(tmp_path / "b.csv")]
        )
        assert result.exit_code == EXIT_CONFIG


class TestValidateCommand:
    def test_valid(self, tmp_path, tiny_config_data):
        result = runner.invoke(app, ["validate", str(_write_config(tmp_path, tiny_config_data))])
        assert result.exit_code == 0
        assert "3 methods" in result.output

    def test_invalid(self, tmp_path, tiny_config_data):
        tiny_config_data["methods"][1]["schedule"]["gamma"] = 2.5
        result = runner.invoke(app, ["validate", str(_write_config(tmp_path, tiny_config_data))])
        assert result.exit_code == EXIT_CONFIG


class TestInitCommand:
    @patch("adaptive_bk.app.questionary")
    @patch("adaptive_bk.app.validate_and_fix")
    @patch("adaptive_bk.app.prompt_experiment_config")
    def test_saves(self, mock_prompt, mock_validate, mock_q, tmp_path, tiny_config_data):
        mock_prompt.return_value = tiny_config_data
        mock_validate.return_value = ExperimentConfig.model_validate(tiny_config_data)
        mock_q.confirm.return_value.ask.return_value = True
        out = tmp_path / "exp.yaml"
        result = runner.invoke(app, ["init", "--output", str(out)])
        assert result.exit_code == 0, result.output
        assert yaml.safe_load(out.read_text())["_metadata"]["kind"] == "experiment"

    @patch("adaptive_bk.app.validate_and_fix")
    @patch("adaptive_bk.app.prompt_experiment_config")
    def test_validation_aborted(self, mock_prompt, mock_validate, tmp_path):
        mock_prompt.return_value = {}
        mock_validate.return_value = None
        result = runner.invoke(app, ["init", "--output", str(tmp_path / "x.yaml")])
        assert result.exit_code == EXIT_CONFIG

    @patch("adaptive_bk.app.questionary")
    @patch("adaptive_bk.app.validate_and_fix")
    @patch("adaptive_bk.app.prompt_experiment_config")
    def test_declined_save(self, mock_prompt, mock_validate, mock_q, tmp_path, tiny_config_data):
        mock_prompt.return_value = tiny_config_data
        mock_validate.return_value = ExperimentConfig.model_validate(tiny_config_data)
        mock_q.confirm.return_value.ask.return_value = False
        out = tmp_path / "exp.yaml"
        result = runner.invoke(app, ["init", "--output", str(out)])
        assert result.exit_code == 0
        assert not out.exists()


class TestShowSchema:
    def test_lists_fields(self):
        result = runner.invoke(app, ["show-schema"])
        assert result.exit_code == 0
        assert "ExperimentConfig" in result.output
