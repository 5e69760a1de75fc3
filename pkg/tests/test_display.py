"""Tests for console output and logging setup."""

import logging
from unittest.mock import patch

import pytest
from rich.logging import RichHandler
from rich.table import Table

from adaptive_bk.config import ExperimentConfig
from adaptive_bk.display import (
    _fmt,
    _truncate,
    configure_logging,
    display_error,
    display_estimates,
    display_run_record,
    display_schema,
    display_success,
    display_summary,
    display_validation_errors,
)


class TestFmt:
    def test_values(self):
        assert _fmt(None) == "-"
        assert _fmt(float("nan")) == "-"
        assert _fmt(0.123456) == "0.1235"
        assert _fmt(7) == "7"


class TestTruncate:
    def test_short_string_unchanged(self):
        assert _truncate("hello", 10) == "hello"

    def test_long_string_truncated(self):
        result = _truncate("a" * 100, 20)
        assert len(result) == 20
        assert result.endswith("...")


class TestConfigureLogging:
    def test_level_from_env(self, monkeypatch):
        monkeypatch.setenv("ABK_LOG", "debug")
        assert configure_logging() == logging.DEBUG
        assert logging.getLogger("adaptive_bk").level == logging.DEBUG

    def test_explicit_level_and_single_handler(self):
        configure_logging("info")
        assert configure_logging("error") == logging.ERROR
        handlers = [
            h for h in logging.getLogger("adaptive_bk").handlers if isinstance(h, RichHandler)
        ]
        assert len(handlers) == 1

    @pytest.mark.parametrize("name", ["loud", "verbose"])
    def test_unknown_falls_back_to_warn(self, name):
        assert configure_logging(name) == logging.WARNING


class TestDisplayFunctions:
    @patch("adaptive_bk.display.console")
    def test_display_summary_table(self, mock_console):
        summary = {
            "methods": {
                "RK": {"lambda": 0.0, "final_rel_residual": 0.1, "final_rel_error": 0.2},
                "aRK": {"lambda": 0.0, "gamma": 0.05, "beta0": 10.0, "skipped_gammas": [2.0]},
            }
        }
        display_summary(summary)
        table = mock_console.print.call_args_list[0].args[0]
        assert isinstance(table, Table)
        assert table.row_count == 2
        assert "skipped gamma" in mock_console.print.call_args_list[-1].args[0]

    @patch("adaptive_bk.display.console")
    def test_display_estimates_warns_when_clamped(self, mock_console):
        display_estimates(1e-8, 3.0, True, 5, 10, 5)
        assert "clamped" in mock_console.print.call_args_list[-1].args[0]

    @patch("adaptive_bk.display.console")
    def test_display_run_record_shows_last_rows(self, mock_console):
        display_run_record("RK", list(range(10)), {"rel_error": [0.1] * 10})
        table = mock_console.print.call_args.args[0]
        assert table.row_count == 5

    @patch("adaptive_bk.display.console")
    def test_display_schema(self, mock_console):
        display_schema(ExperimentConfig)
        table = mock_console.print.call_args.args[0]
        assert table.row_count == len(ExperimentConfig.model_fields)

    @patch("adaptive_bk.display.console")
    def test_display_validation_errors(self, mock_console):
        display_validation_errors([{"loc": ("problem", "m"), "msg": "bad"}])
        assert "problem > m" in mock_console.print.call_args.args[0]

    @patch("adaptive_bk.display.console")
    def test_display_success(self, mock_console):
        display_success("Done!")
        assert "Done!" in mock_console.print.call_args.args[0]

    @patch("adaptive_bk.display.console")
    def test_display_error(self, mock_console):
        display_error("Oops!")
        assert "Oops!" in mock_console.print.call_args.args[0]
