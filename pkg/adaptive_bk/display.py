from __future__ import annotations

import logging
import math
import os
from typing import Any

from pydantic import BaseModel
from pydantic_core import PydanticUndefined
from rich.console import Console
from rich.logging import RichHandler
from rich.table import Table

logger = logging.getLogger(__name__)

console = Console()
err_console = Console(stderr=True)

LOG_ENV_VAR = "ABK_LOG"
LOG_LEVELS = {
    "error": logging.ERROR,
    "warn": logging.WARNING,
    "warning": logging.WARNING,
    "info": logging.INFO,
    "debug": logging.DEBUG,
}


def configure_logging(level: str | None = None) -> int:
    """Route ``adaptive_bk`` logs through Rich at the level from ``ABK_LOG``.

    Unknown names fall back to ``warn``. Returns the numeric level.
    """
    name = (level or os.environ.get(LOG_ENV_VAR, "warn")).strip().lower()
    numeric = LOG_LEVELS.get(name, logging.WARNING)
    package_logger = logging.getLogger("adaptive_bk")
    package_logger.setLevel(numeric)
    if not any(isinstance(h, RichHandler) for h in package_logger.handlers):
        package_logger.addHandler(
            RichHandler(console=err_console, show_path=False, rich_tracebacks=True)
        )
    if name not in LOG_LEVELS:
        package_logger.warning("Unknown %s=%r, using 'warn'", LOG_ENV_VAR, name)
    return numeric


def _fmt(value: Any, digits: int = 4) -> str:
    if value is None:
        return "-"
    if isinstance(value, float):
        if not math.isfinite(value):
            return "-"
        return f"{value:.{digits}g}"
    return str(value)


def display_summary(summary: dict[str, Any]) -> None:
    """Table of final metrics per method from an experiment summary."""
    table = Table(title="Experiment Summary", show_lines=True)
    table.add_column("Method", style="bold")
    table.add_column("lambda", justify="right")
    table.add_column("gamma", justify="right")
    table.add_column("beta0", justify="right")
    table.add_column("Rel. residual", justify="right")
    table.add_column("Rel. error", justify="right")

    for name, entry in summary.get("methods", {}).items():
        table.add_row(
            name,
            _fmt(entry.get("lambda")),
            _fmt(entry.get("gamma")),
            _fmt(entry.get("beta0")),
            _fmt(entry.get("final_rel_residual")),
            _fmt(entry.get("final_rel_error")),
        )

    console.print(table)
    for name, entry in summary.get("methods", {}).items():
        skipped = entry.get("skipped_gammas") or []
        if skipped:
            display_warning(f"{name}: skipped gamma values {skipped} (must be < 2)")


def display_estimates(
    gamma: float, beta0: float, clamped: bool, valid_ratios: int, n0: int, n1: int
) -> None:
    table = Table(title="Heuristic Estimates")
    table.add_column("Quantity", style="bold")
    table.add_column("Value", justify="right")
    table.add_row("gamma~", _fmt(gamma, 6))
    table.add_row("beta0~", _fmt(beta0, 6))
    table.add_row("N0 / N1", f"{n0} / {n1}")
    table.add_row("valid ratios", str(valid_ratios))
    console.print(table)
    if clamped:
        display_warning("gamma~ fell outside (0, 2) and was clamped")


def display_run_record(name: str, k: list[int], columns: dict[str, list[float]]) -> None:
    """Last few recorded rows of a single run."""
    table = Table(title=f"{name} (last records)")
    table.add_column("k", justify="right", style="bold")
    for column in columns:
        table.add_column(column, justify="right")
    for j in range(max(0, len(k) - 5), len(k)):
        table.add_row(str(k[j]), *(_fmt(values[j]) for values in columns.values()))
    console.print(table)


def display_schema(model_class: type[BaseModel]) -> None:
    """Display the fields of a configuration model."""
    table = Table(title=f"Schema: {model_class.__name__}", show_lines=True)
    table.add_column("Field", style="bold")
    table.add_column("Type")
    table.add_column("Default")
    table.add_column("Description")

    for name, info in model_class.model_fields.items():
        if info.default is not PydanticUndefined:
            default = repr(info.default)
        elif info.default_factory is not None:
            default = "<factory>"
        else:
            default = "[dim]required[/dim]"
        type_name = getattr(info.annotation, "__name__", str(info.annotation))
        table.add_row(
            info.alias or name, type_name, default, _truncate(info.description or "", 50)
        )

    console.print(table)


def display_validation_errors(errors: list[Any]) -> None:
    """Display Pydantic validation errors."""
    console.print("\n[bold red]Validation Errors:[/bold red]")
    for err in errors:
        loc = " > ".join(str(x) for x in err.get("loc", []))
        msg = err.get("msg", "Unknown error")
        console.print(f"  [red]{loc}[/red]: {msg}")


def display_success(message: str) -> None:
    """Display a success message."""
    console.print(f"\n[bold green]{message}[/bold green]")


def display_error(message: str) -> None:
    """Display an error message."""
    console.print(f"\n[bold red]{message}[/bold red]")


def display_warning(message: str) -> None:
    """Display a warning message."""
    console.print(f"\n[bold yellow]{message}[/bold yellow]")


def _truncate(s: str, max_len: int) -> str:
    return s if len(s) <= max_len else s[: max_len - 3] + "..."
