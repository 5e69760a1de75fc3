from __future__ import annotations

import logging
from collections.abc import Callable
from typing import Any

import questionary

from adaptive_bk.config import standard_methods
from adaptive_bk.display import console

logger = logging.getLogger(__name__)

PROBLEM_KINDS = ("gaussian", "tomography", "files")
SCHEDULE_KINDS = ("constant", "adaptive", "pilot")


def _number_validator(
    convert: Callable[[str], float | int],
    kind: str,
    *,
    ge: float | None = None,
    gt: float | None = None,
    lt: float | None = None,
    required: bool = True,
) -> Callable[[str], bool | str]:
    def validate(val: str) -> bool | str:
        if not val.strip():
            return True if not required else "Value is required"
        try:
            n = convert(val)
        except ValueError:
            return f"Must be {kind}"
        if ge is not None and n < ge:
            return f"Must be >= {ge}"
        if gt is not None and n <= gt:
            return f"Must be > {gt}"
        if lt is not None and n >= lt:
            return f"Must be < {lt}"
        return True

    return validate


def prompt_int(label: str, default: int, *, ge: int | None = None) -> int:
    result = questionary.text(
        f"  {label} (int):",
        default=str(default),
        validate=_number_validator(int, "an integer", ge=ge),
    ).ask()
    return int(result) if result and result.strip() else default


def prompt_float(
    label: str,
    default: float,
    *,
    ge: float | None = None,
    gt: float | None = None,
    lt: float | None = None,
) -> float:
    result = questionary.text(
        f"  {label} (float):",
        default=str(default),
        validate=_number_validator(float, "a number", ge=ge, gt=gt, lt=lt),
    ).ask()
    return float(result) if result and result.strip() else default


def prompt_float_list(label: str, default: list[float]) -> list[float]:
    """Comma-separated numbers; an empty answer keeps ``default``."""

    def validate(val: str) -> bool | str:
        try:
            [float(x) for x in val.split(",") if x.strip()]
        except ValueError:
            return "Must be comma-separated numbers"
        return True

    result = questionary.text(
        f"  {label} (comma-separated):",
        default=", ".join(str(x) for x in default),
        validate=validate,
    ).ask()
    if not result or not result.strip():
        return default
    return [float(x) for x in result.split(",") if x.strip()]


def prompt_text(label: str, default: str = "") -> str:
    result = questionary.text(f"  {label}:", default=default).ask()
    return result.strip() if result else default


def prompt_problem(defaults: dict[str, Any]) -> dict[str, Any]:
    kind = questionary.select(
        "Problem kind:",
        choices=list(PROBLEM_KINDS),
        default=defaults.get("kind", "gaussian"),
    ).ask()

    if kind == "tomography":
        return {
            "kind": kind,
            "n_pix": prompt_int("n_pix", defaults.get("n_pix", 50), ge=8),
            "n_angles": prompt_int("n_angles", defaults.get("n_angles", 60), ge=2),
            "sigma_rel": prompt_float("sigma_rel", defaults.get("sigma_rel", 0.1), ge=0),
        }
    if kind == "files":
        sizes = prompt_float_list("block_sizes", defaults.get("block_sizes", []))
        problem: dict[str, Any] = {
            "kind": kind,
            "matrix_path": prompt_text("matrix_path", defaults.get("matrix_path", "matrix.mtx")),
            "rhs_path": prompt_text("rhs_path", defaults.get("rhs_path", "rhs.mtx")),
            "block_sizes": [int(s) for s in sizes],
            "sigma_rel": prompt_float("sigma_rel", defaults.get("sigma_rel", 0.1), ge=0),
        }
        solution = prompt_text("solution_path (optional)", defaults.get("solution_path") or "")
        if solution:
            problem["solution_path"] = solution
        return problem
    return {
        "kind": "gaussian",
        "m": prompt_int("m", defaults.get("m", 2000), ge=1),
        "n": prompt_int("n", defaults.get("n", 100), ge=1),
        "s": prompt_int("s", defaults.get("s", 10), ge=0),
        "blocks": prompt_int("blocks", defaults.get("blocks", 200), ge=1),
        "sigma": prompt_float("sigma", defaults.get("sigma", 0.05), ge=0),
    }


def prompt_method() -> dict[str, Any] | None:
    """One custom method; ``None`` once the user leaves the name empty."""
    name = prompt_text("Method name (empty to finish)")
    if not name:
        return None
    method: dict[str, Any] = {"name": name, "lambda": prompt_float("lambda", 0.0, ge=0)}
    kind = questionary.select(
        "  Stepsize schedule:", choices=list(SCHEDULE_KINDS), default="constant"
    ).ask()
    if kind == "adaptive":
        schedule: dict[str, Any] = {
            "kind": kind,
            "gamma": prompt_float("gamma", 0.1, gt=0, lt=2),
        }
        if questionary.confirm("  Compute beta0 from the ground truth?", default=True).ask():
            schedule["beta0"] = "exact"
        else:
            schedule["beta0"] = prompt_float("beta0", 1000.0, gt=0)
    elif kind == "pilot":
        schedule = {
            "kind": kind,
            "n0": prompt_int("n0", 400, ge=1),
            "n1": prompt_int("n1", 100, ge=1),
        }
    else:
        schedule = {"kind": "constant", "eta": prompt_float("eta", 1.0, gt=0, lt=2)}
    method["schedule"] = schedule
    return method


def prompt_methods() -> list[dict[str, Any]]:
    standard = questionary.confirm(
        "Use the standard methods (RK, RSK, aRK, aRSK, haRSK)?", default=True
    ).ask()
    if standard:
        lam = prompt_float("lambda for the sparse methods", 0.05, ge=0)
        return [m.model_dump(by_alias=True) for m in standard_methods(lam=lam)]

    methods: list[dict[str, Any]] = []
    while (method := prompt_method()) is not None:
        methods.append(method)
    return methods


def prompt_experiment_config(defaults: dict[str, Any] | None = None) -> dict[str, Any]:
    """Walk through an experiment configuration.

    Returns a dict that can be passed to ``ExperimentConfig.model_validate``.
    """
    defaults = defaults or {}
    console.print("\n[bold cyan]Problem[/bold cyan]")
    data: dict[str, Any] = {"problem": prompt_problem(defaults.get("problem", {}))}

    console.print("\n[bold cyan]Methods[/bold cyan]")
    data["methods"] = prompt_methods()

    console.print("\n[bold cyan]Run[/bold cyan]")
    data["epochs"] = prompt_int("epochs", defaults.get("epochs", 50), ge=1)
    data["trials"] = prompt_int("trials", defaults.get("trials", 1), ge=1)
    data["seed"] = prompt_int("seed", defaults.get("seed", 0), ge=0)
    if questionary.confirm("Grid-search gamma for adaptive methods?", default=False).ask():
        data["gamma_grid"] = prompt_float_list(
            "gamma_grid", defaults.get("gamma_grid") or [0.005, 0.01, 0.05, 0.1, 1.0]
        )
    data["output_dir"] = prompt_text("output_dir", str(defaults.get("output_dir", "results")))
    logger.debug("Prompted configuration: %s", data)
    return data
