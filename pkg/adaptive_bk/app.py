"""Command-line interface for adaptive block Bregman-Kaczmarz experiments."""

from __future__ import annotations

import logging
from collections.abc import Iterator
from contextlib import contextmanager
from pathlib import Path
from typing import Annotated, Any

import numpy as np
import questionary
import typer

from adaptive_bk.bounds import BoundParams, bound_curve
from adaptive_bk.config import (
    ExperimentConfig,
    FileProblemSpec,
    GaussianProblemSpec,
    MethodSpec,
    TomographyProblemSpec,
    standard_methods,
)
from adaptive_bk.display import (
    configure_logging,
    console,
    display_error,
    display_estimates,
    display_run_record,
    display_schema,
    display_success,
    display_summary,
)
from adaptive_bk.exceptions import AbkError, ConfigError, DegenerateTraceError
from adaptive_bk.harness import (
    build_problem,
    run_experiment,
    run_method_trials,
    write_method_outputs,
)
from adaptive_bk.heuristics import PilotTrace, estimate_hyperparameters
from adaptive_bk.prompts import prompt_experiment_config
from adaptive_bk.serialization import (
    dump_yaml,
    load_config_document,
    read_trace_csv,
    save_pgm,
    write_csv,
    write_matrix,
)
from adaptive_bk.validation import load_experiment_config, validate_and_fix, validate_config

logger = logging.getLogger(__name__)

EXIT_ERROR = 1
EXIT_CONFIG = 2
EXIT_DEGENERATE_TRACE = 3

app = typer.Typer(
    name="abk",
    help="Adaptive block Bregman-Kaczmarz solvers for noisy linear systems.",
    no_args_is_help=True,
)

ConfigOption = Annotated[
    Path | None, typer.Option("--config", "-c", help="YAML/JSON experiment config")
]
SeedOption = Annotated[int | None, typer.Option("--seed", min=0, help="Base seed")]
OutOption = Annotated[Path | None, typer.Option("--out", "-o", help="Output directory")]
StrideOption = Annotated[
    int | None, typer.Option("--stride", min=1, help="Record every K iterations")
]
KindOption = Annotated[str, typer.Option("--kind", help="gaussian or tomography")]
MOption = Annotated[int, typer.Option("--m", min=1, help="Rows")]
NOption = Annotated[int, typer.Option("--n", min=1, help="Columns")]
SOption = Annotated[int, typer.Option("--s", min=0, help="Nonzeros of the solution")]
BlocksOption = Annotated[int, typer.Option("--blocks", min=1, help="Number of blocks M")]
SigmaOption = Annotated[
    float | None, typer.Option("--sigma", min=0.0, help="Absolute noise level")
]
SigmaRelOption = Annotated[
    float | None, typer.Option("--sigma-rel", min=0.0, help="Noise level relative to ||b||")
]
NPixOption = Annotated[int, typer.Option("--n-pix", min=8, help="Image side length")]
NAnglesOption = Annotated[int, typer.Option("--n-angles", min=2, help="Projection angles")]


@contextmanager
def _exit_on_error() -> Iterator[None]:
    """Translate library errors into a message and the documented exit code."""
    try:
        yield
    except ConfigError as e:
        display_error(f"Configuration error: {e}")
        raise typer.Exit(EXIT_CONFIG) from e
    except DegenerateTraceError as e:
        display_error(f"Degenerate pilot trace: {e}")
        raise typer.Exit(EXIT_DEGENERATE_TRACE) from e
    except AbkError as e:
        display_error(f"{type(e).__name__}: {e}")
        raise typer.Exit(EXIT_ERROR) from e


def _problem_spec(
    config: Path | None,
    kind: str,
    m: int,
    n: int,
    s: int,
    blocks: int,
    sigma: float | None,
    sigma_rel: float | None,
    n_pix: int,
    n_angles: int,
) -> GaussianProblemSpec | TomographyProblemSpec | FileProblemSpec:
    """The problem of a config file, or one assembled from the flags."""
    if config is not None:
        data = load_config_document(config)
        return validate_config(ExperimentConfig, data).problem
    if kind == "tomography":
        return validate_config(
            TomographyProblemSpec,
            {
                "n_pix": n_pix,
                "n_angles": n_angles,
                "sigma_rel": 0.1 if sigma_rel is None else sigma_rel,
            },
        )
    if kind != "gaussian":
        raise ConfigError(f"Unknown problem kind {kind!r}; use gaussian or tomography")
    if sigma is None and sigma_rel is None:
        sigma = 0.05
    return validate_config(
        GaussianProblemSpec,
        {"m": m, "n": n, "s": s, "blocks": blocks, "sigma": sigma, "sigma_rel": sigma_rel},
    )


@app.callback()
def main() -> None:
    """Logging follows ABK_LOG (error|warn|info|debug)."""
    configure_logging()


@app.command("generate")
def generate(
    out: OutOption = None,
    seed: SeedOption = None,
    config: ConfigOption = None,
    kind: KindOption = "gaussian",
    m: MOption = 2000,
    n: NOption = 100,
    s: SOption = 10,
    blocks: BlocksOption = 200,
    sigma: SigmaOption = None,
    sigma_rel: SigmaRelOption = None,
    n_pix: NPixOption = 50,
    n_angles: NAnglesOption = 60,
) -> None:
    """Write a test problem as MatrixMarket files plus a ready-to-run config."""
    out_dir = (out or Path("problem")).resolve()
    with _exit_on_error():
        spec = _problem_spec(config, kind, m, n, s, blocks, sigma, sigma_rel, n_pix, n_angles)
        problem = build_problem(spec, seed or 0)

        matrix_path = out_dir / "matrix.mtx"
        rhs_path = out_dir / "rhs.mtx"
        solution_path = out_dir / "solution.mtx"
        write_matrix(matrix_path, problem.matrix.data, comment="system matrix")
        write_matrix(rhs_path, problem.b_clean, comment="clean right-hand side")
        if problem.xhat is not None:
            write_matrix(solution_path, problem.xhat, comment="ground truth")
            if problem.image_shape is not None:
                save_pgm(out_dir / "phantom.pgm", problem.xhat.reshape(problem.image_shape))

        files_spec = FileProblemSpec(
            matrix_path=matrix_path,
            rhs_path=rhs_path,
            block_sizes=problem.matrix.block_sizes,
            solution_path=solution_path if problem.xhat is not None else None,
            sigma=problem.sigma,
        )
        cfg = ExperimentConfig(
            problem=files_spec,
            methods=standard_methods(),
            seed=seed or 0,
            output_dir=out_dir / "results",
        )
        dump_yaml(cfg, out_dir / "problem.yaml", kind="experiment")

    rows, cols = problem.matrix.shape
    display_success(
        f"Wrote {rows}x{cols} problem with {problem.matrix.n_blocks} blocks to {out_dir}"
    )


@app.command("solve")
def solve(
    config: ConfigOption = None,
    seed: SeedOption = None,
    out: OutOption = None,
    stride: StrideOption = None,
    name: Annotated[str, typer.Option("--name", help="Method name for output")] = "solve",
    lam: Annotated[float, typer.Option("--lambda", min=0.0, help="Sparsity weight")] = 0.0,
    schedule: Annotated[
        str, typer.Option("--schedule", help="constant, adaptive or pilot")
    ] = "constant",
    eta: Annotated[float, typer.Option("--eta", help="Constant stepsize")] = 1.0,
    gamma: Annotated[float, typer.Option("--gamma", help="Adaptive rate")] = 0.1,
    beta0: Annotated[
        float | None, typer.Option("--beta0", help="Initial beta (default: exact)")
    ] = None,
    n0: Annotated[int | None, typer.Option("--n0", min=1)] = None,
    n1: Annotated[int | None, typer.Option("--n1", min=1)] = None,
    epochs: Annotated[int, typer.Option("--epochs", min=1)] = 50,
    kind: KindOption = "gaussian",
    m: MOption = 2000,
    n: NOption = 100,
    s: SOption = 10,
    blocks: BlocksOption = 200,
    sigma: SigmaOption = None,
    sigma_rel: SigmaRelOption = None,
    n_pix: NPixOption = 50,
    n_angles: NAnglesOption = 60,
) -> None:
    """Run a single method once and report its final metrics."""
    schedules: dict[str, dict[str, Any]] = {
        "constant": {"kind": "constant", "eta": eta},
        "adaptive": {"kind": "adaptive", "gamma": gamma, "beta0": beta0 or "exact"},
        "pilot": {"kind": "pilot", "n0": n0, "n1": n1},
    }
    with _exit_on_error():
        if schedule not in schedules:
            raise ConfigError(f"Unknown schedule {schedule!r}")
        method = validate_config(
            MethodSpec, {"name": name, "lambda": lam, "schedule": schedules[schedule]}
        )
        spec = _problem_spec(config, kind, m, n, s, blocks, sigma, sigma_rel, n_pix, n_angles)
        problem = build_problem(spec, seed or 0)
        result = run_method_trials(
            problem,
            method,
            base_seed=seed or 0,
            max_iters=epochs * problem.matrix.n_blocks,
            record_stride=stride,
        )
        if out is not None:
            for path in write_method_outputs(result, problem, out):
                logger.info("Wrote %s", path)

    record = result.trials[0].record
    display_run_record(
        name,
        record.k,
        {
            "eta": record.eta,
            "rel_residual": record.rel_residual,
            "rel_error": record.rel_error,
        },
    )
    estimate = result.trials[0].estimate
    if estimate is not None:
        display_estimates(
            estimate.gamma,
            estimate.beta0,
            estimate.gamma_clamped,
            estimate.valid_ratios,
            estimate.n0,
            estimate.n1,
        )
    console.print(f"Finished {record.iterations} iterations ({record.wall_time:.2f}s)")


@app.command("experiment")
def experiment(
    config: Annotated[Path, typer.Option("--config", "-c", help="Experiment config")],
    seed: SeedOption = None,
    out: OutOption = None,
    workers: Annotated[int | None, typer.Option("--workers", min=1)] = None,
    stride: StrideOption = None,
) -> None:
    """Run every configured method and write CSV curves plus a summary."""
    with _exit_on_error():
        cfg = load_experiment_config(
            config,
            {"seed": seed, "output_dir": out, "workers": workers, "record_stride": stride},
        )
        result = run_experiment(cfg)
    display_summary(result.summary)
    display_success(f"Results written to {result.output_dir}")


@app.command("estimate")
def estimate(
    trace: Annotated[Path, typer.Argument(help="Trace CSV with columns j,bregman_to_final")],
    n0: Annotated[int | None, typer.Option("--n0", min=1, help="Window for gamma")] = None,
    n1: Annotated[int | None, typer.Option("--n1", min=1, help="Tail window for beta0")] = None,
    out: Annotated[
        Path | None, typer.Option("--out", "-o", help="Write the estimates as YAML")
    ] = None,
) -> None:
    """Estimate gamma and beta0 from a pilot trace."""
    with _exit_on_error():
        result = estimate_hyperparameters(PilotTrace(read_trace_csv(trace)), n0, n1)
        if out is not None:
            dump_yaml(
                {
                    "gamma": result.gamma,
                    "beta0": result.beta0,
                    "gamma_clamped": result.gamma_clamped,
                    "valid_ratios": result.valid_ratios,
                    "n0": result.n0,
                    "n1": result.n1,
                },
                out,
                kind="estimate",
            )
    display_estimates(
        result.gamma,
        result.beta0,
        result.gamma_clamped,
        result.valid_ratios,
        result.n0,
        result.n1,
    )


@app.command("bound")
def bound(
    gamma: Annotated[float, typer.Option("--gamma", help="Rate parameter")],
    beta0: Annotated[float, typer.Option("--beta0", help="Initial beta")],
    sigma: Annotated[float, typer.Option("--sigma", min=0.0)] = 1.0,
    square_norm: Annotated[
        float, typer.Option("--square-norm", help="Block square norm ||A||_sq")
    ] = 1.0,
    k_max: Annotated[int, typer.Option("--k-max", min=0)] = 10_000,
    stride: Annotated[int, typer.Option("--stride", min=1)] = 100,
    out: Annotated[Path, typer.Option("--out", "-o", help="CSV path")] = Path("bound.csv"),
) -> None:
    """Tabulate the beta recursion and its envelopes as CSV."""
    with _exit_on_error():
        params = validate_config(
            BoundParams,
            {
                "gamma": gamma,
                "beta0": beta0,
                "sigma2": sigma**2,
                "square_norm2": square_norm**2,
            },
        )
        ks = np.unique(np.append(np.arange(0, k_max + 1, stride), k_max))
        curve = bound_curve(params, ks)
        write_csv(out, curve.COLUMNS, curve.rows())
    display_success(f"Wrote {len(ks)} rows to {out}")


@app.command("init")
def init_config(
    output: Annotated[
        Path, typer.Option("--output", "-o", help="Output YAML file path")
    ] = Path("experiment.yaml"),
) -> None:
    """Create an experiment configuration interactively."""
    console.print("\n[bold]Configuring: ExperimentConfig[/bold]\n")
    data = prompt_experiment_config()

    cfg = validate_and_fix(ExperimentConfig, data)
    if cfg is None:
        display_error("Configuration not saved due to validation errors.")
        raise typer.Exit(EXIT_CONFIG)

    should_save = questionary.confirm("Save configuration?", default=True).ask()
    if not should_save:
        display_error("Configuration not saved.")
        raise typer.Exit(0)

    dump_yaml(cfg, output, kind="experiment")
    display_success(f"Configuration saved to {output}")


@app.command("validate")
def validate_cmd(
    config_file: Annotated[Path, typer.Argument(help="Config file to validate")],
) -> None:
    """Validate an experiment configuration."""
    with _exit_on_error():
        cfg = load_experiment_config(config_file)
    display_success(
        f"Valid ExperimentConfig: {cfg.problem.kind} problem, {len(cfg.methods)} methods"
    )


@app.command("show-schema")
def show_schema() -> None:
    """Show the fields of the experiment configuration."""
    display_schema(ExperimentConfig)


if __name__ == "__main__":
    app()
