"""Experiment orchestration.

An experiment builds one problem from the base seed, runs every configured
method for ``trials`` seeded trials (``seed = base_seed + trial``), optionally
grid-searches ``gamma`` for adaptive methods, and writes per-method CSV
curves, bound overlays and a ``summary.yaml`` into the output directory.
"""

from __future__ import annotations

import logging
import multiprocessing
from collections.abc import Sequence
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any

import numpy as np
from numpy.typing import NDArray

from adaptive_bk.bounds import (
    BoundParams,
    beta_bound,
    error_sq_bound,
    noiseless_envelope,
)
from adaptive_bk.config import (
    AdaptiveScheduleSpec,
    ConstantScheduleSpec,
    ExperimentConfig,
    GaussianProblemSpec,
    MethodSpec,
    PilotScheduleSpec,
    ProblemSpec,
    TomographyProblemSpec,
)
from adaptive_bk.exceptions import DegenerateTraceError, InvalidConfigError
from adaptive_bk.heuristics import HeuristicEstimate, collect_pilot, estimate_hyperparameters
from adaptive_bk.objective import SparseObjective
from adaptive_bk.problems import (
    SyntheticProblem,
    file_problem,
    gaussian_problem,
    tomography_problem,
)
from adaptive_bk.serialization import (
    dump_yaml,
    load_pgm,
    read_matrix,
    read_vector,
    save_pgm,
    write_csv,
    write_trace_csv,
)
from adaptive_bk.solver import RunRecord, exact_beta0, run
from adaptive_bk.stepsize import GAMMA_MAX, AdaptiveStepsize, ConstantStepsize, StepsizeSchedule

logger = logging.getLogger(__name__)

FloatArray = NDArray[np.float64]

SUMMARY_FILE = "summary.yaml"
CONFIG_FILE = "config.yaml"
GRID_COLUMNS = ("gamma", "final_rel_residual_mean", "final_rel_error_mean")
BOUND_COLUMNS = ("k", "beta_bound", "error_sq_bound", "mean_sq_error")


@dataclass
class TrialResult:
    """One seeded run of one method; ``pilot`` is set for pilot schedules."""

    trial: int
    seed: int
    gamma: float | None
    beta0: float | None
    record: RunRecord
    estimate: HeuristicEstimate | None = None
    pilot: RunRecord | None = None
    pilot_trace: FloatArray | None = None


@dataclass(frozen=True)
class GridPoint:
    gamma: float
    final_rel_residual: float
    final_rel_error: float


@dataclass
class MethodResult:
    method: MethodSpec
    trials: list[TrialResult]
    grid: list[GridPoint] = field(default_factory=list)
    skipped_gammas: list[float] = field(default_factory=list)

    @property
    def name(self) -> str:
        return self.method.name

    @property
    def gamma(self) -> float | None:
        return self.trials[0].gamma if self.trials else None

    @property
    def beta0(self) -> float | None:
        return self.trials[0].beta0 if self.trials else None

    @property
    def k(self) -> list[int]:
        return self.trials[0].record.k

    def mean_column(self, name: str) -> FloatArray:
        return np.mean([t.record.column(name) for t in self.trials], axis=0)

    @property
    def final_rel_residual(self) -> float:
        return float(self.mean_column("rel_residual")[-1])

    @property
    def final_rel_error(self) -> float:
        return float(self.mean_column("rel_error")[-1])


@dataclass
class ExperimentResult:
    output_dir: Path
    summary: dict[str, Any]
    methods: dict[str, MethodResult] = field(default_factory=dict)
    files: list[Path] = field(default_factory=list)


@dataclass(frozen=True)
class _TrialTask:
    problem: SyntheticProblem
    method: MethodSpec
    gamma: float | None
    max_iters: int
    trial: int
    seed: int
    record_stride: int | None


def build_problem(spec: ProblemSpec, seed: int) -> SyntheticProblem:
    """Instantiate the configured problem; random generators use ``seed``."""
    if isinstance(spec, GaussianProblemSpec):
        return gaussian_problem(
            spec.m,
            spec.n,
            spec.s,
            spec.blocks,
            sigma=spec.sigma,
            sigma_rel=spec.sigma_rel,
            seed=seed,
        )
    if isinstance(spec, TomographyProblemSpec):
        phantom = load_pgm(spec.phantom_path) if spec.phantom_path else None
        return tomography_problem(
            spec.n_pix,
            spec.n_angles,
            spec.sigma_rel,
            seed=spec.phantom_seed,
            phantom=phantom,
        )
    xhat = read_vector(spec.solution_path) if spec.solution_path else None
    return file_problem(
        read_matrix(spec.matrix_path),
        read_vector(spec.rhs_path),
        spec.block_sizes,
        sigma=spec.sigma,
        sigma_rel=spec.sigma_rel,
        xhat=xhat,
    )


def resolve_beta0(
    spec: AdaptiveScheduleSpec, problem: SyntheticProblem, objective: SparseObjective
) -> float:
    if spec.beta0 != "exact":
        return float(spec.beta0)
    if problem.xhat is None:
        raise InvalidConfigError("beta0 'exact' needs a ground-truth solution")
    return exact_beta0(problem.matrix, objective, problem.noise, problem.xhat)


def build_schedule(
    spec: ConstantScheduleSpec | AdaptiveScheduleSpec,
    problem: SyntheticProblem,
    objective: SparseObjective,
    gamma: float | None = None,
) -> StepsizeSchedule:
    """Fresh schedule for one run; ``gamma`` overrides the configured rate."""
    if isinstance(spec, ConstantScheduleSpec):
        return ConstantStepsize(spec.eta)
    return AdaptiveStepsize(
        spec.gamma if gamma is None else gamma, resolve_beta0(spec, problem, objective)
    )


def pilot_then_adaptive(
    problem: SyntheticProblem,
    method: MethodSpec,
    max_iters: int,
    *,
    seed: int,
    trial: int = 0,
    record_stride: int | None = None,
) -> TrialResult:
    """Run the ``eta = 1`` pilot, estimate ``gamma`` and ``beta0``, then run adaptively.

    The pilot and the adaptive run use independent streams spawned from
    ``seed`` and the same iteration budget.

    Raises:
        DegenerateTraceError: If the pilot trace cannot support the estimates;
            the message carries the pilot diagnostics.
    """
    spec = method.schedule
    if not isinstance(spec, PilotScheduleSpec):
        raise InvalidConfigError(f"Method {method.name!r} has no pilot schedule")
    objective = SparseObjective(method.lam)
    pilot_seq, run_seq = np.random.SeedSequence(seed).spawn(2)

    trace = collect_pilot(
        problem.matrix,
        problem.rhs,
        objective,
        max_iters,
        rng=np.random.default_rng(pilot_seq),
        stride=spec.stride,
        record_stride=record_stride,
        b_clean=problem.b_clean,
        reference=problem.xhat,
    )
    try:
        estimate = estimate_hyperparameters(trace, spec.n0, spec.n1)
    except DegenerateTraceError as e:
        pilot_residual = trace.record.final_rel_residual if trace.record else float("nan")
        raise DegenerateTraceError(
            f"{method.name} (seed {seed}): {e}; pilot of {max_iters} iterations, "
            f"{trace.n} trace entries, D_0={trace.bregman_to_final[0]:.3e}, "
            f"final relative residual {pilot_residual:.3e}"
        ) from e

    record = run(
        problem.matrix,
        problem.rhs,
        AdaptiveStepsize(estimate.gamma, estimate.beta0),
        objective,
        max_iters,
        rng=np.random.default_rng(run_seq),
        reference=problem.xhat,
        b_clean=problem.b_clean,
        stride=record_stride,
    )
    return TrialResult(
        trial=trial,
        seed=seed,
        gamma=estimate.gamma,
        beta0=estimate.beta0,
        record=record,
        estimate=estimate,
        pilot=trace.record,
        pilot_trace=trace.bregman_to_final,
    )


def _run_trial(task: _TrialTask) -> TrialResult:
    spec = task.method.schedule
    if isinstance(spec, PilotScheduleSpec):
        return pilot_then_adaptive(
            task.problem,
            task.method,
            task.max_iters,
            seed=task.seed,
            trial=task.trial,
            record_stride=task.record_stride,
        )
    objective = SparseObjective(task.method.lam)
    schedule = build_schedule(spec, task.problem, objective, task.gamma)
    record = run(
        task.problem.matrix,
        task.problem.rhs,
        schedule,
        objective,
        task.max_iters,
        rng=np.random.default_rng(task.seed),
        reference=task.problem.xhat,
        b_clean=task.problem.b_clean,
        stride=task.record_stride,
    )
    return TrialResult(
        trial=task.trial,
        seed=task.seed,
        gamma=schedule.gamma if isinstance(schedule, AdaptiveStepsize) else None,
        beta0=schedule.beta0 if isinstance(schedule, AdaptiveStepsize) else None,
        record=record,
    )


def _map_trials(tasks: Sequence[_TrialTask], workers: int) -> list[TrialResult]:
    """Results in task order, whatever order the workers finish in."""
    if workers <= 1 or len(tasks) <= 1:
        return [_run_trial(task) for task in tasks]
    context = multiprocessing.get_context("spawn")
    with ProcessPoolExecutor(max_workers=workers, mp_context=context) as pool:
        return list(pool.map(_run_trial, tasks))


def _tasks(
    problem: SyntheticProblem,
    method: MethodSpec,
    gamma: float | None,
    trials: int,
    base_seed: int,
    max_iters: int,
    record_stride: int | None,
) -> list[_TrialTask]:
    return [
        _TrialTask(
            problem=problem,
            method=method,
            gamma=gamma,
            max_iters=max_iters,
            trial=t,
            seed=base_seed + t,
            record_stride=record_stride,
        )
        for t in range(trials)
    ]


def run_method_trials(
    problem: SyntheticProblem,
    method: MethodSpec,
    *,
    trials: int = 1,
    base_seed: int = 0,
    max_iters: int,
    record_stride: int | None = None,
    gamma: float | None = None,
    workers: int = 1,
) -> MethodResult:
    tasks = _tasks(problem, method, gamma, trials, base_seed, max_iters, record_stride)
    return MethodResult(method=method, trials=_map_trials(tasks, workers))


def grid_search(
    problem: SyntheticProblem,
    method: MethodSpec,
    grid: Sequence[float],
    *,
    trials: int = 1,
    base_seed: int = 0,
    max_iters: int,
    record_stride: int | None = None,
    workers: int = 1,
) -> MethodResult:
    """Run an adaptive method for every admissible ``gamma`` and keep the best.

    Values ``>= 2`` are skipped with a warning. The winner minimises the
    final mean relative error, or the final mean relative residual when the
    problem has no ground truth; ties go to the earlier grid value.
    """
    if not isinstance(method.schedule, AdaptiveScheduleSpec):
        raise InvalidConfigError(f"Grid search needs an adaptive method, got {method.name!r}")
    admissible = [g for g in grid if g < GAMMA_MAX]
    skipped = [g for g in grid if g >= GAMMA_MAX]
    for g in skipped:
        logger.warning("%s: skipping gamma=%g (must be below %g)", method.name, g, GAMMA_MAX)
    if not admissible:
        raise InvalidConfigError(f"{method.name}: no admissible gamma in grid {list(grid)}")

    tasks = [
        task
        for g in admissible
        for task in _tasks(problem, method, g, trials, base_seed, max_iters, record_stride)
    ]
    results = _map_trials(tasks, workers)

    candidates = [
        MethodResult(method=method, trials=results[j * trials : (j + 1) * trials])
        for j in range(len(admissible))
    ]
    points = [
        GridPoint(
            gamma=g,
            final_rel_residual=c.final_rel_residual,
            final_rel_error=c.final_rel_error,
        )
        for g, c in zip(admissible, candidates, strict=True)
    ]

    def score(j: int) -> float:
        p = points[j]
        value = p.final_rel_error if problem.has_ground_truth else p.final_rel_residual
        return value if np.isfinite(value) else float("inf")

    best = min(range(len(points)), key=score)
    logger.info("%s: grid search picked gamma=%g", method.name, admissible[best])
    winner = candidates[best]
    winner.grid = points
    winner.skipped_gammas = skipped
    return winner


def curve_rows(result: MethodResult) -> tuple[list[str], list[list[float | int]]]:
    """Header and rows of the per-method CSV.

    Columns: ``k, eta, beta, rel_residual_mean, rel_error_mean``, then
    ``rel_residual_t<j>`` and ``rel_error_t<j>`` for every trial. ``eta`` and
    ``beta`` are trial means; ``beta`` is blank for constant stepsizes.
    """
    trials = result.trials
    header = ["k", "eta", "beta", "rel_residual_mean", "rel_error_mean"]
    header += [f"rel_residual_t{t.trial}" for t in trials]
    header += [f"rel_error_t{t.trial}" for t in trials]
    columns = [
        result.mean_column("eta"),
        result.mean_column("beta"),
        result.mean_column("rel_residual"),
        result.mean_column("rel_error"),
        *(t.record.column("rel_residual") for t in trials),
        *(t.record.column("rel_error") for t in trials),
    ]
    rows = [
        [k, *(float(c[j]) for c in columns)] for j, k in enumerate(result.k)
    ]
    return header, rows


def bound_overlay_rows(
    result: MethodResult, problem: SyntheticProblem
) -> list[list[float | int]] | None:
    """``k, beta_bound, error_sq_bound, mean_sq_error`` for a fixed adaptive run.

    For a noiseless problem the error column holds the linear envelope
    ``2 * exp(-gamma*k/2) * D_f(x_0, x_hat)`` instead of the noisy bound.
    ``None`` when the overlay is undefined: no fixed ``(gamma, beta0)`` or no
    ground truth.
    """
    if (
        not isinstance(result.method.schedule, AdaptiveScheduleSpec)
        or problem.xhat is None
        or result.gamma is None
        or result.beta0 is None
    ):
        return None
    params = BoundParams(
        gamma=result.gamma,
        beta0=result.beta0,
        sigma2=problem.sigma**2,
        square_norm2=problem.matrix.square_norm**2,
    )
    norm = float(np.linalg.norm(problem.xhat)) or 1.0
    mean_sq = np.mean(
        [(t.record.column("rel_error") * norm) ** 2 for t in result.trials], axis=0
    )
    if problem.sigma == 0.0:
        objective = SparseObjective(result.method.lam)
        d0 = objective.bregman_distance(np.zeros_like(problem.xhat), problem.xhat)
        errors = [
            2.0 * noiseless_envelope(params.square_norm2, d0, params.gamma, k)
            / params.square_norm2
            for k in result.k
        ]
    else:
        errors = [error_sq_bound(params, k) for k in result.k]
    return [
        [k, beta_bound(params, k), errors[j], float(mean_sq[j])]
        for j, k in enumerate(result.k)
    ]


def _method_summary(result: MethodResult) -> dict[str, Any]:
    entry: dict[str, Any] = {
        "lambda": result.method.lam,
        "schedule": result.method.schedule.kind,
        "gamma": result.gamma,
        "beta0": result.beta0,
        "final_rel_residual": result.final_rel_residual,
        "final_rel_error": result.final_rel_error,
        "residual_source": result.trials[0].record.residual_source,
    }
    if result.grid:
        entry["grid"] = [
            {
                "gamma": p.gamma,
                "final_rel_residual": p.final_rel_residual,
                "final_rel_error": p.final_rel_error,
            }
            for p in result.grid
        ]
    if result.skipped_gammas:
        entry["skipped_gammas"] = list(result.skipped_gammas)
    estimates = [
        {
            "trial": t.trial,
            "gamma": t.estimate.gamma,
            "beta0": t.estimate.beta0,
            "gamma_clamped": t.estimate.gamma_clamped,
            "n0": t.estimate.n0,
            "n1": t.estimate.n1,
        }
        for t in result.trials
        if t.estimate is not None
    ]
    if estimates:
        entry["estimates"] = estimates
    return entry


def write_method_outputs(
    result: MethodResult, problem: SyntheticProblem, output_dir: Path
) -> list[Path]:
    """Write every file belonging to one method and return their paths."""
    name = result.name
    written: list[Path] = []

    header, rows = curve_rows(result)
    path = output_dir / f"{name}.csv"
    write_csv(path, header, rows)
    written.append(path)

    if result.grid:
        path = output_dir / f"{name}_grid.csv"
        write_csv(
            path,
            GRID_COLUMNS,
            ([p.gamma, p.final_rel_residual, p.final_rel_error] for p in result.grid),
        )
        written.append(path)

    overlay = bound_overlay_rows(result, problem)
    if overlay is not None:
        path = output_dir / f"{name}_bound.csv"
        write_csv(path, BOUND_COLUMNS, overlay)
        written.append(path)

    pilots = [t for t in result.trials if t.pilot is not None]
    if pilots:
        pilot_runs = []
        for t in pilots:
            assert t.pilot is not None
            pilot_runs.append(
                TrialResult(trial=t.trial, seed=t.seed, gamma=None, beta0=None, record=t.pilot)
            )
        pilot_result = MethodResult(method=result.method, trials=pilot_runs)
        header, rows = curve_rows(pilot_result)
        path = output_dir / f"{name}_pilot.csv"
        write_csv(path, header, rows)
        written.append(path)
        for t in pilots:
            if t.pilot_trace is not None:
                path = output_dir / f"{name}_trace_t{t.trial}.csv"
                write_trace_csv(path, t.pilot_trace)
                written.append(path)

    if problem.image_shape is not None:
        mean_x = np.mean([t.record.x_final for t in result.trials], axis=0)
        path = output_dir / f"{name}_reconstruction.pgm"
        save_pgm(path, mean_x.reshape(problem.image_shape))
        written.append(path)

    return written


def _base_summary(cfg: ExperimentConfig, problem: SyntheticProblem | None) -> dict[str, Any]:
    summary: dict[str, Any] = {
        "status": "running",
        "problem": cfg.problem,
        "seed": cfg.seed,
        "trials": cfg.trials,
        "epochs": cfg.epochs,
    }
    if problem is not None:
        summary["iterations"] = cfg.epochs * problem.matrix.n_blocks
        summary["record_stride"] = cfg.record_stride or problem.matrix.n_blocks
        summary["square_norm"] = problem.matrix.square_norm
        summary["sigma"] = problem.sigma
    summary["methods"] = {}
    return summary


def run_experiment(cfg: ExperimentConfig) -> ExperimentResult:
    """Run every configured method and write CSVs plus ``summary.yaml``.

    Methods run in configuration order and their files are written as soon
    as they finish. On failure the summary is flushed with
    ``status: failed`` and the error message before the error propagates.
    """
    output_dir = cfg.output_dir
    output_dir.mkdir(parents=True, exist_ok=True)
    dump_yaml(cfg, output_dir / CONFIG_FILE, kind="experiment")

    result = ExperimentResult(output_dir=output_dir, summary=_base_summary(cfg, None))
    try:
        problem = build_problem(cfg.problem, cfg.seed)
        result.summary = _base_summary(cfg, problem)
        max_iters = cfg.epochs * problem.matrix.n_blocks
        if problem.image_shape is not None and problem.xhat is not None:
            path = output_dir / "phantom.pgm"
            save_pgm(path, problem.xhat.reshape(problem.image_shape))
            result.files.append(path)

        for method in cfg.methods:
            logger.info("Running %s (%d trials, %d iterations)", method.name, cfg.trials, max_iters)
            common: dict[str, Any] = {
                "trials": cfg.trials,
                "base_seed": cfg.seed,
                "max_iters": max_iters,
                "record_stride": cfg.record_stride,
                "workers": cfg.workers,
            }
            if cfg.gamma_grid and isinstance(method.schedule, AdaptiveScheduleSpec):
                method_result = grid_search(problem, method, cfg.gamma_grid, **common)
            else:
                method_result = run_method_trials(problem, method, **common)
            result.methods[method.name] = method_result
            result.files.extend(write_method_outputs(method_result, problem, output_dir))
            result.summary["methods"][method.name] = _method_summary(method_result)
    except Exception as e:
        result.summary["status"] = "failed"
        result.summary["error"] = str(e)
        dump_yaml(result.summary, output_dir / SUMMARY_FILE, kind="summary")
        raise

    result.summary["status"] = "ok"
    dump_yaml(result.summary, output_dir / SUMMARY_FILE, kind="summary")
    result.files.append(output_dir / SUMMARY_FILE)
    return result
