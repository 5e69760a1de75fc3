"""Adaptive block Bregman-Kaczmarz iteration.

One step samples a block ``i ~ p``, queries a fresh noisy ``b~_(i)``, and
updates the dual and primal iterates::

    x*_{k+1} = x*_k - eta_k * A_(i)^T (A_(i) x_k - b~_(i)) / ||A_(i)||_2^2
    x_{k+1}  = S_lam(x*_{k+1})

``run`` repeats the step for a fixed iteration budget and records metrics.
"""

from __future__ import annotations

import logging
import time
from collections.abc import Callable
from dataclasses import dataclass, field

import numpy as np
from numpy.typing import NDArray

from adaptive_bk.blocked_matrix import (
    BlockedMatrix,
    block_apply,
    block_apply_transpose,
    sample_block,
)
from adaptive_bk.exceptions import InvalidConfigError
from adaptive_bk.noise import NoiseModel, NoisyRhs
from adaptive_bk.objective import SparseObjective
from adaptive_bk.stepsize import StepsizeSchedule

logger = logging.getLogger(__name__)

DESCENT_SLACK = 1e-8

FloatArray = NDArray[np.float64]


@dataclass
class SolverState:
    """Dual iterate ``xstar``, primal iterate ``x = S_lam(xstar)`` and counter."""

    xstar: FloatArray
    x: FloatArray
    k: int = 0


@dataclass(frozen=True)
class StepInfo:
    """What a single step consumed: block, noise draw, stepsize and beta."""

    block: int
    noise: FloatArray
    eta: float
    beta: float | None


StepCallback = Callable[[SolverState, SolverState, StepInfo], None]


def init_state(xstar0: FloatArray, objective: SparseObjective) -> SolverState:
    xstar = np.array(xstar0, dtype=np.float64, copy=True)
    return SolverState(xstar=xstar, x=objective.soft_shrinkage(xstar), k=0)


def step_with_info(
    state: SolverState,
    mat: BlockedMatrix,
    rhs: NoisyRhs,
    schedule: StepsizeSchedule,
    objective: SparseObjective,
    rng: np.random.Generator,
) -> tuple[SolverState, StepInfo]:
    i = sample_block(mat, rng)
    noisy, eps = rhs.query(i, rng)
    residual = block_apply(mat, i, state.x) - noisy
    beta = schedule.beta
    eta = schedule.advance()

    scale = eta / mat.block_spec_norms[i] ** 2
    xstar = state.xstar - scale * block_apply_transpose(mat, i, residual)
    new_state = SolverState(
        xstar=xstar, x=objective.soft_shrinkage(xstar), k=state.k + 1
    )
    return new_state, StepInfo(block=i, noise=eps, eta=eta, beta=beta)


def step(
    state: SolverState,
    mat: BlockedMatrix,
    rhs: NoisyRhs,
    schedule: StepsizeSchedule,
    objective: SparseObjective,
    rng: np.random.Generator,
) -> SolverState:
    """One iteration; see :func:`step_with_info` for the consumed randomness."""
    return step_with_info(state, mat, rhs, schedule, objective, rng)[0]


@dataclass
class RunRecord:
    """Metrics recorded every ``stride`` iterations plus the final iterate.

    ``rel_error`` and ``bregman`` are NaN when no reference solution was
    given. ``residual_source`` is ``"clean"`` when the residual is measured
    against the clean right-hand side and ``"noisy_sample"`` otherwise.
    """

    k: list[int] = field(default_factory=list)
    eta: list[float] = field(default_factory=list)
    beta: list[float] = field(default_factory=list)
    rel_residual: list[float] = field(default_factory=list)
    rel_error: list[float] = field(default_factory=list)
    bregman: list[float] = field(default_factory=list)
    x_final: FloatArray = field(default_factory=lambda: np.zeros(0))
    iterations: int = 0
    wall_time: float = 0.0
    residual_source: str = "clean"

    def append(
        self,
        k: int,
        eta: float,
        beta: float | None,
        rel_residual: float,
        rel_error: float,
        bregman: float,
    ) -> None:
        self.k.append(k)
        self.eta.append(eta)
        self.beta.append(float("nan") if beta is None else beta)
        self.rel_residual.append(rel_residual)
        self.rel_error.append(rel_error)
        self.bregman.append(bregman)

    def column(self, name: str) -> FloatArray:
        return np.asarray(getattr(self, name), dtype=np.float64)

    @property
    def final_rel_error(self) -> float:
        return self.rel_error[-1] if self.rel_error else float("nan")

    @property
    def final_rel_residual(self) -> float:
        return self.rel_residual[-1] if self.rel_residual else float("nan")


def _safe_norm(v: FloatArray) -> float:
    norm = float(np.linalg.norm(v))
    return norm if norm > 0.0 else 1.0


def run(
    mat: BlockedMatrix,
    rhs: NoisyRhs,
    schedule: StepsizeSchedule,
    objective: SparseObjective,
    max_iters: int,
    *,
    rng: np.random.Generator | int | None = None,
    xstar0: FloatArray | None = None,
    reference: FloatArray | None = None,
    b_clean: FloatArray | None = None,
    stride: int | None = None,
    on_step: StepCallback | None = None,
) -> RunRecord:
    """Run ``max_iters`` steps from ``xstar0`` (default zero).

    Metrics are recorded at ``k = 0``, every ``stride`` iterations (default
    one epoch, ``M``) and at ``k = max_iters``. Without ``b_clean`` the
    residual is measured against one held-out noisy copy of the
    right-hand side drawn before the first step.
    """
    if max_iters < 1:
        raise InvalidConfigError(f"max_iters must be at least 1, got {max_iters}")
    stride = stride or mat.n_blocks
    if stride < 1:
        raise InvalidConfigError(f"stride must be positive, got {stride}")
    generator = rng if isinstance(rng, np.random.Generator) else np.random.default_rng(rng)

    record = RunRecord()
    if b_clean is not None:
        b_ref = np.asarray(b_clean, dtype=np.float64)
    else:
        b_ref = rhs.sample_full(generator)
        record.residual_source = "noisy_sample"
    b_norm = _safe_norm(b_ref)
    ref_norm = _safe_norm(reference) if reference is not None else 1.0

    def observe(s: SolverState) -> None:
        rel_res = float(np.linalg.norm(mat.data @ s.x - b_ref)) / b_norm
        if reference is None:
            rel_err = bregman = float("nan")
        else:
            rel_err = float(np.linalg.norm(s.x - reference)) / ref_norm
            bregman = objective.bregman_distance(s.xstar, reference)
        record.append(s.k, schedule.next_eta(), schedule.beta, rel_res, rel_err, bregman)

    start = time.perf_counter()
    n = mat.shape[1]
    state = init_state(np.zeros(n) if xstar0 is None else xstar0, objective)
    observe(state)
    for _ in range(max_iters):
        new_state, info = step_with_info(state, mat, rhs, schedule, objective, generator)
        if on_step is not None:
            on_step(state, new_state, info)
        state = new_state
        if state.k % stride == 0 or state.k == max_iters:
            observe(state)

    record.x_final = state.x
    record.iterations = state.k
    record.wall_time = time.perf_counter() - start
    logger.debug(
        "Ran %d iterations in %.3fs, final relative residual %.3e",
        state.k,
        record.wall_time,
        record.final_rel_residual,
    )
    return record


def descent_gap(
    before: SolverState,
    after: SolverState,
    info: StepInfo,
    objective: SparseObjective,
    mat: BlockedMatrix,
    b: FloatArray,
    xhat: FloatArray,
) -> float:
    """Right-hand side minus left-hand side of the pathwise descent inequality.

    ``D_{k+1} <= D_k - eta(2-eta)/2 * ||r||^2/||A_(i)||^2
    + eta^2/2 * ||eps||^2/||A_(i)||^2 + eta(1-eta) * eps^T r/||A_(i)||^2``
    with the clean residual ``r = A_(i) x_k - b_(i)``.
    """
    i, eta, eps = info.block, info.eta, info.noise
    norm2 = mat.block_spec_norms[i] ** 2
    r = block_apply(mat, i, before.x) - b[mat.block_rows(i)]
    d_before = objective.bregman_distance(before.xstar, xhat)
    d_after = objective.bregman_distance(after.xstar, xhat)
    bound = (
        d_before
        - 0.5 * eta * (2.0 - eta) * float(r @ r) / norm2
        + 0.5 * eta * eta * float(eps @ eps) / norm2
        + eta * (1.0 - eta) * float(eps @ r) / norm2
    )
    return bound - d_after


def descent_check(
    before: SolverState,
    after: SolverState,
    info: StepInfo,
    objective: SparseObjective,
    mat: BlockedMatrix,
    b: FloatArray,
    xhat: FloatArray,
    slack: float = DESCENT_SLACK,
) -> bool:
    """Whether the pathwise descent inequality holds within ``slack``."""
    return descent_gap(before, after, info, objective, mat, b, xhat) >= -slack


def exact_beta0(
    mat: BlockedMatrix,
    objective: SparseObjective,
    noise: NoiseModel,
    xhat: FloatArray,
    xstar0: FloatArray | None = None,
) -> float:
    """``||A||_sq^2 * D_f^{x*_0}(x_0, x_hat) / sigma^2`` from the ground truth."""
    sigma2 = noise.total_sigma**2
    if sigma2 == 0.0:
        raise InvalidConfigError("Exact beta0 is undefined for a noiseless problem")
    start = np.zeros(mat.shape[1]) if xstar0 is None else xstar0
    d0 = objective.bregman_distance(start, xhat)
    if d0 == 0.0:
        raise InvalidConfigError("Exact beta0 is zero: the start point is the solution")
    return mat.square_norm**2 * d0 / sigma2
