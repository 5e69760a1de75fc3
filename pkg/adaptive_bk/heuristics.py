"""Hyperparameter estimates for the adaptive stepsize from a pilot run.

The pilot is the plain method (``eta_k = 1``) run for ``N`` iterations. With
``D_j = D_f^{x*_j}(x_j, x_N)`` measured against the pilot's last iterate:

* ``gamma~ = 2 * (1 - mean_{j=1..N0} D_j / D_{j-1})`` from the early linear
  decay, and
* ``beta0~ = [ gamma~/N1 * sum_{j=N-N1}^{N-1} D_j / D_0 ]^-1`` from the
  noise plateau.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass

import numpy as np
from numpy.typing import NDArray

from adaptive_bk.blocked_matrix import BlockedMatrix
from adaptive_bk.exceptions import DegenerateTraceError, InvalidConfigError
from adaptive_bk.noise import NoisyRhs
from adaptive_bk.objective import SparseObjective
from adaptive_bk.solver import RunRecord, SolverState, StepInfo, run
from adaptive_bk.stepsize import ConstantStepsize

logger = logging.getLogger(__name__)

GAMMA_FLOOR = 1e-8
GAMMA_CEIL = 2.0 - 1e-8
# Denominators below this fraction of the largest early distance are skipped.
NEGLIGIBLE_RATIO = 1e-15

FloatArray = NDArray[np.float64]


@dataclass
class PilotTrace:
    """Bregman distances of the pilot iterates to the pilot's final iterate.

    With ``stride > 1`` only every ``stride``-th iterate is kept and
    ``N0``/``N1`` count entries of the thinned trace.
    """

    bregman_to_final: FloatArray
    stride: int = 1
    record: RunRecord | None = None

    def __post_init__(self) -> None:
        self.bregman_to_final = np.asarray(self.bregman_to_final, dtype=np.float64)
        if np.any(self.bregman_to_final < 0) or not np.all(
            np.isfinite(self.bregman_to_final)
        ):
            raise DegenerateTraceError("Trace entries must be finite and nonnegative")

    @property
    def n(self) -> int:
        return int(self.bregman_to_final.shape[0])


@dataclass(frozen=True)
class GammaEstimate:
    value: float
    clamped: bool
    valid_ratios: int


@dataclass(frozen=True)
class HeuristicEstimate:
    gamma: float
    beta0: float
    gamma_clamped: bool
    valid_ratios: int
    n0: int
    n1: int


def collect_pilot(
    mat: BlockedMatrix,
    rhs: NoisyRhs,
    objective: SparseObjective,
    n_iters: int,
    *,
    rng: np.random.Generator | int | None = None,
    stride: int = 1,
    record_stride: int | None = None,
    b_clean: FloatArray | None = None,
    reference: FloatArray | None = None,
) -> PilotTrace:
    """Run ``n_iters`` steps with ``eta = 1`` and build the distance trace.

    Every ``stride``-th dual iterate ``x*_j`` (``j < N``) is stored and the
    distances to ``x_N`` are computed in a second pass.
    """
    if n_iters < 2:
        raise InvalidConfigError(f"A pilot needs at least 2 iterations, got {n_iters}")
    if stride < 1:
        raise InvalidConfigError(f"Pilot stride must be positive, got {stride}")

    duals: list[FloatArray] = []

    def keep(before: SolverState, after: SolverState, info: StepInfo) -> None:
        if before.k % stride == 0:
            duals.append(before.xstar)

    record = run(
        mat,
        rhs,
        ConstantStepsize(1.0),
        objective,
        n_iters,
        rng=rng,
        reference=reference,
        b_clean=b_clean,
        stride=record_stride,
        on_step=keep,
    )
    final = record.x_final
    distances = np.array([objective.bregman_distance(d, final) for d in duals])
    logger.debug("Pilot trace: %d entries, D_0=%.3e", distances.size, distances[0])
    return PilotTrace(bregman_to_final=distances, stride=stride, record=record)


def estimate_gamma(trace: PilotTrace, n0: int) -> GammaEstimate:
    """Rate estimate from the mean per-iteration ratio of consecutive distances.

    Ratios with a zero (or negligible) denominator are skipped. The result
    is clamped to ``[1e-8, 2 - 1e-8]`` and flagged when clamping happened.

    Raises:
        DegenerateTraceError: If fewer than ``n0/2`` ratios are usable.
    """
    if not 1 <= n0 < trace.n:
        raise InvalidConfigError(f"N0 must satisfy 1 <= N0 < {trace.n}, got {n0}")
    d = trace.bregman_to_final[: n0 + 1]
    denominators = d[:-1]
    threshold = NEGLIGIBLE_RATIO * float(d.max())
    valid = denominators > threshold
    n_valid = int(valid.sum())
    if n_valid < n0 / 2 or n_valid == 0:
        raise DegenerateTraceError(
            f"Only {n_valid} of {n0} distance ratios are usable for gamma"
        )
    if n_valid < n0:
        logger.warning("Skipped %d zero denominators in gamma estimate", n0 - n_valid)

    ratios = d[1:][valid] / denominators[valid]
    if trace.stride > 1:
        # Thinned entries are stride iterations apart.
        ratios = ratios ** (1.0 / trace.stride)
    value = 2.0 * (1.0 - float(ratios.mean()))
    clamped = not GAMMA_FLOOR <= value <= GAMMA_CEIL
    if clamped:
        logger.warning(
            "Estimated gamma %.4g outside (0, 2); clamped to [%g, %g]",
            value,
            GAMMA_FLOOR,
            GAMMA_CEIL,
        )
        value = min(max(value, GAMMA_FLOOR), GAMMA_CEIL)
    return GammaEstimate(value=value, clamped=clamped, valid_ratios=n_valid)


def estimate_beta0(trace: PilotTrace, gamma_tilde: float, n1: int) -> float:
    """Start value estimate from the mean of the last ``n1`` distances.

    Raises:
        DegenerateTraceError: If ``D_0`` or the tail mean is zero.
    """
    if not 1 <= n1 < trace.n:
        raise InvalidConfigError(f"N1 must satisfy 1 <= N1 < {trace.n}, got {n1}")
    if not gamma_tilde > 0:
        raise InvalidConfigError(f"gamma estimate must be positive, got {gamma_tilde}")
    d = trace.bregman_to_final
    d0 = float(d[0])
    if d0 == 0.0:
        raise DegenerateTraceError("D_0 is zero: the pilot started at its final iterate")
    tail_mean = float(np.mean(d[trace.n - n1 :] / d0))
    if tail_mean == 0.0:
        raise DegenerateTraceError("Tail of the pilot trace is identically zero")
    return 1.0 / (gamma_tilde * tail_mean)


def default_window(n: int) -> int:
    """Default ``N0``/``N1``: a tenth of the trace, at least one entry."""
    return max(1, min(n // 10, n - 1))


def estimate_hyperparameters(
    trace: PilotTrace, n0: int | None = None, n1: int | None = None
) -> HeuristicEstimate:
    n0 = default_window(trace.n) if n0 is None else n0
    n1 = default_window(trace.n) if n1 is None else n1
    gamma = estimate_gamma(trace, n0)
    beta0 = estimate_beta0(trace, gamma.value, n1)
    logger.info("Heuristic estimates: gamma~=%.4g beta0~=%.4g", gamma.value, beta0)
    return HeuristicEstimate(
        gamma=gamma.value,
        beta0=beta0,
        gamma_clamped=gamma.clamped,
        valid_ratios=gamma.valid_ratios,
        n0=n0,
        n1=n1,
    )
