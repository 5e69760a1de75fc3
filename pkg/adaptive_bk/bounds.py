"""Closed-form convergence envelopes for the adaptive stepsize.

With ``v_k = gamma*beta_k`` the ideal recursion is
``v_{k+1} = v_k - (gamma/2) * v_k^2 / (v_k + 1)``. It is dominated by

* the crude bound ``(1/v_0 + gamma*k / (2*(v_0 + 1)))^-1`` and
* the ODE bound ``1 / W(exp(gamma*k/2 + c))`` with ``c = 1/v_0 - ln v_0``,

where ``W`` is the principal Lambert-W branch. ``g(k) = sigma^2 * beta_bound(k)``
bounds the Bregman error and ``2*g(k)/||A||_sq^2`` the mean squared error.
Nothing here feeds back into the solver.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass

import numpy as np
from numpy.typing import ArrayLike, NDArray
from pydantic import BaseModel, ConfigDict, Field

from adaptive_bk.exceptions import LambertDomainError
from adaptive_bk.stepsize import GAMMA_MAX

logger = logging.getLogger(__name__)

LAMBERT_MAX_ITERS = 100
# Above these the direct residual w*e^w - x is no longer representable.
LOG_FORM_MIN_ARG = 1e200
LOG_FORM_MIN_LOG = math.log(LOG_FORM_MIN_ARG)

FloatArray = NDArray[np.float64]


def lambert_w(x: float) -> float:
    """Principal branch ``W(x)`` for ``x >= 0`` by Halley iteration.

    Starts from ``ln(1 + x)`` and stops once the Halley step is within a
    few ulps of ``w``, so small arguments keep full relative accuracy. Huge
    arguments are handed to :func:`lambert_w_exp`.

    Raises:
        LambertDomainError: If ``x`` is negative or NaN.
    """
    if math.isnan(x) or x < 0.0:
        raise LambertDomainError(f"lambert_w is defined here for x >= 0, got {x}")
    if x == 0.0:
        return 0.0
    if x > LOG_FORM_MIN_ARG:
        return lambert_w_exp(math.log(x))

    w = math.log1p(x)
    for _ in range(LAMBERT_MAX_ITERS):
        ew = math.exp(w)
        residual = w * ew - x
        if residual == 0.0:
            return w
        wp1 = w + 1.0
        step = residual / (ew * wp1 - (w + 2.0) * residual / (2.0 * wp1))
        w -= step
        if abs(step) <= 4.0 * np.finfo(float).eps * abs(w):
            return w
    logger.warning("lambert_w(%g) did not converge in %d steps", x, LAMBERT_MAX_ITERS)
    return w


def lambert_w_exp(log_x: float) -> float:
    """``W(exp(log_x))`` without forming ``exp(log_x)``.

    For large arguments solves ``w + ln(w) = log_x`` by Newton's method,
    which approaches the root monotonically from ``log_x - ln(log_x)``.
    """
    if math.isnan(log_x):
        raise LambertDomainError("lambert_w_exp got NaN")
    if log_x < LOG_FORM_MIN_LOG:
        return lambert_w(math.exp(log_x))

    w = log_x - math.log(log_x)
    for _ in range(LAMBERT_MAX_ITERS):
        h = w + math.log(w) - log_x
        step = h / (1.0 + 1.0 / w)
        w -= step
        if abs(step) <= 4.0 * np.finfo(float).eps * w:
            break
    return w


class BoundParams(BaseModel):
    """Inputs of the envelopes: rate, start value, noise and block square norm."""

    model_config = ConfigDict(frozen=True)

    gamma: float = Field(gt=0, lt=GAMMA_MAX, description="Rate parameter gamma")
    beta0: float = Field(gt=0, description="Initial normalized error beta_0")
    sigma2: float = Field(default=1.0, ge=0, description="Total noise variance")
    square_norm2: float = Field(default=1.0, gt=0, description="||A||_sq^2")

    @property
    def v0(self) -> float:
        return self.gamma * self.beta0

    def log_lambert_argument(self, k: float) -> float:
        """``gamma*k/2 + 1/v_0 - ln(v_0)``, the log of the W argument."""
        return 0.5 * self.gamma * k + 1.0 / self.v0 - math.log(self.v0)


def beta_bound(p: BoundParams, k: float) -> float:
    """``1 / (gamma * W(exp(gamma*k/2 + c)))``, an upper bound on ``beta_k``."""
    return 1.0 / (p.gamma * lambert_w_exp(p.log_lambert_argument(k)))


def g_bound(p: BoundParams, k: float) -> float:
    """``sigma^2 / (gamma * W(c * exp(gamma*k/2)))`` with ``c = e^{1/v0} / v0``.

    Zero at every ``k`` for a noiseless problem, ``k = 0`` included since
    ``g(0) = sigma^2 * beta_0``. Use :func:`noiseless_envelope` for the
    ``sigma -> 0`` limit.
    """
    if p.sigma2 == 0.0:
        return 0.0
    return p.sigma2 * beta_bound(p, k)


def error_sq_bound(p: BoundParams, k: float) -> float:
    """Bound on ``E||x_k - x_hat||^2``: ``2 * g(k) / ||A||_sq^2``."""
    return 2.0 * g_bound(p, k) / p.square_norm2


def noiseless_envelope(square_norm2: float, d0: float, gamma: float, k: float) -> float:
    """``||A||_sq^2 * exp(-gamma*k/2) * D_f(x_0, x_hat)``."""
    return square_norm2 * math.exp(-0.5 * gamma * k) * d0


def crude_v_bound(gamma: float, v0: float, k: float) -> float:
    """``(1/v_0 + gamma*k / (2*(v_0 + 1)))^-1``."""
    return 1.0 / (1.0 / v0 + gamma * k / (2.0 * (v0 + 1.0)))


def v_recursion(gamma: float, v0: float, k_max: int) -> FloatArray:
    """``v_0..v_{k_max}`` of ``v_{k+1} = v_k - (gamma/2) v_k^2 / (v_k + 1)``."""
    v = np.empty(k_max + 1)
    v[0] = v0
    for k in range(k_max):
        vk = v[k]
        v[k + 1] = vk - 0.5 * gamma * vk * vk / (vk + 1.0)
    return v


@dataclass(frozen=True)
class BoundCurve:
    k: NDArray[np.int64]
    v_recursion: FloatArray
    v_crude: FloatArray
    beta_recursion: FloatArray
    beta_bound: FloatArray
    g_bound: FloatArray
    error_sq_bound: FloatArray

    COLUMNS = (
        "k",
        "v_recursion",
        "v_crude",
        "beta_recursion",
        "beta_bound",
        "g_bound",
        "error_sq_bound",
    )

    def rows(self) -> list[tuple[float, ...]]:
        return [
            (int(k), *(float(col[j]) for col in self._value_columns()))
            for j, k in enumerate(self.k)
        ]

    def _value_columns(self) -> tuple[FloatArray, ...]:
        return (
            self.v_recursion,
            self.v_crude,
            self.beta_recursion,
            self.beta_bound,
            self.g_bound,
            self.error_sq_bound,
        )


def bound_curve(p: BoundParams, ks: ArrayLike) -> BoundCurve:
    """Tabulate the recursion and every envelope at the iteration counts ``ks``."""
    k_arr = np.asarray(ks, dtype=np.int64)
    if k_arr.size and k_arr.min() < 0:
        raise ValueError("Iteration counts must be nonnegative")
    k_max = int(k_arr.max()) if k_arr.size else 0
    v_all = v_recursion(p.gamma, p.v0, k_max)[k_arr]
    return BoundCurve(
        k=k_arr,
        v_recursion=v_all,
        v_crude=np.array([crude_v_bound(p.gamma, p.v0, k) for k in k_arr]),
        beta_recursion=v_all / p.gamma,
        beta_bound=np.array([beta_bound(p, k) for k in k_arr]),
        g_bound=np.array([g_bound(p, k) for k in k_arr]),
        error_sq_bound=np.array([error_sq_bound(p, k) for k in k_arr]),
    )
