"""Stepsize schedules for the Bregman-Kaczmarz iteration.

``ConstantStepsize`` returns a fixed ``eta``. ``AdaptiveStepsize`` emits
``eta_k = gamma*beta_k / (gamma*beta_k + 1)`` and then moves
``beta_{k+1} = beta_k * (1 - gamma*eta_k/2)``; ``advance`` is the only
place where ``eta_k`` and ``beta_k`` are coupled.
"""

from __future__ import annotations

import logging
from typing import Protocol

from adaptive_bk.exceptions import InvalidConfigError, InvalidStateError

logger = logging.getLogger(__name__)

GAMMA_MAX = 2.0


class StepsizeSchedule(Protocol):
    """Protocol shared by all stepsize schedules."""

    @property
    def beta(self) -> float | None: ...
    def next_eta(self) -> float: ...
    def advance(self) -> float: ...


class ConstantStepsize:
    def __init__(self, eta: float = 1.0) -> None:
        if not 0.0 < eta < 2.0:
            raise InvalidConfigError(f"Constant stepsize must lie in (0, 2), got {eta}")
        self.eta = float(eta)

    @property
    def beta(self) -> float | None:
        return None

    def next_eta(self) -> float:
        return self.eta

    def advance(self) -> float:
        return self.eta

    def __repr__(self) -> str:
        return f"ConstantStepsize(eta={self.eta})"


class AdaptiveStepsize:
    """Adaptive schedule driven by the rate ``gamma`` and start value ``beta0``.

    ``gamma`` stands in for ``theta(x_hat) / ||A||_sq^2`` and must lie in
    ``(0, 2)``; ``beta0`` is the normalized initial Bregman error
    ``||A||_sq^2 * D_f(x_0, x_hat) / sigma^2``.
    """

    def __init__(self, gamma: float, beta0: float) -> None:
        if not 0.0 < gamma < GAMMA_MAX:
            raise InvalidConfigError(f"gamma must lie in (0, 2), got {gamma}")
        if not 0.0 < beta0 < float("inf"):
            raise InvalidConfigError(f"beta0 must be positive and finite, got {beta0}")
        self.gamma = float(gamma)
        self.beta0 = float(beta0)
        self._beta = float(beta0)
        self.k = 0

    @property
    def beta(self) -> float | None:
        return self._beta

    def next_eta(self) -> float:
        v = self.gamma * self._beta
        return v / (v + 1.0)

    def advance(self) -> float:
        eta = self.next_eta()
        updated = self._beta * (1.0 - 0.5 * self.gamma * eta)
        if not updated > 0.0:
            raise InvalidStateError(
                f"beta would become {updated} at k={self.k} "
                f"(gamma={self.gamma}, eta={eta})"
            )
        self._beta = updated
        self.k += 1
        return eta

    def __repr__(self) -> str:
        return (
            f"AdaptiveStepsize(gamma={self.gamma}, beta0={self.beta0}, "
            f"beta_k={self._beta}, k={self.k})"
        )
