"""The sparsity-promoting objective ``f(x) = lam*||x||_1 + 0.5*||x||_2^2``.

``f`` is 1-strongly convex, its conjugate gradient is the soft shrinkage
``S_lam`` and the Bregman distance is evaluated in Fenchel form, which only
needs the dual point ``x*``.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from numpy.typing import NDArray

FloatArray = NDArray[np.float64]


@dataclass(frozen=True)
class SparseObjective:
    lam: float = 0.0

    def __post_init__(self) -> None:
        if not self.lam >= 0.0:
            raise ValueError(f"lam must be nonnegative, got {self.lam}")

    def soft_shrinkage(self, xstar: FloatArray) -> FloatArray:
        """``max(|x*_j| - lam, 0) * sign(x*_j)``, the gradient of ``f*``."""
        if self.lam == 0.0:
            return np.array(xstar, dtype=np.float64, copy=True)
        return np.sign(xstar) * np.maximum(np.abs(xstar) - self.lam, 0.0)

    def f_value(self, x: FloatArray) -> float:
        return float(self.lam * np.abs(x).sum() + 0.5 * (x @ x))

    def conjugate_value(self, xstar: FloatArray) -> float:
        shrunk = self.soft_shrinkage(xstar)
        return float(0.5 * (shrunk @ shrunk))

    def bregman_distance(self, xstar: FloatArray, y: FloatArray) -> float:
        """``D_f^{x*}(x, y)`` with ``x = S_lam(x*)``, clamped at zero."""
        value = self.conjugate_value(xstar) - float(xstar @ y) + self.f_value(y)
        return max(value, 0.0)
