"""Independent per-query measurement noise.

Every query of block ``i`` returns ``b_(i) + eps`` with a fresh zero-mean
``eps`` satisfying ``E||eps||^2 = sigma_i^2``; draws never repeat and never
depend on earlier queries.
"""

from __future__ import annotations

import enum
import logging
import math
from collections.abc import Sequence
from dataclasses import dataclass

import numpy as np
from numpy.typing import NDArray

from adaptive_bk.blocked_matrix import BlockedMatrix
from adaptive_bk.exceptions import BlockIndexError, InvalidConfigError

logger = logging.getLogger(__name__)

FloatArray = NDArray[np.float64]


class NoiseDistribution(enum.Enum):
    GAUSSIAN = "gaussian"
    ZERO = "zero"


@dataclass(frozen=True)
class NoiseModel:
    """Per-block noise levels ``sigma_i`` and their distribution."""

    sigmas: tuple[float, ...]
    distribution: NoiseDistribution = NoiseDistribution.GAUSSIAN

    def __post_init__(self) -> None:
        if any(not s >= 0.0 for s in self.sigmas):
            raise InvalidConfigError(f"Noise levels must be nonnegative: {self.sigmas}")
        if self.distribution is NoiseDistribution.ZERO and any(self.sigmas):
            raise InvalidConfigError("Zero noise requires all sigma_i = 0")

    @property
    def n_blocks(self) -> int:
        return len(self.sigmas)

    @property
    def total_sigma(self) -> float:
        return math.sqrt(math.fsum(s * s for s in self.sigmas))

    @property
    def is_zero(self) -> bool:
        return self.distribution is NoiseDistribution.ZERO

    def draw(self, i: int, size: int, rng: np.random.Generator) -> FloatArray:
        """Noise vector of length ``size`` for block ``i``.

        Gaussian components are i.i.d. ``N(0, sigma_i^2 / size)`` so that the
        expected squared norm is exactly ``sigma_i^2``.
        """
        if not 0 <= i < self.n_blocks:
            raise BlockIndexError(f"Block index {i} out of range for {self.n_blocks}")
        if self.is_zero:
            return np.zeros(size)
        return rng.standard_normal(size) * (self.sigmas[i] / math.sqrt(size))

    def query_block(
        self,
        b: FloatArray,
        mat: BlockedMatrix,
        i: int,
        rng: np.random.Generator,
    ) -> FloatArray:
        """``b_(i)`` plus a fresh noise draw."""
        return self.query_block_with_draw(b, mat, i, rng)[0]

    def query_block_with_draw(
        self,
        b: FloatArray,
        mat: BlockedMatrix,
        i: int,
        rng: np.random.Generator,
    ) -> tuple[FloatArray, FloatArray]:
        """Like :meth:`query_block`, also returning the noise vector itself."""
        clean = b[mat.block_rows(i)]
        eps = self.draw(i, clean.shape[0], rng)
        return clean + eps, eps


def uniform_split(sigma_total: float, n_blocks: int) -> NoiseModel:
    """Split the total noise level evenly: ``sigma_i = sigma / sqrt(M)``."""
    if n_blocks < 1:
        raise InvalidConfigError(f"Need at least one block, got {n_blocks}")
    if sigma_total < 0:
        raise InvalidConfigError(f"Noise level must be nonnegative, got {sigma_total}")
    if sigma_total == 0:
        return zero_noise(n_blocks)
    per_block = sigma_total / math.sqrt(n_blocks)
    return NoiseModel(sigmas=(per_block,) * n_blocks)


def zero_noise(n_blocks: int) -> NoiseModel:
    return NoiseModel(sigmas=(0.0,) * n_blocks, distribution=NoiseDistribution.ZERO)


def noise_from_levels(sigmas: Sequence[float]) -> NoiseModel:
    if not any(sigmas):
        return zero_noise(len(sigmas))
    return NoiseModel(sigmas=tuple(float(s) for s in sigmas))


def resolve_sigma(
    b_clean: FloatArray, sigma: float | None, sigma_rel: float | None
) -> float:
    """Absolute noise level from either ``sigma`` or ``sigma_rel * ||b||``."""
    if (sigma is None) == (sigma_rel is None):
        raise InvalidConfigError("Give exactly one of sigma and sigma_rel")
    if sigma is not None:
        return float(sigma)
    assert sigma_rel is not None
    return float(sigma_rel * np.linalg.norm(b_clean))


@dataclass(frozen=True)
class NoisyRhs:
    """Measurement oracle: clean right-hand side plus a noise model."""

    b: FloatArray
    model: NoiseModel
    mat: BlockedMatrix

    def __post_init__(self) -> None:
        if self.b.shape != (self.mat.shape[0],):
            raise InvalidConfigError(
                f"Right-hand side has shape {self.b.shape}, "
                f"expected ({self.mat.shape[0]},)"
            )
        if self.model.n_blocks != self.mat.n_blocks:
            raise InvalidConfigError(
                f"Noise model has {self.model.n_blocks} levels "
                f"for {self.mat.n_blocks} blocks"
            )

    def query(
        self, i: int, rng: np.random.Generator
    ) -> tuple[FloatArray, FloatArray]:
        """Noisy block ``b~_(i)`` and the noise draw it contains."""
        return self.model.query_block_with_draw(self.b, self.mat, i, rng)

    def sample_full(self, rng: np.random.Generator) -> FloatArray:
        """One noisy copy of the whole right-hand side."""
        return np.concatenate(
            [
                self.model.query_block(self.b, self.mat, i, rng)
                for i in range(self.mat.n_blocks)
            ]
        )
