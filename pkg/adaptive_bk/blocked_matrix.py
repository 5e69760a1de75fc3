"""Row-block partition of a dense system matrix.

Holds the per-block spectral norms, the block square norm
``||A||_sq = (sum_i ||A_(i)||_2^2)^(1/2)`` and the sampling distribution
``p_i = ||A_(i)||_2^2 / ||A||_sq^2`` used by the block Kaczmarz iteration.
"""

from __future__ import annotations

import logging
from collections.abc import Sequence
from dataclasses import dataclass, field

import numpy as np
import scipy.linalg
from numpy.typing import ArrayLike, NDArray

from adaptive_bk.exceptions import (
    BlockIndexError,
    DegenerateBlockError,
    SizeMismatchError,
)

logger = logging.getLogger(__name__)

POWER_MAX_ITERS = 1000
POWER_RTOL = 1e-10
DEGENERATE_NORM = 1e-14

FloatArray = NDArray[np.float64]


def spectral_norm(
    block: FloatArray,
    max_iters: int = POWER_MAX_ITERS,
    rtol: float = POWER_RTOL,
) -> float:
    """Spectral norm of ``block`` by power iteration on its Gram matrix.

    The smaller of ``B^T B`` and ``B B^T`` is used; both share the nonzero
    spectrum. Stops once the eigen-residual ``||G v - rho v||`` drops below
    ``rtol * rho``. Nearly equal top eigenvalues can keep power iteration
    from getting there within ``max_iters``; the top eigenvalue then comes
    from a dense symmetric solve of the Gram matrix.
    """
    rows, cols = block.shape
    gram = block @ block.T if rows < cols else block.T @ block
    if gram.shape == (1, 1):
        return float(np.sqrt(max(gram[0, 0], 0.0)))

    # Fixed start vector keeps the norms (and hence sampling) reproducible.
    v = np.random.default_rng(0).standard_normal(gram.shape[0])
    v /= np.linalg.norm(v)
    for _ in range(max_iters):
        w = gram @ v
        w_norm = float(np.linalg.norm(w))
        if w_norm == 0.0:
            return 0.0
        rho = float(v @ w)
        if np.linalg.norm(w - rho * v) <= rtol * abs(rho):
            return float(np.sqrt(max(rho, 0.0)))
        v = w / w_norm

    logger.debug("Power iteration hit %d iterations; refining densely", max_iters)
    top = gram.shape[0] - 1
    rho = float(scipy.linalg.eigvalsh(gram, subset_by_index=[top, top])[0])
    return float(np.sqrt(max(rho, 0.0)))


@dataclass(frozen=True)
class BlockedMatrix:
    """Dense ``m x n`` matrix split into ``M`` contiguous row blocks.

    Build instances with :func:`partition`; the cached fields are derived
    from ``data`` and ``block_offsets`` and never change afterwards.
    """

    data: FloatArray
    block_offsets: tuple[int, ...]
    block_spec_norms: FloatArray
    square_norm: float
    probabilities: FloatArray
    _cumulative: FloatArray = field(repr=False)

    @property
    def shape(self) -> tuple[int, int]:
        rows, cols = self.data.shape
        return rows, cols

    @property
    def n_blocks(self) -> int:
        return len(self.block_offsets) - 1

    @property
    def block_sizes(self) -> list[int]:
        return [
            self.block_offsets[i + 1] - self.block_offsets[i]
            for i in range(self.n_blocks)
        ]

    def block_rows(self, i: int) -> slice:
        """Row slice of block ``i``."""
        self._check_index(i)
        return slice(self.block_offsets[i], self.block_offsets[i + 1])

    def block(self, i: int) -> FloatArray:
        return self.data[self.block_rows(i)]

    def _check_index(self, i: int) -> None:
        if not 0 <= i < self.n_blocks:
            raise BlockIndexError(
                f"Block index {i} out of range for {self.n_blocks} blocks"
            )


def partition(matrix: ArrayLike, block_sizes: Sequence[int]) -> BlockedMatrix:
    """Partition ``matrix`` into consecutive row blocks of the given sizes.

    Raises:
        SizeMismatchError: If the sizes are not positive or do not sum to ``m``.
        DegenerateBlockError: If a block has spectral norm below 1e-14.
    """
    data = np.array(matrix, dtype=np.float64, copy=True)
    if data.ndim != 2:
        raise SizeMismatchError(f"Expected a 2-D matrix, got {data.ndim} dimensions")
    rows = data.shape[0]

    sizes = [int(s) for s in block_sizes]
    if not sizes or any(s <= 0 for s in sizes):
        raise SizeMismatchError(f"Block sizes must be positive, got {sizes}")
    if sum(sizes) != rows:
        raise SizeMismatchError(
            f"Block sizes sum to {sum(sizes)} but the matrix has {rows} rows"
        )

    offsets = (0, *np.cumsum(sizes).tolist())
    norms = np.empty(len(sizes))
    for i in range(len(sizes)):
        norms[i] = spectral_norm(data[offsets[i] : offsets[i + 1]])
        if norms[i] < DEGENERATE_NORM:
            raise DegenerateBlockError(
                f"Block {i} (rows {offsets[i]}..{offsets[i + 1] - 1}) "
                f"has spectral norm {norms[i]:.3e}"
            )

    squares = norms**2
    square_norm2 = float(squares.sum())
    probabilities = squares / square_norm2
    cumulative = np.cumsum(probabilities)
    cumulative[-1] = 1.0

    data.setflags(write=False)
    norms.setflags(write=False)
    probabilities.setflags(write=False)
    cumulative.setflags(write=False)
    logger.debug(
        "Partitioned %dx%d matrix into %d blocks, ||A||_sq^2=%.6g",
        rows,
        data.shape[1],
        len(sizes),
        square_norm2,
    )
    return BlockedMatrix(
        data=data,
        block_offsets=tuple(int(o) for o in offsets),
        block_spec_norms=norms,
        square_norm=float(np.sqrt(square_norm2)),
        probabilities=probabilities,
        _cumulative=cumulative,
    )


def equal_blocks(rows: int, n_blocks: int) -> list[int]:
    """Sizes of ``n_blocks`` equal blocks; ``n_blocks`` must divide ``rows``."""
    if n_blocks <= 0 or rows % n_blocks:
        raise SizeMismatchError(f"{n_blocks} blocks do not divide {rows} rows")
    return [rows // n_blocks] * n_blocks


def sample_block(mat: BlockedMatrix, rng: np.random.Generator) -> int:
    """Draw a block index with probability ``p_i`` by prefix-sum inversion."""
    u = rng.random()
    i = int(np.searchsorted(mat._cumulative, u, side="right"))
    return min(i, mat.n_blocks - 1)


def block_apply(mat: BlockedMatrix, i: int, x: FloatArray) -> FloatArray:
    """``A_(i) x``."""
    return mat.block(i) @ x


def block_apply_transpose(mat: BlockedMatrix, i: int, r: FloatArray) -> FloatArray:
    """``A_(i)^T r``."""
    return mat.block(i).T @ r
