"""Consistent test problems with known ground truth.

* :func:`gaussian_problem`: i.i.d. standard normal matrix, ``s``-sparse solution.
* :func:`tomography_problem`: parallel-beam ray-sum matrix over an
  ``n_pix x n_pix`` image, one block per projection angle, sparse phantom.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass

import numpy as np
from numpy.typing import NDArray

from adaptive_bk.blocked_matrix import BlockedMatrix, equal_blocks, partition
from adaptive_bk.exceptions import InvalidConfigError, SizeMismatchError
from adaptive_bk.noise import NoiseModel, NoisyRhs, resolve_sigma, uniform_split

logger = logging.getLogger(__name__)

FloatArray = NDArray[np.float64]

PHANTOM_SUPERSAMPLING = 4
# (center_x, center_y, radius, value) in units of the half image width.
DEFAULT_DISKS = (
    (0.0, 0.0, 0.55, 0.4),
    (-0.25, 0.2, 0.15, 1.0),
    (0.25, -0.15, 0.2, 0.8),
    (0.1, 0.35, 0.08, 1.0),
)


@dataclass(frozen=True)
class SyntheticProblem:
    matrix: BlockedMatrix
    xhat: FloatArray | None
    b_clean: FloatArray
    noise: NoiseModel
    image_shape: tuple[int, int] | None = None

    @property
    def rhs(self) -> NoisyRhs:
        return NoisyRhs(b=self.b_clean, model=self.noise, mat=self.matrix)

    @property
    def sigma(self) -> float:
        return self.noise.total_sigma

    @property
    def has_ground_truth(self) -> bool:
        return self.xhat is not None


def gaussian_problem(
    m: int,
    n: int,
    s: int,
    n_blocks: int,
    *,
    sigma: float | None = None,
    sigma_rel: float | None = None,
    seed: int | None = None,
) -> SyntheticProblem:
    """Gaussian matrix with ``M`` equal blocks and an ``s``-sparse solution.

    Raises:
        InvalidConfigError: On inconsistent sizes or noise specification.
    """
    if m < 1 or n < 1:
        raise InvalidConfigError(f"Matrix dimensions must be positive, got {m}x{n}")
    if not 0 <= s <= n:
        raise InvalidConfigError(f"Sparsity s={s} must lie in [0, n={n}]")
    try:
        sizes = equal_blocks(m, n_blocks)
    except SizeMismatchError as e:
        raise InvalidConfigError(str(e)) from e

    rng = np.random.default_rng(seed)
    a = rng.standard_normal((m, n))
    xhat = np.zeros(n)
    support = rng.choice(n, size=s, replace=False)
    xhat[support] = rng.standard_normal(s)
    b = a @ xhat
    total = resolve_sigma(b, sigma, sigma_rel)
    logger.info("Gaussian problem %dx%d, s=%d, M=%d, sigma=%.4g", m, n, s, n_blocks, total)
    return SyntheticProblem(
        matrix=partition(a, sizes),
        xhat=xhat,
        b_clean=b,
        noise=uniform_split(total, n_blocks),
    )


def _ray_intersections(
    n_pix: int, theta: float, offset: float
) -> tuple[NDArray[np.int64], FloatArray]:
    """Pixel indices and chord lengths of one ray through the image.

    The image covers ``[-n/2, n/2]^2`` with unit pixels, row 0 at the top.
    The ray runs along ``(cos t, sin t)`` at signed distance ``offset``.
    """
    half = 0.5 * n_pix
    dx, dy = math.cos(theta), math.sin(theta)
    px, py = -offset * dy, offset * dx
    eps = 1e-12

    t_min, t_max = -math.inf, math.inf
    for p, d in ((px, dx), (py, dy)):
        if abs(d) > eps:
            t1, t2 = (-half - p) / d, (half - p) / d
            t_min, t_max = max(t_min, min(t1, t2)), min(t_max, max(t1, t2))
        elif not -half < p < half:
            return np.zeros(0, dtype=np.int64), np.zeros(0)
    if t_min >= t_max:
        return np.zeros(0, dtype=np.int64), np.zeros(0)

    grid = np.arange(n_pix + 1) - half
    crossings = [np.array([t_min, t_max])]
    for p, d in ((px, dx), (py, dy)):
        if abs(d) > eps:
            t = (grid - p) / d
            crossings.append(t[(t > t_min) & (t < t_max)])
    ts = np.unique(np.concatenate(crossings))
    lengths = np.diff(ts)
    mids = 0.5 * (ts[:-1] + ts[1:])
    cols = np.floor(px + mids * dx + half).astype(np.int64)
    rows = np.floor(half - (py + mids * dy)).astype(np.int64)
    keep = (lengths > eps) & (cols >= 0) & (cols < n_pix) & (rows >= 0) & (rows < n_pix)
    return rows[keep] * n_pix + cols[keep], lengths[keep]


def detector_offsets(n_det: int) -> FloatArray:
    """Unit-spaced detector bin centers, symmetric about the rotation axis."""
    return np.arange(n_det) - 0.5 * (n_det - 1)


def projection_angles(n_angles: int) -> FloatArray:
    return np.arange(n_angles) * (math.pi / n_angles)


def parallel_beam_matrix(n_pix: int, n_angles: int) -> FloatArray:
    """Ray-pixel intersection lengths, ``(n_angles * n_pix) x n_pix^2``.

    Rows are grouped by angle (angle-major), ``n_pix`` detector bins each.
    """
    if n_pix < 8 or n_angles < 2:
        raise InvalidConfigError(
            f"Need n_pix >= 8 and n_angles >= 2, got {n_pix} and {n_angles}"
        )
    offsets = detector_offsets(n_pix)
    a = np.zeros((n_angles * n_pix, n_pix * n_pix))
    for ai, theta in enumerate(projection_angles(n_angles)):
        for di, u in enumerate(offsets):
            idx, lengths = _ray_intersections(n_pix, float(theta), float(u))
            a[ai * n_pix + di, idx] = lengths
    return a


def disks_phantom(n_pix: int, seed: int | None = None) -> FloatArray:
    """Disks on a zero background, antialiased by supersampling.

    Without a seed the built-in layout is used; with a seed a random
    layout of three to six disks is drawn.
    """
    if seed is None:
        disks = DEFAULT_DISKS
    else:
        rng = np.random.default_rng(seed)
        count = int(rng.integers(3, 7))
        disks = tuple(
            (
                float(rng.uniform(-0.5, 0.5)),
                float(rng.uniform(-0.5, 0.5)),
                float(rng.uniform(0.05, 0.3)),
                float(rng.uniform(0.3, 1.0)),
            )
            for _ in range(count)
        )

    fine = n_pix * PHANTOM_SUPERSAMPLING
    coords = (np.arange(fine) + 0.5) / fine * 2.0 - 1.0
    xx, yy = np.meshgrid(coords, -coords)
    image = np.zeros((fine, fine))
    for cx, cy, radius, value in disks:
        image[(xx - cx) ** 2 + (yy - cy) ** 2 <= radius**2] = value
    return image.reshape(
        n_pix, PHANTOM_SUPERSAMPLING, n_pix, PHANTOM_SUPERSAMPLING
    ).mean(axis=(1, 3))


def tomography_problem(
    n_pix: int,
    n_angles: int,
    sigma_rel: float,
    seed: int | None = None,
    phantom: FloatArray | None = None,
) -> SyntheticProblem:
    """Parallel-beam system with one block per angle and ``sigma = sigma_rel*||b||``."""
    if sigma_rel < 0:
        raise InvalidConfigError(f"sigma_rel must be nonnegative, got {sigma_rel}")
    image = disks_phantom(n_pix, seed) if phantom is None else np.asarray(phantom, float)
    if image.shape != (n_pix, n_pix):
        raise InvalidConfigError(
            f"Phantom has shape {image.shape}, expected ({n_pix}, {n_pix})"
        )
    a = parallel_beam_matrix(n_pix, n_angles)
    xhat = image.reshape(-1).copy()
    b = a @ xhat
    total = resolve_sigma(b, None, sigma_rel)
    logger.info(
        "Tomography problem %dx%d (%d angles), sigma=%.4g", *a.shape, n_angles, total
    )
    return SyntheticProblem(
        matrix=partition(a, [n_pix] * n_angles),
        xhat=xhat,
        b_clean=b,
        noise=uniform_split(total, n_angles),
        image_shape=(n_pix, n_pix),
    )


def file_problem(
    matrix: FloatArray,
    rhs: FloatArray,
    block_sizes: list[int],
    *,
    sigma: float | None = None,
    sigma_rel: float | None = None,
    xhat: FloatArray | None = None,
) -> SyntheticProblem:
    """Problem from user data; ``xhat`` stays ``None`` when unknown."""
    try:
        mat = partition(matrix, block_sizes)
    except SizeMismatchError as e:
        raise InvalidConfigError(str(e)) from e
    b = np.asarray(rhs, dtype=np.float64).reshape(-1)
    total = resolve_sigma(b, sigma, sigma_rel)
    truth = None if xhat is None else np.asarray(xhat, float).reshape(-1)
    return SyntheticProblem(
        matrix=mat,
        xhat=truth,
        b_clean=b,
        noise=uniform_split(total, mat.n_blocks),
    )


def background_mask(xhat: FloatArray) -> NDArray[np.bool_]:
    """Pixels that are exactly zero in the ground truth."""
    return np.asarray(xhat) == 0.0
