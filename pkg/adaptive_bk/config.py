"""Pydantic models describing experiments, problems and methods."""

from __future__ import annotations

from pathlib import Path
from typing import Annotated, Literal

from pydantic import BaseModel, ConfigDict, Field, model_validator

from adaptive_bk.stepsize import GAMMA_MAX


class _NoiseLevel(BaseModel):
    sigma: float | None = Field(default=None, ge=0, description="Absolute noise level")
    sigma_rel: float | None = Field(
        default=None, ge=0, description="Noise level relative to ||b||"
    )

    @model_validator(mode="after")
    def _exactly_one_noise_level(self) -> _NoiseLevel:
        if (self.sigma is None) == (self.sigma_rel is None):
            raise ValueError("give exactly one of sigma and sigma_rel")
        return self


class GaussianProblemSpec(_NoiseLevel):
    """Standard normal matrix with an s-sparse ground truth."""

    kind: Literal["gaussian"] = "gaussian"
    m: int = Field(default=2000, ge=1, description="Number of rows")
    n: int = Field(default=100, ge=1, description="Number of columns")
    s: int = Field(default=10, ge=0, description="Nonzeros in the ground truth")
    blocks: int = Field(default=200, ge=1, description="Number of row blocks M")

    @model_validator(mode="after")
    def _check_sizes(self) -> GaussianProblemSpec:
        if self.s > self.n:
            raise ValueError(f"s={self.s} exceeds n={self.n}")
        if self.m % self.blocks:
            raise ValueError(f"blocks={self.blocks} must divide m={self.m}")
        return self


class TomographyProblemSpec(BaseModel):
    """Parallel-beam tomography with one block per projection angle."""

    kind: Literal["tomography"] = "tomography"
    n_pix: int = Field(default=50, ge=8, description="Image side length in pixels")
    n_angles: int = Field(default=60, ge=2, description="Projection angles")
    sigma_rel: float = Field(default=0.1, ge=0, description="sigma / ||b||")
    phantom_path: Path | None = Field(
        default=None, description="Optional binary PGM phantom"
    )
    phantom_seed: int | None = Field(
        default=None, description="Seed for a random disks phantom"
    )


class FileProblemSpec(_NoiseLevel):
    """System read from MatrixMarket files."""

    kind: Literal["files"] = "files"
    matrix_path: Path
    rhs_path: Path
    block_sizes: list[int] = Field(min_length=1)
    solution_path: Path | None = None

    @model_validator(mode="after")
    def _positive_blocks(self) -> FileProblemSpec:
        if any(size < 1 for size in self.block_sizes):
            raise ValueError("block sizes must be positive")
        return self


ProblemSpec = Annotated[
    GaussianProblemSpec | TomographyProblemSpec | FileProblemSpec,
    Field(discriminator="kind"),
]


class ConstantScheduleSpec(BaseModel):
    kind: Literal["constant"] = "constant"
    eta: float = Field(default=1.0, gt=0, lt=2)


class AdaptiveScheduleSpec(BaseModel):
    kind: Literal["adaptive"] = "adaptive"
    gamma: float = Field(gt=0, description="Rate parameter, below 2")
    beta0: float | Literal["exact"] = Field(
        default="exact", description="Initial beta or 'exact' from the ground truth"
    )

    @model_validator(mode="after")
    def _check_values(self) -> AdaptiveScheduleSpec:
        if self.gamma >= GAMMA_MAX:
            raise ValueError(f"gamma must be below {GAMMA_MAX}, got {self.gamma}")
        if isinstance(self.beta0, float) and self.beta0 <= 0:
            raise ValueError("beta0 must be positive")
        return self


class PilotScheduleSpec(BaseModel):
    """Adaptive schedule with gamma and beta0 estimated from an eta=1 pilot."""

    kind: Literal["pilot"] = "pilot"
    n0: int | None = Field(default=None, ge=1, description="Window for gamma")
    n1: int | None = Field(default=None, ge=1, description="Tail window for beta0")
    stride: int = Field(default=1, ge=1, description="Pilot thinning stride")


ScheduleSpec = Annotated[
    ConstantScheduleSpec | AdaptiveScheduleSpec | PilotScheduleSpec,
    Field(discriminator="kind"),
]


class MethodSpec(BaseModel):
    model_config = ConfigDict(populate_by_name=True)

    name: str = Field(min_length=1)
    lam: float = Field(default=0.0, ge=0, alias="lambda", description="Sparsity weight")
    schedule: ScheduleSpec = Field(default_factory=ConstantScheduleSpec)

    @property
    def is_adaptive(self) -> bool:
        return isinstance(self.schedule, AdaptiveScheduleSpec)


class ExperimentConfig(BaseModel):
    """Everything ``abk experiment`` needs."""

    problem: ProblemSpec
    methods: list[MethodSpec] = Field(min_length=1)
    epochs: int = Field(default=50, ge=1, description="Iterations = epochs * M")
    trials: int = Field(default=1, ge=1)
    seed: int = Field(default=0, ge=0, description="Base seed")
    gamma_grid: list[float] | None = Field(
        default=None, description="Grid searched for adaptive methods"
    )
    record_stride: int | None = Field(
        default=None, ge=1, description="Record every K iterations (default M)"
    )
    output_dir: Path = Path("results")
    workers: int = Field(default=1, ge=1)

    @model_validator(mode="after")
    def _check_consistency(self) -> ExperimentConfig:
        names = [method.name for method in self.methods]
        if len(set(names)) != len(names):
            raise ValueError(f"method names must be unique: {names}")
        if self.gamma_grid is not None and any(g <= 0 for g in self.gamma_grid):
            raise ValueError("gamma_grid values must be positive")
        has_truth = not (
            isinstance(self.problem, FileProblemSpec)
            and self.problem.solution_path is None
        )
        for method in self.methods:
            schedule = method.schedule
            if (
                isinstance(schedule, AdaptiveScheduleSpec)
                and schedule.beta0 == "exact"
                and not has_truth
            ):
                raise ValueError(
                    f"method {method.name!r}: beta0 'exact' needs a ground truth"
                )
        return self


def standard_methods(
    gamma_rk: float = 0.05,
    gamma_rsk: float = 0.1,
    lam: float = 0.05,
    n0: int | None = 400,
    n1: int | None = 100,
) -> list[MethodSpec]:
    """The five standard methods: RK, RSK, aRK, aRSK, haRSK."""
    return [
        MethodSpec(name="RK", lam=0.0),
        MethodSpec(name="RSK", lam=lam),
        MethodSpec(name="aRK", lam=0.0, schedule=AdaptiveScheduleSpec(gamma=gamma_rk)),
        MethodSpec(
            name="aRSK", lam=lam, schedule=AdaptiveScheduleSpec(gamma=gamma_rsk)
        ),
        MethodSpec(name="haRSK", lam=lam, schedule=PilotScheduleSpec(n0=n0, n1=n1)),
    ]
