"""adaptive-bk: adaptive block Bregman-Kaczmarz solvers for noisy linear systems."""

from adaptive_bk.blocked_matrix import (
    BlockedMatrix,
    block_apply,
    block_apply_transpose,
    equal_blocks,
    partition,
    sample_block,
    spectral_norm,
)
from adaptive_bk.bounds import (
    BoundCurve,
    BoundParams,
    beta_bound,
    bound_curve,
    crude_v_bound,
    error_sq_bound,
    g_bound,
    lambert_w,
    lambert_w_exp,
    noiseless_envelope,
    v_recursion,
)
from adaptive_bk.config import (
    AdaptiveScheduleSpec,
    ConstantScheduleSpec,
    ExperimentConfig,
    FileProblemSpec,
    GaussianProblemSpec,
    MethodSpec,
    PilotScheduleSpec,
    TomographyProblemSpec,
    standard_methods,
)
from adaptive_bk.exceptions import (
    AbkError,
    BlockIndexError,
    ConfigError,
    ConfigLoadError,
    ConfigValidationError,
    DegenerateBlockError,
    DegenerateTraceError,
    InvalidConfigError,
    InvalidStateError,
    LambertDomainError,
    SizeMismatchError,
)
from adaptive_bk.harness import (
    ExperimentResult,
    MethodResult,
    TrialResult,
    build_problem,
    grid_search,
    pilot_then_adaptive,
    run_experiment,
    run_method_trials,
)
from adaptive_bk.heuristics import (
    HeuristicEstimate,
    PilotTrace,
    collect_pilot,
    estimate_beta0,
    estimate_gamma,
    estimate_hyperparameters,
)
from adaptive_bk.noise import NoiseModel, NoisyRhs, uniform_split
from adaptive_bk.objective import SparseObjective
from adaptive_bk.problems import (
    SyntheticProblem,
    gaussian_problem,
    tomography_problem,
)
from adaptive_bk.serialization import dump_yaml, load_config_document
from adaptive_bk.solver import (
    RunRecord,
    SolverState,
    StepInfo,
    descent_check,
    exact_beta0,
    init_state,
    run,
    step,
)
from adaptive_bk.stepsize import AdaptiveStepsize, ConstantStepsize, StepsizeSchedule
from adaptive_bk.validation import validate_and_fix, validate_config

__all__ = [
    # Exceptions
    "AbkError",
    "SizeMismatchError",
    "DegenerateBlockError",
    "BlockIndexError",
    "InvalidStateError",
    "LambertDomainError",
    "DegenerateTraceError",
    "ConfigError",
    "ConfigLoadError",
    "ConfigValidationError",
    "InvalidConfigError",
    # Blocked matrix
    "BlockedMatrix",
    "partition",
    "equal_blocks",
    "spectral_norm",
    "sample_block",
    "block_apply",
    "block_apply_transpose",
    # Objective and noise
    "SparseObjective",
    "NoiseModel",
    "NoisyRhs",
    "uniform_split",
    # Stepsizes
    "StepsizeSchedule",
    "ConstantStepsize",
    "AdaptiveStepsize",
    # Bounds
    "BoundParams",
    "BoundCurve",
    "lambert_w",
    "lambert_w_exp",
    "beta_bound",
    "g_bound",
    "error_sq_bound",
    "crude_v_bound",
    "v_recursion",
    "noiseless_envelope",
    "bound_curve",
    # Solver
    "SolverState",
    "StepInfo",
    "RunRecord",
    "init_state",
    "step",
    "run",
    "descent_check",
    "exact_beta0",
    # Heuristics
    "PilotTrace",
    "HeuristicEstimate",
    "collect_pilot",
    "estimate_gamma",
    "estimate_beta0",
    "estimate_hyperparameters",
    # Problems
    "SyntheticProblem",
    "gaussian_problem",
    "tomography_problem",
    # Configuration
    "ExperimentConfig",
    "GaussianProblemSpec",
    "TomographyProblemSpec",
    "FileProblemSpec",
    "MethodSpec",
    "ConstantScheduleSpec",
    "AdaptiveScheduleSpec",
    "PilotScheduleSpec",
    "standard_methods",
    "validate_config",
    "validate_and_fix",
    "load_config_document",
    "dump_yaml",
    # Harness
    "TrialResult",
    "MethodResult",
    "ExperimentResult",
    "build_problem",
    "run_method_trials",
    "grid_search",
    "pilot_then_adaptive",
    "run_experiment",
]
