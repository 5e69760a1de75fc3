import numpy as np
import pytest

from adaptive_bk.blocked_matrix import BlockedMatrix, partition
from adaptive_bk.problems import SyntheticProblem, gaussian_problem


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


@pytest.fixture
def small_matrix() -> BlockedMatrix:
    a = np.random.default_rng(5).standard_normal((12, 5))
    return partition(a, [3, 3, 3, 3])


@pytest.fixture
def small_problem() -> SyntheticProblem:
    """60 x 20 Gaussian system, 12 blocks, mild noise."""
    return gaussian_problem(60, 20, 4, 12, sigma=0.05, seed=7)


@pytest.fixture
def noiseless_problem() -> SyntheticProblem:
    return gaussian_problem(60, 20, 4, 12, sigma=0.0, seed=3)


@pytest.fixture
def tiny_config_data(tmp_path):
    """Experiment config that runs in well under a second."""
    return {
        "problem": {"kind": "gaussian", "m": 40, "n": 10, "s": 3, "blocks": 8, "sigma": 0.05},
        "methods": [
            {"name": "RSK", "lambda": 0.05},
            {
                "name": "aRSK",
                "lambda": 0.05,
                "schedule": {"kind": "adaptive", "gamma": 0.1},
            },
            {
                "name": "haRSK",
                "lambda": 0.05,
                "schedule": {"kind": "pilot", "n0": 10, "n1": 5},
            },
        ],
        "epochs": 5,
        "trials": 2,
        "seed": 11,
        "output_dir": str(tmp_path / "results"),
    }
