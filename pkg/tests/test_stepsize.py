"""Tests for the constant and adaptive stepsize schedules."""

import numpy as np
import pytest

from adaptive_bk.exceptions import InvalidConfigError
from adaptive_bk.stepsize import AdaptiveStepsize, ConstantStepsize


class TestConstantStepsize:
    def test_returns_eta(self):
        schedule = ConstantStepsize(0.7)
        assert schedule.next_eta() == 0.7
        assert schedule.advance() == 0.7
        assert schedule.beta is None

    @pytest.mark.parametrize("eta", [0.0, 2.0, -1.0, 3.0])
    def test_out_of_range(self, eta):
        with pytest.raises(InvalidConfigError):
            ConstantStepsize(eta)


class TestAdaptiveStepsize:
    def test_first_step(self):
        schedule = AdaptiveStepsize(gamma=0.1, beta0=1000.0)
        eta = schedule.advance()
        assert eta == pytest.approx(100.0 / 101.0)
        assert schedule.beta == pytest.approx(1000.0 * (1 - 0.05 * eta))
        assert schedule.k == 1

    def test_next_eta_does_not_advance(self):
        schedule = AdaptiveStepsize(gamma=0.5, beta0=2.0)
        assert schedule.next_eta() == schedule.next_eta()
        assert schedule.beta == 2.0

    def test_invariants_over_long_run(self):
        schedule = AdaptiveStepsize(gamma=0.1, beta0=1e5)
        etas, betas = [], [schedule.beta]
        for _ in range(20_000):
            etas.append(schedule.advance())
            betas.append(schedule.beta)
        etas_arr, betas_arr = np.array(etas), np.array(betas)
        assert np.all((etas_arr > 0) & (etas_arr < 1))
        assert np.all(np.diff(etas_arr) <= 0)
        assert np.all(betas_arr > 0)
        assert np.all(np.diff(betas_arr) < 0)
        assert etas_arr[0] > 0.99

    def test_eta_decays_like_two_over_gamma_k(self):
        gamma = 0.2
        schedule = AdaptiveStepsize(gamma=gamma, beta0=1e3)
        for _ in range(100_000):
            schedule.advance()
        assert schedule.next_eta() * gamma * schedule.k / 2 == pytest.approx(1.0, rel=0.05)

    @pytest.mark.parametrize("gamma", [0.0, 2.0, -0.5, 2.5])
    def test_gamma_range(self, gamma):
        with pytest.raises(InvalidConfigError, match="gamma"):
            AdaptiveStepsize(gamma=gamma, beta0=1.0)

    @pytest.mark.parametrize("beta0", [0.0, -1.0, float("inf"), float("nan")])
    def test_beta0_range(self, beta0):
        with pytest.raises(InvalidConfigError, match="beta0"):
            AdaptiveStepsize(gamma=0.1, beta0=beta0)

