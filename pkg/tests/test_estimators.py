import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from bailab.core import Arm, TruncationConstants
from bailab.errors import NoObservationsError
from bailab.estimators import (
    NuisanceEstimates,
    RunningArmStats,
    aipw_score,
    ipw_score,
    nuisance,
)

TRUNC = TruncationConstants()


def stats_from(count, total, total_sq):
    s = RunningArmStats()
    s.count, s.sum, s.sum_sq = count, total, total_sq
    return s


class TestRunningArmStats:
    def test_single_observation(self):
        s = RunningArmStats().add(2.0)
        assert (s.count, s.sum, s.sum_sq) == (1, 2.0, 4.0)

    def test_zero_reward(self):
        s = RunningArmStats().add(2.0).add(0.0)
        assert (s.count, s.sum, s.sum_sq) == (2, 2.0, 4.0)

    def test_negative_reward(self):
        s = RunningArmStats().add(2.0).add(0.0).add(-2.0)
        assert (s.count, s.sum, s.sum_sq) == (3, 0.0, 8.0)

    def test_mean_average(self):
        assert stats_from(2, 3.0, 9.0).mean() == 1.5

    def test_mean_single(self):
        assert stats_from(1, -4.0, 16.0).mean() == -4.0

    def test_mean_empty(self):
        with pytest.raises(NoObservationsError):
            RunningArmStats().mean()

    def test_plugin_std_symmetric_pair(self):
        s = RunningArmStats().add(1.0).add(-1.0)
        assert s.plugin_std() == 1.0

    def test_plugin_std_single_sample_is_zero(self):
        assert RunningArmStats().add(5.0).plugin_std() == 0.0

    def test_plugin_std_hand_computed(self):
        # rewards 0,2,0,2: second moment 2, mean 1, sqrt(2-1)=1
        s = RunningArmStats().add(0.0).add(2.0).add(0.0).add(2.0)
        assert s.plugin_std() == 1.0

    def test_plugin_std_negative_variance_clamped(self):
        # crafted so sum_sq/count - mean^2 is a tiny negative float
        s = stats_from(3, 3.0000000000000004, 3.0000000000000004)
        assert s.plugin_std() == 0.0

    def test_plugin_std_converges(self):
        rng = np.random.default_rng(7)
        s = RunningArmStats()
        for y in 0.3 + 2.5 * rng.standard_normal(200_000):
            s.add(float(y))
        assert s.plugin_std() == pytest.approx(2.5, rel=0.01)


class TestNuisance:
    def test_symmetric(self):
        a = RunningArmStats().add(1.0).add(-1.0)
        b = RunningArmStats().add(2.0).add(0.0)
        nu = nuisance(a, b, TRUNC)
        assert nu.w_hat == (0.5, 0.5)

    def test_one_three(self):
        a = RunningArmStats().add(1.0).add(-1.0)  # std 1
        b = RunningArmStats().add(3.0).add(-3.0)  # std 3
        nu = nuisance(a, b, TRUNC)
        assert nu.w_hat[0] == pytest.approx(0.25)
        assert nu.w_hat[1] == pytest.approx(0.75)

    def test_zero_std_truncated_up(self):
        a = RunningArmStats().add(5.0)  # single sample, plug-in std 0
        b = RunningArmStats().add(3.0).add(-3.0)
        nu = nuisance(a, b, TRUNC)
        assert nu.sigma_hat[0] == pytest.approx(0.01)
        assert nu.w_hat[0] == pytest.approx(0.01 / (0.01 + 3.0))

    def test_mu_truncated(self):
        a = RunningArmStats().add(1e6)
        b = RunningArmStats().add(0.0)
        nu = nuisance(a, b, TRUNC)
        assert nu.mu_hat[0] == 100.0

    def test_requires_observations(self):
        with pytest.raises(NoObservationsError):
            nuisance(RunningArmStats(), RunningArmStats().add(1.0), TRUNC)

    @given(
        st.lists(st.floats(-50, 50), min_size=1, max_size=6),
        st.lists(st.floats(-50, 50), min_size=1, max_size=6),
    )
    def test_weights_sum_to_one_and_bounded(self, ys1, ys2):
        a, b = RunningArmStats(), RunningArmStats()
        for y in ys1:
            a.add(y)
        for y in ys2:
            b.add(y)
        nu = nuisance(a, b, TRUNC)
        assert nu.w_hat[0] + nu.w_hat[1] == 1.0
        lo, hi = TRUNC.sigma_lower, TRUNC.sigma_upper
        w_min = lo / (lo + hi)
        assert w_min <= nu.w_hat[0] <= 1.0 - w_min
        assert abs(nu.mu_hat[0]) <= TRUNC.c_mu
        assert lo <= nu.sigma_hat[0] <= hi
        assert lo <= nu.sigma_hat[1] <= hi


NU = NuisanceEstimates(mu_hat=(1.0, 0.7), sigma_hat=(1.0, 1.0), w_hat=(0.5, 0.5))


class TestScores:
    def test_aipw_drawn_target(self):
        assert aipw_score(Arm.ONE, 2.0, NU, Arm.ONE) == 3.0

    def test_aipw_other_target_is_mu_hat(self):
        assert aipw_score(Arm.ONE, 2.0, NU, Arm.TWO) == 0.7

    def test_aipw_zero_residual(self):
        assert aipw_score(Arm.TWO, 0.7, NU, Arm.TWO) == 0.7

    def test_ipw_drawn_target(self):
        assert ipw_score(Arm.ONE, 2.0, NU, Arm.ONE) == 4.0

    def test_ipw_other_target_zero(self):
        assert ipw_score(Arm.ONE, 2.0, NU, Arm.TWO) == 0.0

    def test_ipw_zero_reward(self):
        assert ipw_score(Arm.TWO, 0.0, NU, Arm.TWO) == 0.0

    def test_conditional_unbiasedness_monte_carlo(self):
        # Given fixed nuisances, E[score] over (draw, reward) equals mu_a for
        # AIPW and w-weighted reward mean for IPW; 1e6 draws pin it to ~4 sd.
        rng = np.random.default_rng(123)
        n = 1_000_000
        mu = (1.0, 0.8)
        sigma = (1.0, 2.0)
        nu = NuisanceEstimates((0.4, 1.3), (1.0, 2.0), (1.0 / 3.0, 2.0 / 3.0))
        drew1 = rng.random(n) < nu.w_hat[0]
        y1 = mu[0] + sigma[0] * rng.standard_normal(n)
        y2 = mu[1] + sigma[1] * rng.standard_normal(n)
        aipw1 = np.where(drew1, (y1 - nu.mu_hat[0]) / nu.w_hat[0] + nu.mu_hat[0], nu.mu_hat[0])
        aipw2 = np.where(~drew1, (y2 - nu.mu_hat[1]) / nu.w_hat[1] + nu.mu_hat[1], nu.mu_hat[1])
        ipw1 = np.where(drew1, y1 / nu.w_hat[0], 0.0)
        assert aipw1.mean() == pytest.approx(mu[0], abs=4 * aipw1.std() / math.sqrt(n))
        assert aipw2.mean() == pytest.approx(mu[1], abs=4 * aipw2.std() / math.sqrt(n))
        assert ipw1.mean() == pytest.approx(mu[0], abs=4 * ipw1.std() / math.sqrt(n))

    def test_scores_match_scalar_formula(self):
        nu = NuisanceEstimates((0.2, -0.3), (1.0, 2.0), (0.25, 0.75))
        y = 1.7
        assert aipw_score(Arm.TWO, y, nu, Arm.TWO) == (y - (-0.3)) / 0.75 + (-0.3)
        assert ipw_score(Arm.TWO, y, nu, Arm.TWO) == y / 0.75
