"""Running per-arm moments and the score functions built on them."""

from __future__ import annotations

import math
from dataclasses import dataclass

from .core import Arm, TruncationConstants, truncate
from .errors import NoObservationsError


@dataclass(slots=True)
class RunningArmStats:
    """Count, sum, and sum of squares of the rewards seen for one arm."""

    count: int = 0
    sum: float = 0.0
    sum_sq: float = 0.0

    def add(self, reward: float) -> "RunningArmStats":
        self.count += 1
        self.sum += reward
        self.sum_sq += reward * reward
        return self

    def mean(self) -> float:
        """Sample mean of the rewards recorded so far."""
        if self.count == 0:
            raise NoObservationsError("mean of an arm with no observations")
        return self.sum / self.count

    def second_moment(self) -> float:
        if self.count == 0:
            raise NoObservationsError("second moment of an arm with no observations")
        return self.sum_sq / self.count

    def plugin_std(self) -> float:
        """Plug-in standard deviation sqrt(second_moment - mean^2), floored at 0.

        Divides by count (not count - 1); a single observation gives 0.
        """
        m = self.mean()
        v = self.sum_sq / self.count - m * m
        if v < 0.0:  # rounding can push the difference slightly negative
            v = 0.0
        return math.sqrt(v)


@dataclass(frozen=True)
class NuisanceEstimates:
    """Truncated means, truncated deviations, and allocation probabilities.

    Tuples are indexed by Arm.index. w_hat always sums to exactly 1.
    """

    mu_hat: tuple[float, float]
    sigma_hat: tuple[float, float]
    w_hat: tuple[float, float]


def nuisance(
    stats1: RunningArmStats,
    stats2: RunningArmStats,
    trunc: TruncationConstants,
) -> NuisanceEstimates:
    """Estimates a strategy acts on at the start of a round.

    Both arms must have been observed at least once. The allocation draws
    arm 1 with probability sigma_hat1 / (sigma_hat1 + sigma_hat2).
    """
    if stats1.count == 0 or stats2.count == 0:
        raise NoObservationsError("nuisance estimates need at least one draw per arm")
    lo, hi = trunc.sigma_lower, trunc.sigma_upper
    sd1 = truncate(stats1.plugin_std(), lo, hi)
    sd2 = truncate(stats2.plugin_std(), lo, hi)
    w1 = sd1 / (sd1 + sd2)
    mu1 = truncate(stats1.mean(), -trunc.c_mu, trunc.c_mu)
    mu2 = truncate(stats2.mean(), -trunc.c_mu, trunc.c_mu)
    return NuisanceEstimates((mu1, mu2), (sd1, sd2), (w1, 1.0 - w1))


def aipw_score(arm_drawn: Arm, reward: float, nu: NuisanceEstimates, target: Arm) -> float:
    """Augmented inverse-propensity score for `target` at one round.

    (reward - mu_hat)/w_hat + mu_hat when the target arm was the one drawn,
    plain mu_hat otherwise; conditionally unbiased for the target mean.
    """
    m = nu.mu_hat[target.index]
    if arm_drawn is target:
        return (reward - m) / nu.w_hat[target.index] + m
    return m


def ipw_score(arm_drawn: Arm, reward: float, nu: NuisanceEstimates, target: Arm) -> float:
    """Plain inverse-propensity score: reward/w_hat if drawn, else 0."""
    if arm_drawn is target:
        return reward / nu.w_hat[target.index]
    return 0.0
