"""Sampling strategies: adaptive Neyman allocation plus fixed baselines.

Every strategy speaks the same three-call protocol, one round at a time:

    arm = strategy.next_arm(t, rng)   # draws exactly one uniform, used or not
    strategy.record(t, arm, reward)
    strategy.recommend(t)             # at checkpoints; reads state only

Rounds are strictly consecutive starting at 1. `recommend` answers for the
current round, so querying a checkpoint mid-run equals a fresh run stopped
there with the same per-round randomness.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum

from .core import Arm, BanditInstance, ExperimentConfig, truncate
from .errors import NoObservationsError, OutOfOrderError
from .estimators import (
    NuisanceEstimates,
    RunningArmStats,
    aipw_score,
    ipw_score,
    nuisance,
)


class StrategyKind(str, Enum):
    NA_AIPW = "na-aipw"
    NA_IPW = "na-ipw"
    NA_SA = "na-sa"
    ORACLE = "oracle"
    UNIFORM = "uniform"


@dataclass
class StrategyState:
    """Everything a strategy carries between rounds."""

    stats: tuple[RunningArmStats, RunningArmStats]
    nuisance_current: NuisanceEstimates
    aipw_sums: list[float] = field(default_factory=lambda: [0.0, 0.0])
    ipw_sums: list[float] = field(default_factory=lambda: [0.0, 0.0])
    round: int = 0


class Strategy:
    """Common round bookkeeping; subclasses choose arms and recommendations."""

    kind: StrategyKind

    def __init__(self, config: ExperimentConfig):
        self.config = config
        self.state = StrategyState(
            stats=(RunningArmStats(), RunningArmStats()),
            nuisance_current=self._initial_nuisance(),
        )
        self._prepared_round = 0

    def _initial_nuisance(self) -> NuisanceEstimates:
        lo = self.config.trunc.sigma_lower
        return NuisanceEstimates((0.0, 0.0), (lo, lo), (0.5, 0.5))

    # -- subclass hooks ----------------------------------------------------
    def _nuisance_for_round(self, t: int) -> NuisanceEstimates:
        return self.state.nuisance_current

    def _pick(self, t: int, u: float) -> Arm:
        raise NotImplementedError

    def _accumulate_scores(self, arm: Arm, reward: float) -> None:
        pass

    # -- protocol ----------------------------------------------------------
    def prepare_round(self, t: int) -> NuisanceEstimates:
        """Compute and cache the estimates round t will act on (no randomness)."""
        if t != self.state.round + 1:
            raise OutOfOrderError(
                f"prepare_round({t}) after round {self.state.round}; rounds are consecutive"
            )
        nu = self._nuisance_for_round(t)
        self.state.nuisance_current = nu
        self._prepared_round = t
        return nu

    def next_arm(self, t: int, rng) -> Arm:
        """Pick the arm for round t, always consuming one uniform from rng."""
        if self._prepared_round != t:
            self.prepare_round(t)
        u = rng.random()
        return self._pick(t, u)

    def record(self, t: int, arm: Arm, reward: float) -> None:
        if t != self.state.round + 1:
            raise OutOfOrderError(
                f"record({t}) after round {self.state.round}; rounds are consecutive"
            )
        if self._prepared_round != t:
            raise OutOfOrderError(f"record({t}) without preparing round {t} first")
        self._accumulate_scores(arm, reward)
        self.state.stats[arm.index].add(reward)
        self.state.round = t

    def recommend(self, t: int) -> Arm:
        if t != self.state.round:
            raise OutOfOrderError(
                f"recommend({t}) but the strategy has played {self.state.round} rounds"
            )
        return self._recommendation()

    def _recommendation(self) -> Arm:
        raise NotImplementedError

    def _recommend_by_means(self) -> Arm:
        s1, s2 = self.state.stats
        if s1.count == 0 or s2.count == 0:
            raise NoObservationsError("sample-mean recommendation needs both arms drawn")
        return Arm.ONE if s1.mean() >= s2.mean() else Arm.TWO


class _NeymanAllocation(Strategy):
    """Alternate through the first init_rounds, then draw arm 1 with
    probability sigma_hat1 / (sigma_hat1 + sigma_hat2) from truncated
    plug-in estimates of the previous rounds."""

    def _nuisance_for_round(self, t: int) -> NuisanceEstimates:
        cfg = self.config
        trunc = cfg.trunc
        if t <= cfg.init_rounds:
            s1, s2 = self.state.stats
            mu = (self._partial_mu(s1), self._partial_mu(s2))
            sd = (self._partial_sigma(s1), self._partial_sigma(s2))
            return NuisanceEstimates(mu, sd, (0.5, 0.5))
        nu = nuisance(*self.state.stats, trunc)
        if cfg.uniform_mixing:
            # alpha_t = 1/t of uniform exploration folded into the allocation
            a = 1.0 / t
            w1 = a * 0.5 + (1.0 - a) * nu.w_hat[0]
            nu = NuisanceEstimates(nu.mu_hat, nu.sigma_hat, (w1, 1.0 - w1))
        return nu

    def _partial_mu(self, stats: RunningArmStats) -> float:
        c = self.config.trunc.c_mu
        if stats.count == 0:
            return 0.0
        return truncate(stats.mean(), -c, c)

    def _partial_sigma(self, stats: RunningArmStats) -> float:
        trunc = self.config.trunc
        sd = stats.plugin_std() if stats.count else 0.0
        return truncate(sd, trunc.sigma_lower, trunc.sigma_upper)

    def _pick(self, t: int, u: float) -> Arm:
        if t <= self.config.init_rounds:
            return Arm.ONE if t % 2 == 1 else Arm.TWO
        return Arm.ONE if u < self.state.nuisance_current.w_hat[0] else Arm.TWO

    def _accumulate_scores(self, arm: Arm, reward: float) -> None:
        nu = self.state.nuisance_current
        st = self.state
        st.aipw_sums[0] += aipw_score(arm, reward, nu, Arm.ONE)
        st.aipw_sums[1] += aipw_score(arm, reward, nu, Arm.TWO)
        st.ipw_sums[arm.index] += ipw_score(arm, reward, nu, arm)


class NaAipwStrategy(_NeymanAllocation):
    """Neyman sampling; recommends the arm with the larger augmented score sum."""

    kind = StrategyKind.NA_AIPW

    def _recommendation(self) -> Arm:
        s = self.state.aipw_sums
        return Arm.ONE if s[0] >= s[1] else Arm.TWO


class NaIpwStrategy(_NeymanAllocation):
    """Neyman sampling; recommends by the plain inverse-propensity sums."""

    kind = StrategyKind.NA_IPW

    def _recommendation(self) -> Arm:
        s = self.state.ipw_sums
        return Arm.ONE if s[0] >= s[1] else Arm.TWO


class NaSaStrategy(_NeymanAllocation):
    """Neyman sampling; recommends by the raw sample means."""

    kind = StrategyKind.NA_SA

    def _recommendation(self) -> Arm:
        return self._recommend_by_means()


def _neyman_target_count(w1: float, t: int) -> int:
    """Arm-1 draws a deterministic Neyman schedule should own after t rounds.

    Rounds 1 and 2 alternate; afterwards round-half-to-even of w1*t, clamped
    so both arms always keep at least one draw. Increments are 0 or 1 per
    round, so tracking this count is a valid draw rule.
    """
    if t <= 2:
        return 1
    n = round(w1 * t)
    hi = t - 1
    return 1 if n < 1 else hi if n > hi else n


class OracleStrategy(Strategy):
    """Deterministic Neyman schedule from the true deviations; sample-mean
    recommendation. The uniform drawn each round is discarded."""

    kind = StrategyKind.ORACLE

    def __init__(self, config: ExperimentConfig, sigma1: float, sigma2: float):
        super().__init__(config)
        if sigma1 <= 0.0 or sigma2 <= 0.0:
            raise ValueError(f"sigmas must be positive, got ({sigma1}, {sigma2})")
        self.w1 = sigma1 / (sigma1 + sigma2)
        self.state.nuisance_current = NuisanceEstimates(
            (0.0, 0.0), (sigma1, sigma2), (self.w1, 1.0 - self.w1)
        )

    def _nuisance_for_round(self, t: int) -> NuisanceEstimates:
        return self.state.nuisance_current

    def _pick(self, t: int, u: float) -> Arm:
        behind = self.state.stats[0].count < _neyman_target_count(self.w1, t)
        return Arm.ONE if behind else Arm.TWO

    def _recommendation(self) -> Arm:
        return self._recommend_by_means()


class UniformStrategy(Strategy):
    """Strict alternation; sample-mean recommendation."""

    kind = StrategyKind.UNIFORM

    def _pick(self, t: int, u: float) -> Arm:
        return uniform_next_arm(t)

    def _recommendation(self) -> Arm:
        return self._recommend_by_means()


def uniform_next_arm(t: int) -> Arm:
    """Arm 1 on odd rounds, arm 2 on even rounds."""
    return Arm.ONE if t % 2 == 1 else Arm.TWO


def oracle_schedule(horizon: int, sigma1: float, sigma2: float) -> list[Arm]:
    """Full-budget draw plan: the arm-1 block first, sized by the target allocation.

    n1 = round-half-to-even(w1 * horizon), clamped to [1, horizon - 1] so both
    arms are drawn at least once.
    """
    if horizon < 2:
        raise ValueError(f"horizon must be >= 2, got {horizon}")
    if sigma1 <= 0.0 or sigma2 <= 0.0:
        raise ValueError(f"sigmas must be positive, got ({sigma1}, {sigma2})")
    w1 = sigma1 / (sigma1 + sigma2)
    n1 = min(max(round(w1 * horizon), 1), horizon - 1)
    return [Arm.ONE] * n1 + [Arm.TWO] * (horizon - n1)


def make_strategy(
    kind: StrategyKind | str,
    config: ExperimentConfig,
    instance: BanditInstance | None = None,
) -> Strategy:
    """Build a strategy by name; the oracle needs the true instance."""
    kind = StrategyKind(kind)
    if kind is StrategyKind.ORACLE:
        if instance is None:
            raise ValueError("the oracle strategy needs the true instance")
        return OracleStrategy(config, instance.sigma1, instance.sigma2)
    cls = {
        StrategyKind.NA_AIPW: NaAipwStrategy,
        StrategyKind.NA_IPW: NaIpwStrategy,
        StrategyKind.NA_SA: NaSaStrategy,
        StrategyKind.UNIFORM: UniformStrategy,
    }[kind]
    return cls(config)
