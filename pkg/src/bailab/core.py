"""Shared primitives: arms, problem instances, truncation, run configuration."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from enum import IntEnum

from .errors import EqualMeansError, InvalidBoundsError, ValidationError


class Arm(IntEnum):
    """The two arms, valued 1 and 2 so state dumps read like the math."""

    ONE = 1
    TWO = 2

    @property
    def index(self) -> int:
        """Zero-based position for tuple/array lookups."""
        return self.value - 1

    def other(self) -> "Arm":
        return Arm.TWO if self is Arm.ONE else Arm.ONE


@dataclass(frozen=True)
class BanditInstance:
    """Two-armed problem: rewards for arm a are N(mu_a, var_a)."""

    mu1: float
    mu2: float
    var1: float
    var2: float

    def __post_init__(self) -> None:
        for name in ("mu1", "mu2", "var1", "var2"):
            if not math.isfinite(getattr(self, name)):
                raise ValidationError(f"{name} must be finite")
        if self.var1 <= 0.0 or self.var2 <= 0.0:
            raise ValidationError(
                f"variances must be positive, got ({self.var1}, {self.var2})"
            )

    @property
    def sigma1(self) -> float:
        return math.sqrt(self.var1)

    @property
    def sigma2(self) -> float:
        return math.sqrt(self.var2)

    def mean(self, arm: Arm) -> float:
        return self.mu1 if arm is Arm.ONE else self.mu2

    def sigma(self, arm: Arm) -> float:
        return self.sigma1 if arm is Arm.ONE else self.sigma2


def best_arm(instance: BanditInstance) -> Arm:
    """Arm with the strictly larger mean; equal means have no answer."""
    if instance.mu1 == instance.mu2:
        raise EqualMeansError(f"no unique best arm: both means equal {instance.mu1}")
    return Arm.ONE if instance.mu1 > instance.mu2 else Arm.TWO


def gap(instance: BanditInstance) -> float:
    """Signed mean difference mu1 - mu2."""
    return instance.mu1 - instance.mu2


def truncate(value: float, lower: float, upper: float) -> float:
    """Clamp value into [lower, upper]."""
    if lower > upper:
        raise InvalidBoundsError(f"empty truncation interval [{lower}, {upper}]")
    return min(max(value, lower), upper)


@dataclass(frozen=True)
class TruncationConstants:
    """Clamping constants for the nuisance estimates.

    Means are clamped into [-c_mu, c_mu]; estimated standard deviations into
    [sqrt(c_sigma2), 1/sqrt(c_sigma2)], so c_sigma2 <= 1 keeps the interval
    non-empty and the allocation probabilities strictly inside (0, 1).
    """

    c_mu: float = 100.0
    c_sigma2: float = 1e-4

    def __post_init__(self) -> None:
        if not (self.c_mu > 0.0 and math.isfinite(self.c_mu)):
            raise ValidationError(f"c_mu must be positive and finite, got {self.c_mu}")
        if not (0.0 < self.c_sigma2 <= 1.0):
            raise ValidationError(f"c_sigma2 must be in (0, 1], got {self.c_sigma2}")

    @property
    def sigma_lower(self) -> float:
        return math.sqrt(self.c_sigma2)

    @property
    def sigma_upper(self) -> float:
        return 1.0 / math.sqrt(self.c_sigma2)


def checkpoint_grid(horizon: int, step: int) -> tuple[int, ...]:
    """Multiples of `step` up to and including the horizon."""
    if step < 1:
        raise ValidationError(f"checkpoint step must be >= 1, got {step}")
    return tuple(range(step, horizon + 1, step))


@dataclass(frozen=True)
class ExperimentConfig:
    """Per-run knobs shared by every strategy and trial."""

    horizon: int = 10_000
    init_rounds: int = 2
    trunc: TruncationConstants = field(default_factory=TruncationConstants)
    checkpoints: tuple[int, ...] = ()
    master_seed: int = 0
    uniform_mixing: bool = False

    def __post_init__(self) -> None:
        if self.horizon < 2:
            raise ValidationError(f"horizon must be >= 2, got {self.horizon}")
        if self.init_rounds < 2 or self.init_rounds % 2 != 0:
            raise ValidationError(
                f"init_rounds must be even and >= 2, got {self.init_rounds}"
            )
        if self.init_rounds > self.horizon:
            raise ValidationError("init_rounds cannot exceed the horizon")
        cps = tuple(int(t) for t in self.checkpoints) or (self.horizon,)
        object.__setattr__(self, "checkpoints", cps)
        if any(b <= a for a, b in zip(cps, cps[1:])):
            raise ValidationError(f"checkpoints must be strictly ascending: {cps}")
        if cps[0] < self.init_rounds or cps[-1] > self.horizon:
            raise ValidationError(
                f"checkpoints must lie in [init_rounds, horizon], got {cps}"
            )


@dataclass(frozen=True)
class Observation:
    """One recorded round: which arm was drawn at time t and what it paid."""

    t: int
    arm: Arm
    reward: float

    def __post_init__(self) -> None:
        if self.t < 1:
            raise ValidationError(f"round index must be >= 1, got {self.t}")
