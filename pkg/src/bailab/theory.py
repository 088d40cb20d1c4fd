"""Closed-form allocations, error exponents, and the fixed-allocation error curve."""

from __future__ import annotations

import math
from dataclasses import dataclass

from .errors import NonPositiveSigmaError, NonPositiveVarianceError, ValidationError

_SQRT2 = math.sqrt(2.0)


def normal_cdf(x: float) -> float:
    """Standard normal CDF via erfc, accurate deep into both tails."""
    return 0.5 * math.erfc(-x / _SQRT2)


def _check_sigmas(sigma1: float, sigma2: float) -> None:
    if sigma1 <= 0.0 or sigma2 <= 0.0:
        raise NonPositiveSigmaError(
            f"standard deviations must be positive, got ({sigma1}, {sigma2})"
        )


def target_allocation(sigma1: float, sigma2: float) -> tuple[float, float]:
    """Draw probabilities proportional to the standard deviations."""
    _check_sigmas(sigma1, sigma2)
    w1 = sigma1 / (sigma1 + sigma2)
    return w1, 1.0 - w1


def aipw_variance(sigma1: float, sigma2: float) -> float:
    """sigma1^2/w1 + sigma2^2/w2 at the target allocation: (sigma1 + sigma2)^2."""
    _check_sigmas(sigma1, sigma2)
    return (sigma1 + sigma2) ** 2


def lower_bound_rate(delta: float, sigma1: float, sigma2: float) -> float:
    """Largest exponent any strategy can put on the misidentification probability.

    delta^2 / (2 (sigma1 + sigma2)^2); the sign of the gap is irrelevant.
    """
    return delta * delta / (2.0 * aipw_variance(sigma1, sigma2))


def ipw_variance(mu1: float, mu2: float, sigma1: float, sigma2: float) -> float:
    """(sigma1 + sigma2) (zeta1/sigma1 + zeta2/sigma2) with zeta_a = mu_a^2 + sigma_a^2.

    The variance of the inverse-propensity mean difference at the target
    allocation; never below (sigma1 + sigma2)^2, with equality only at
    mu1 = mu2 = 0.
    """
    _check_sigmas(sigma1, sigma2)
    zeta1 = mu1 * mu1 + sigma1 * sigma1
    zeta2 = mu2 * mu2 + sigma2 * sigma2
    return (sigma1 + sigma2) * (zeta1 / sigma1 + zeta2 / sigma2)


def ipw_rate(mu1: float, mu2: float, sigma1: float, sigma2: float) -> float:
    """Error exponent of the inverse-propensity strategy: delta^2 / (2 V_ipw)."""
    delta = mu1 - mu2
    return delta * delta / (2.0 * ipw_variance(mu1, mu2, sigma1, sigma2))


def normalized_score(psi1: float, psi2: float, delta: float, v: float) -> float:
    """(psi1 - psi2 - delta) / sqrt(v): centered, scaled score difference."""
    if v <= 0.0:
        raise NonPositiveVarianceError(f"normalizing variance must be positive, got {v}")
    return (psi1 - psi2 - delta) / math.sqrt(v)


def oracle_exact_error(delta: float, sigma1: float, sigma2: float, horizon: int) -> float:
    """Misidentification probability of the fixed target allocation.

    Phi(-delta sqrt(T) / (sigma1 + sigma2)): exact for Gaussian rewards at the
    ideal allocation, ignoring the +-1 round rounding of the arm counts.
    """
    _check_sigmas(sigma1, sigma2)
    if delta <= 0.0:
        raise ValidationError(f"gap must be positive, got {delta}")
    if horizon < 1:
        raise ValidationError(f"horizon must be >= 1, got {horizon}")
    return normal_cdf(-delta * math.sqrt(horizon) / (sigma1 + sigma2))


@dataclass(frozen=True)
class RateReport:
    """Everything cmd_bounds prints for one instance."""

    delta: float
    w1: float
    w2: float
    v_aipw: float
    v_ipw: float
    rate_lower_bound: float
    rate_ipw: float
    zeta1: float
    zeta2: float


def rate_report(mu1: float, mu2: float, sigma1: float, sigma2: float) -> RateReport:
    delta = mu1 - mu2
    w1, w2 = target_allocation(sigma1, sigma2)
    return RateReport(
        delta=delta,
        w1=w1,
        w2=w2,
        v_aipw=aipw_variance(sigma1, sigma2),
        v_ipw=ipw_variance(mu1, mu2, sigma1, sigma2),
        rate_lower_bound=lower_bound_rate(delta, sigma1, sigma2),
        rate_ipw=ipw_rate(mu1, mu2, sigma1, sigma2),
        zeta1=mu1 * mu1 + sigma1 * sigma1,
        zeta2=mu2 * mu2 + sigma2 * sigma2,
    )
