"""Fixed-budget best-arm identification laboratory for two-armed Gaussian bandits."""

__version__ = "0.1.0"

from .core import (
    Arm,
    BanditInstance,
    ExperimentConfig,
    Observation,
    TruncationConstants,
    best_arm,
    checkpoint_grid,
    gap,
    truncate,
)
from .errors import (
    BailabError,
    EqualMeansError,
    InvalidBoundsError,
    NoObservationsError,
    NonPositiveSigmaError,
    NonPositiveVarianceError,
    OutOfOrderError,
    ParseError,
    ValidationError,
)
from .estimators import NuisanceEstimates, RunningArmStats, aipw_score, ipw_score, nuisance
from .harness import (
    ALL_STRATEGIES,
    AggregateResult,
    Cell,
    ExperimentSpec,
    MdsReport,
    TrialResult,
    cells,
    empirical_rate,
    mds_diagnostic,
    run_experiment,
    run_trial,
    sample_instance,
    trial_seed,
)
from .strategies import (
    NaAipwStrategy,
    NaIpwStrategy,
    NaSaStrategy,
    OracleStrategy,
    Strategy,
    StrategyKind,
    UniformStrategy,
    make_strategy,
    oracle_schedule,
    uniform_next_arm,
)
from .theory import (
    RateReport,
    aipw_variance,
    ipw_rate,
    ipw_variance,
    lower_bound_rate,
    normal_cdf,
    normalized_score,
    oracle_exact_error,
    rate_report,
    target_allocation,
)

__all__ = [
    "__version__",
    "Arm",
    "BanditInstance",
    "ExperimentConfig",
    "Observation",
    "TruncationConstants",
    "best_arm",
    "checkpoint_grid",
    "gap",
    "truncate",
    "BailabError",
    "EqualMeansError",
    "InvalidBoundsError",
    "NoObservationsError",
    "NonPositiveSigmaError",
    "NonPositiveVarianceError",
    "OutOfOrderError",
    "ParseError",
    "ValidationError",
    "NuisanceEstimates",
    "RunningArmStats",
    "aipw_score",
    "ipw_score",
    "nuisance",
    "ALL_STRATEGIES",
    "AggregateResult",
    "Cell",
    "ExperimentSpec",
    "MdsReport",
    "TrialResult",
    "cells",
    "empirical_rate",
    "mds_diagnostic",
    "run_experiment",
    "run_trial",
    "sample_instance",
    "trial_seed",
    "NaAipwStrategy",
    "NaIpwStrategy",
    "NaSaStrategy",
    "OracleStrategy",
    "Strategy",
    "StrategyKind",
    "UniformStrategy",
    "make_strategy",
    "oracle_schedule",
    "uniform_next_arm",
    "RateReport",
    "aipw_variance",
    "ipw_rate",
    "ipw_variance",
    "lower_bound_rate",
    "normal_cdf",
    "normalized_score",
    "oracle_exact_error",
    "rate_report",
    "target_allocation",
]
