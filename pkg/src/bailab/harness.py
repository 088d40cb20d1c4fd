"""Monte Carlo driver: instance sampling, single trials, grid aggregation."""

from __future__ import annotations

import math
import sys
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

import numpy as np
from numpy.random import Generator, Philox, SeedSequence

from . import _engine
from .core import Arm, BanditInstance, ExperimentConfig, Observation, gap
from .errors import ValidationError
from .estimators import aipw_score
from .strategies import NaAipwStrategy, StrategyKind, make_strategy
from .theory import aipw_variance, normalized_score

ALL_STRATEGIES = (
    StrategyKind.NA_AIPW,
    StrategyKind.NA_IPW,
    StrategyKind.NA_SA,
    StrategyKind.ORACLE,
    StrategyKind.UNIFORM,
)


@dataclass(frozen=True)
class ExperimentSpec:
    """Full grid for one table: means, variance pairs, strategies, trial count.

    `pair_values` says how to read each (lo, hi) pair: as variances (default)
    or as standard deviations.
    """

    mu1: float
    mu2_list: tuple[float, ...]
    variance_pairs: tuple[tuple[float, float], ...]
    strategies: tuple[StrategyKind, ...] = ALL_STRATEGIES
    trials: int = 1000
    config: ExperimentConfig = field(default_factory=ExperimentConfig)
    setting_id: str = "custom"
    pair_values: str = "variance"

    def __post_init__(self) -> None:
        object.__setattr__(self, "mu2_list", tuple(float(m) for m in self.mu2_list))
        object.__setattr__(
            self,
            "variance_pairs",
            tuple((float(a), float(b)) for a, b in self.variance_pairs),
        )
        object.__setattr__(
            self, "strategies", tuple(StrategyKind(s) for s in self.strategies)
        )
        if self.trials < 1:
            raise ValidationError(f"trials must be >= 1, got {self.trials}")
        if not self.mu2_list:
            raise ValidationError("mu2 list must not be empty")
        if self.mu1 in self.mu2_list:
            raise ValidationError(f"mu1={self.mu1} appears in the mu2 list: no gap")
        if not self.variance_pairs:
            raise ValidationError("variance pair list must not be empty")
        for pair in self.variance_pairs:
            if not all(math.isfinite(v) and v > 0.0 for v in pair):
                raise ValidationError(f"pair values must be positive, got {pair}")
        if not self.strategies:
            raise ValidationError("at least one strategy is required")
        if len(set(self.strategies)) != len(self.strategies):
            raise ValidationError("duplicate strategies in the list")
        if self.pair_values not in ("variance", "stddev"):
            raise ValidationError(
                f"pair_values must be 'variance' or 'stddev', got {self.pair_values!r}"
            )


@dataclass(frozen=True)
class Cell:
    """One (mu2, pair) grid point; index is its position in row-major order."""

    index: int
    mu1: float
    mu2: float
    pair: tuple[float, float]


def cells(spec: ExperimentSpec) -> tuple[Cell, ...]:
    out = []
    for i_mu, mu2 in enumerate(spec.mu2_list):
        for i_pair, pair in enumerate(spec.variance_pairs):
            out.append(Cell(i_mu * len(spec.variance_pairs) + i_pair, spec.mu1, mu2, pair))
    return tuple(out)


def trial_seed(master_seed: int, cell_index: int, trial_index: int) -> SeedSequence:
    """Counter-based split: the trial's stream is a pure function of the triple."""
    return SeedSequence((master_seed, cell_index, trial_index))


def _as_seed_sequence(seed) -> SeedSequence:
    return seed if isinstance(seed, SeedSequence) else SeedSequence(seed)


def sample_instance(
    cell: Cell, rng: Generator, pair_values: str = "variance"
) -> BanditInstance:
    """Flip which arm gets the low value; the coin is consumed even when the
    pair is symmetric, to keep streams aligned."""
    lo, hi = cell.pair
    a, b = (lo, hi) if rng.random() < 0.5 else (hi, lo)
    if pair_values == "stddev":
        a, b = a * a, b * b
    return BanditInstance(cell.mu1, cell.mu2, a, b)


@dataclass(frozen=True)
class TrialResult:
    """Checkpoint recommendations and draw counts for every strategy of one trial."""

    recommendations: dict[StrategyKind, tuple[Arm, ...]]
    arm_draw_counts: dict[StrategyKind, tuple[int, int]]
    observations: dict[StrategyKind, tuple[Observation, ...]] | None = None


def run_trial(
    instance: BanditInstance,
    strategies,
    config: ExperimentConfig,
    seed,
    record_observations: bool = False,
) -> TrialResult:
    """Reference single-trial path; fully deterministic given the seed.

    The vectorized engine must reproduce this exactly, so rewards are
    pre-drawn as per-round pairs (arm 1 block, then arm 2 block) and each
    strategy consumes its own uniform substream.
    """
    root = _as_seed_sequence(seed)
    T = config.horizon
    env = Generator(Philox(_engine.substream(root, _engine.ENV_SLOT)))
    y = np.empty((2, T))
    y[0] = instance.mu1 + instance.sigma1 * env.standard_normal(T)
    y[1] = instance.mu2 + instance.sigma2 * env.standard_normal(T)

    kinds = tuple(StrategyKind(k) for k in strategies)
    strats = {k: make_strategy(k, config, instance) for k in kinds}
    rngs = {
        k: Generator(Philox(_engine.substream(root, _engine.STRATEGY_SLOT[k.value])))
        for k in kinds
    }
    cp_set = set(config.checkpoints)
    recs: dict[StrategyKind, list[Arm]] = {k: [] for k in kinds}
    obs: dict[StrategyKind, list[Observation]] | None = (
        {k: [] for k in kinds} if record_observations else None
    )
    for t in range(1, T + 1):
        for k in kinds:
            s = strats[k]
            arm = s.next_arm(t, rngs[k])
            reward = y[arm.index, t - 1]
            s.record(t, arm, reward)
            if obs is not None:
                obs[k].append(Observation(t, arm, reward))
        if t in cp_set:
            for k in kinds:
                recs[k].append(strats[k].recommend(t))
    return TrialResult(
        recommendations={k: tuple(v) for k, v in recs.items()},
        arm_draw_counts={
            k: (strats[k].state.stats[0].count, strats[k].state.stats[1].count)
            for k in kinds
        },
        observations={k: tuple(v) for k, v in obs.items()} if obs is not None else None,
    )


@dataclass(frozen=True)
class AggregateResult:
    """Error counts for one (cell, strategy) across all trials."""

    setting_id: str
    mu1: float
    mu2: float
    pair: tuple[float, float]
    strategy: StrategyKind
    trials: int
    checkpoints: tuple[int, ...]
    error_counts: tuple[int, ...]

    @property
    def p_error(self) -> tuple[float, ...]:
        return tuple(e / self.trials for e in self.error_counts)


def _chunk_bounds(trials: int, horizon: int) -> list[tuple[int, int]]:
    # fixed chunking: a pure function of the experiment, never the worker count
    size = max(32, min(1024, 4_000_000 // max(horizon, 1)))
    return [(lo, min(lo + size, trials)) for lo in range(0, trials, size)]


def _cell_tasks(spec: ExperimentSpec, cell: Cell) -> list[_engine.ChunkTask]:
    cfg = spec.config
    return [
        _engine.ChunkTask(
            master_seed=cfg.master_seed,
            cell_index=cell.index,
            mu1=cell.mu1,
            mu2=cell.mu2,
            pair=cell.pair,
            pair_values=spec.pair_values,
            strategies=tuple(k.value for k in spec.strategies),
            horizon=cfg.horizon,
            init_rounds=cfg.init_rounds,
            c_mu=cfg.trunc.c_mu,
            c_sigma2=cfg.trunc.c_sigma2,
            uniform_mixing=cfg.uniform_mixing,
            checkpoints=cfg.checkpoints,
            trial_lo=lo,
            trial_hi=hi,
        )
        for lo, hi in _chunk_bounds(spec.trials, cfg.horizon)
    ]


def run_experiment(
    spec: ExperimentSpec, workers: int = 1, progress: bool = False
) -> list[AggregateResult]:
    """Run the whole grid and aggregate per-checkpoint error counts.

    Byte-identical output for any worker count: chunking is fixed, every
    chunk's randomness is keyed by (master_seed, cell, trial), and merging
    only adds integer counts.
    """
    if workers < 1:
        raise ValidationError(f"workers must be >= 1, got {workers}")
    cell_list = cells(spec)
    cfg = spec.config
    n_cp = len(cfg.checkpoints)
    totals: dict[tuple[int, str], np.ndarray] = {
        (c.index, k.value): np.zeros(n_cp, dtype=np.int64)
        for c in cell_list
        for k in spec.strategies
    }

    tasks: list[_engine.ChunkTask] = []
    for cell in cell_list:
        tasks.extend(_cell_tasks(spec, cell))

    def _absorb(out: _engine.ChunkResult) -> None:
        for name, errs in out.errors.items():
            totals[(out.cell_index, name)] += errs

    if workers == 1:
        done_cells = 0
        for i, task in enumerate(tasks):
            _absorb(_engine.run_chunk(task))
            cell_done = i + 1 == len(tasks) or tasks[i + 1].cell_index != task.cell_index
            if progress and cell_done:
                done_cells += 1
                print(f"cell {done_cells}/{len(cell_list)}", file=sys.stderr, flush=True)
    else:
        remaining = {c.index: 0 for c in cell_list}
        for task in tasks:
            remaining[task.cell_index] += 1
        done_cells = 0
        with ProcessPoolExecutor(max_workers=workers) as pool:
            for out in pool.map(_engine.run_chunk, tasks, chunksize=1):
                _absorb(out)
                remaining[out.cell_index] -= 1
                if progress and remaining[out.cell_index] == 0:
                    done_cells += 1
                    print(
                        f"cell {done_cells}/{len(cell_list)}",
                        file=sys.stderr,
                        flush=True,
                    )

    results = []
    for cell in cell_list:
        for kind in spec.strategies:
            results.append(
                AggregateResult(
                    setting_id=spec.setting_id,
                    mu1=cell.mu1,
                    mu2=cell.mu2,
                    pair=cell.pair,
                    strategy=kind,
                    trials=spec.trials,
                    checkpoints=cfg.checkpoints,
                    error_counts=tuple(
                        int(e) for e in totals[(cell.index, kind.value)]
                    ),
                )
            )
    return results


def empirical_rate(p_error: float, horizon: int) -> float:
    """-log(p)/T; +inf when p is 0 (no errors observed at this checkpoint)."""
    if not 0.0 <= p_error <= 1.0:
        raise ValidationError(f"p_error must be in [0, 1], got {p_error}")
    if horizon < 1:
        raise ValidationError(f"horizon must be >= 1, got {horizon}")
    if p_error == 0.0:
        return math.inf
    return 0.0 - math.log(p_error) / horizon


@dataclass(frozen=True)
class MdsReport:
    """Empirical moments of the normalized score differences of one long run."""

    mean: float
    second_moment: float
    rounds: int


def mds_diagnostic(
    instance: BanditInstance, config: ExperimentConfig, n_rounds: int, seed
) -> MdsReport:
    """Run the adaptive strategy once and average the normalized scores.

    The score differences form a martingale difference sequence under the
    allocation, so their mean should sit near 0 and their second moment near 1
    once the allocation settles. Averages cover rounds t > init_rounds.
    """
    if n_rounds < 1000:
        raise ValidationError(f"the diagnostic needs >= 1000 rounds, got {n_rounds}")
    delta = gap(instance)
    v = aipw_variance(instance.sigma1, instance.sigma2)
    root = _as_seed_sequence(seed)
    env = Generator(Philox(_engine.substream(root, _engine.ENV_SLOT)))
    y1 = instance.mu1 + instance.sigma1 * env.standard_normal(n_rounds)
    y2 = instance.mu2 + instance.sigma2 * env.standard_normal(n_rounds)
    rng = Generator(
        Philox(_engine.substream(root, _engine.STRATEGY_SLOT[StrategyKind.NA_AIPW.value]))
    )
    strat = NaAipwStrategy(config)
    acc = 0.0
    acc_sq = 0.0
    used = 0
    init = config.init_rounds
    for t in range(1, n_rounds + 1):
        arm = strat.next_arm(t, rng)
        reward = y1[t - 1] if arm is Arm.ONE else y2[t - 1]
        strat.record(t, arm, reward)
        if t > init:
            nu = strat.state.nuisance_current
            z = normalized_score(
                aipw_score(arm, reward, nu, Arm.ONE),
                aipw_score(arm, reward, nu, Arm.TWO),
                delta,
                v,
            )
            acc += z
            acc_sq += z * z
            used += 1
    return MdsReport(acc / used, acc_sq / used, used)
