"""Trial-vectorized execution of one chunk of a grid cell.

run_experiment feeds chunks of trials through this module instead of looping
over strategy objects; a unit test holds it to exact agreement with the
reference path in harness.run_trial. All randomness comes from per-trial
Philox substreams keyed by (master_seed, cell_index, trial_index), so results
never depend on chunking or worker scheduling.

Arrays are round-major: shape (horizon, n_trials), one contiguous row per round.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from numpy.random import Generator, Philox, SeedSequence

# Fixed per-trial substream slots. A strategy's stream must never depend on
# which other strategies are in the run.
INSTANCE_SLOT = 0
ENV_SLOT = 1
STRATEGY_SLOT = {
    "na-aipw": 2,
    "na-ipw": 3,
    "na-sa": 4,
    "oracle": 5,
    "uniform": 6,
}
_NEYMAN_KINDS = ("na-aipw", "na-ipw", "na-sa")


def substream(seed_seq: SeedSequence, slot: int) -> SeedSequence:
    """Deterministic child stream; pure, unlike SeedSequence.spawn."""
    return SeedSequence(entropy=seed_seq.entropy, spawn_key=(*seed_seq.spawn_key, slot))


@dataclass(frozen=True)
class ChunkTask:
    """Everything a worker needs for trials [trial_lo, trial_hi) of one cell."""

    master_seed: int
    cell_index: int
    mu1: float
    mu2: float
    pair: tuple[float, float]
    pair_values: str
    strategies: tuple[str, ...]
    horizon: int
    init_rounds: int
    c_mu: float
    c_sigma2: float
    uniform_mixing: bool
    checkpoints: tuple[int, ...]
    trial_lo: int
    trial_hi: int


@dataclass
class ChunkResult:
    """Per-strategy error counts by checkpoint; details only in debug mode."""

    cell_index: int
    trial_lo: int
    trials: int
    errors: dict[str, np.ndarray]
    recommendations: dict[str, np.ndarray] | None = None
    draw_counts: dict[str, np.ndarray] | None = None


def run_chunk(task: ChunkTask, return_details: bool = False) -> ChunkResult:
    n = task.trial_hi - task.trial_lo
    T = task.horizon
    lo_val, hi_val = task.pair

    var1 = np.empty(n)
    var2 = np.empty(n)
    y1 = np.empty((T, n))
    y2 = np.empty((T, n))
    roots = [
        SeedSequence((task.master_seed, task.cell_index, i))
        for i in range(task.trial_lo, task.trial_hi)
    ]
    for j, root in enumerate(roots):
        inst_rng = Generator(Philox(substream(root, INSTANCE_SLOT)))
        a, b = (lo_val, hi_val) if inst_rng.random() < 0.5 else (hi_val, lo_val)
        if task.pair_values == "stddev":
            a, b = a * a, b * b
        var1[j] = a
        var2[j] = b
        env = Generator(Philox(substream(root, ENV_SLOT)))
        s1 = math.sqrt(a)
        s2 = math.sqrt(b)
        y1[:, j] = task.mu1 + s1 * env.standard_normal(T)
        y2[:, j] = task.mu2 + s2 * env.standard_normal(T)

    best_is_one = task.mu1 > task.mu2
    result = ChunkResult(task.cell_index, task.trial_lo, n, errors={})
    if return_details:
        result.recommendations = {}
        result.draw_counts = {}
    for name in task.strategies:
        if name in _NEYMAN_KINDS:
            u = np.empty((T, n))
            for j, root in enumerate(roots):
                gen = Generator(Philox(substream(root, STRATEGY_SLOT[name])))
                u[:, j] = gen.random(T)
            rec1, counts = _run_neyman(task, y1, y2, u, name)
            del u
        elif name == "oracle":
            rec1, counts = _run_oracle(task, y1, y2, var1, var2)
        elif name == "uniform":
            rec1, counts = _run_uniform(task, y1, y2)
        else:
            raise ValueError(f"unknown strategy {name!r}")
        result.errors[name] = (rec1 != best_is_one).sum(axis=1).astype(np.int64)
        if return_details:
            result.recommendations[name] = rec1
            result.draw_counts[name] = counts
    return result


def _run_neyman(
    task: ChunkTask, y1: np.ndarray, y2: np.ndarray, u: np.ndarray, mode: str
) -> tuple[np.ndarray, np.ndarray]:
    """One pass of the adaptive allocation across all trials of the chunk.

    Mirrors the reference strategy arithmetic operation for operation so that
    results agree exactly, not just statistically.
    """
    T, n = y1.shape
    s_lo = math.sqrt(task.c_sigma2)
    s_hi = 1.0 / math.sqrt(task.c_sigma2)
    c_mu = task.c_mu
    init = task.init_rounds

    cnt1 = np.zeros(n)
    cnt2 = np.zeros(n)
    sum1 = np.zeros(n)
    sum2 = np.zeros(n)
    ssq1 = np.zeros(n)
    ssq2 = np.zeros(n)
    need_aipw = mode == "na-aipw"
    need_ipw = mode == "na-ipw"
    if need_aipw:
        aipw1 = np.zeros(n)
        aipw2 = np.zeros(n)
    if need_ipw:
        ipw1 = np.zeros(n)
        ipw2 = np.zeros(n)

    cp_col = {t: k for k, t in enumerate(task.checkpoints)}
    rec1 = np.empty((len(task.checkpoints), n), dtype=bool)

    for t in range(1, T + 1):
        yy1 = y1[t - 1]
        yy2 = y2[t - 1]
        if t <= init:
            mu1h = np.clip(sum1 / np.maximum(cnt1, 1.0), -c_mu, c_mu)
            mu2h = np.clip(sum2 / np.maximum(cnt2, 1.0), -c_mu, c_mu)
            w1: float | np.ndarray = 0.5
            w2: float | np.ndarray = 0.5
            draw = np.full(n, t % 2 == 1)
        else:
            m1 = sum1 / cnt1
            m2 = sum2 / cnt2
            v1 = ssq1 / cnt1 - m1 * m1
            v1 = np.where(v1 < 0.0, 0.0, v1)
            sd1 = np.sqrt(v1)
            sd1 = np.where(sd1 < s_lo, s_lo, sd1)
            sd1 = np.where(sd1 > s_hi, s_hi, sd1)
            v2 = ssq2 / cnt2 - m2 * m2
            v2 = np.where(v2 < 0.0, 0.0, v2)
            sd2 = np.sqrt(v2)
            sd2 = np.where(sd2 < s_lo, s_lo, sd2)
            sd2 = np.where(sd2 > s_hi, s_hi, sd2)
            w1 = sd1 / (sd1 + sd2)
            if task.uniform_mixing:
                a = 1.0 / t
                w1 = a * 0.5 + (1.0 - a) * w1
            w2 = 1.0 - w1
            mu1h = np.clip(m1, -c_mu, c_mu)
            mu2h = np.clip(m2, -c_mu, c_mu)
            draw = u[t - 1] < w1
        nod = ~draw
        if need_aipw:
            aipw1 += np.where(draw, (yy1 - mu1h) / w1 + mu1h, mu1h)
            aipw2 += np.where(nod, (yy2 - mu2h) / w2 + mu2h, mu2h)
        if need_ipw:
            ipw1 += np.where(draw, yy1 / w1, 0.0)
            ipw2 += np.where(nod, yy2 / w2, 0.0)
        cnt1 += draw
        cnt2 += nod
        sum1 += np.where(draw, yy1, 0.0)
        sum2 += np.where(nod, yy2, 0.0)
        ssq1 += np.where(draw, yy1 * yy1, 0.0)
        ssq2 += np.where(nod, yy2 * yy2, 0.0)
        k = cp_col.get(t)
        if k is not None:
            if need_aipw:
                rec1[k] = aipw1 >= aipw2
            elif need_ipw:
                rec1[k] = ipw1 >= ipw2
            else:
                rec1[k] = (sum1 / cnt1) >= (sum2 / cnt2)
    return rec1, np.stack([cnt1, cnt2])


def _neyman_targets(w1: np.ndarray, T: int) -> np.ndarray:
    """(T, n) matrix of deterministic arm-1 draw targets after each round."""
    t = np.arange(1.0, T + 1.0)[:, None]
    tgt = np.rint(w1[None, :] * t)
    upper = np.maximum(t - 1.0, 1.0)  # forces rounds 1 and 2 to alternate
    np.clip(tgt, 1.0, upper, out=tgt)
    return tgt


def _run_oracle(
    task: ChunkTask,
    y1: np.ndarray,
    y2: np.ndarray,
    var1: np.ndarray,
    var2: np.ndarray,
) -> tuple[np.ndarray, np.ndarray]:
    T, n = y1.shape
    s1 = np.sqrt(var1)
    s2 = np.sqrt(var2)
    tgt = _neyman_targets(s1 / (s1 + s2), T)
    drew1 = np.diff(tgt, axis=0, prepend=0.0) > 0.5
    return _recommend_by_means(task, y1, y2, drew1, tgt)


def _run_uniform(
    task: ChunkTask, y1: np.ndarray, y2: np.ndarray
) -> tuple[np.ndarray, np.ndarray]:
    T, n = y1.shape
    t = np.arange(1.0, T + 1.0)[:, None]
    drew1 = np.broadcast_to(np.arange(1, T + 1)[:, None] % 2 == 1, (T, n))
    counts1 = np.broadcast_to(np.ceil(t / 2.0), (T, n))
    return _recommend_by_means(task, y1, y2, drew1, counts1)


def _recommend_by_means(
    task: ChunkTask,
    y1: np.ndarray,
    y2: np.ndarray,
    drew1: np.ndarray,
    counts1: np.ndarray,
) -> tuple[np.ndarray, np.ndarray]:
    """Sample-mean recommendations at the checkpoints for a deterministic
    draw matrix; cumulative sums reproduce incremental accumulation exactly."""
    T, n = y1.shape
    cum1 = np.cumsum(np.where(drew1, y1, 0.0), axis=0)
    cum2 = np.cumsum(np.where(drew1, 0.0, y2), axis=0)
    cp = np.asarray(task.checkpoints, dtype=np.int64) - 1
    t_cp = np.asarray(task.checkpoints, dtype=np.float64)[:, None]
    c1 = counts1[cp]
    rec1 = (cum1[cp] / c1) >= (cum2[cp] / (t_cp - c1))
    counts = np.stack([counts1[-1], T - counts1[-1]])
    return rec1, counts
