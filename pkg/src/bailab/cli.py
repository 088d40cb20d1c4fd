"""Command line front end: run grids to CSV, print bounds, run the diagnostic.

Exit codes: 0 success, 1 usage or input error, 2 runtime failure.
"""

from __future__ import annotations

import argparse
import math
import sys
from dataclasses import dataclass
from importlib import resources
from pathlib import Path

try:
    import tomllib
except ImportError:  # Python 3.10
    import tomli as tomllib

from . import __version__
from .core import ExperimentConfig, TruncationConstants, checkpoint_grid
from .errors import BailabError, ParseError, ValidationError
from .harness import (
    ALL_STRATEGIES,
    AggregateResult,
    ExperimentSpec,
    MdsReport,
    empirical_rate,
    mds_diagnostic,
    run_experiment,
)
from .core import BanditInstance
from .strategies import StrategyKind
from .theory import lower_bound_rate, oracle_exact_error, rate_report

GENERATOR_NAME = "philox-ziggurat"

CSV_HEADER = (
    "setting_id,strategy,mu1,mu2,var_pair,T,trials,errors,"
    "p_error,rate_empirical,rate_lower_bound"
)

_SPEC_DEFAULTS = {
    "strategies": [k.value for k in ALL_STRATEGIES],
    "trials": 1000,
    "horizon": 10_000,
    "checkpoint_step": 100,
    "init_rounds": 2,
    "c_mu": 100.0,
    "c_sigma2": 1e-4,
    "pair_values": "variance",
    "uniform_mixing": False,
}
_REQUIRED_KEYS = ("mu1", "mu2", "variance_pairs")
_KNOWN_KEYS = set(_SPEC_DEFAULTS) | set(_REQUIRED_KEYS) | {"setting_id"}

BUNDLED_SETTINGS = ("setting1", "setting2", "setting3")


def resolve_spec_path(name_or_path: str) -> Path:
    """An existing file wins; otherwise bundled setting names are accepted."""
    p = Path(name_or_path)
    if p.is_file():
        return p
    stem = p.name.removesuffix(".spec")
    if stem in BUNDLED_SETTINGS and len(p.parts) == 1:
        bundle = resources.files("bailab") / "settings" / f"{stem}.spec"
        with resources.as_file(bundle) as real:
            return Path(str(real))
    raise ParseError(f"spec file not found: {name_or_path}")


def _expect(value, types, field: str):
    if isinstance(value, bool) and bool not in types:
        raise ValidationError(f"field {field!r}: expected a number, got a boolean")
    if not isinstance(value, types):
        names = "/".join(t.__name__ for t in types)
        raise ValidationError(f"field {field!r}: expected {names}, got {type(value).__name__}")
    return value


def parse_spec(path: str | Path) -> ExperimentSpec:
    """Read a TOML grid description; unknown keys and bad values are errors."""
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as e:
        raise ParseError(f"cannot read spec file {path}: {e}") from e
    try:
        raw = tomllib.loads(text)
    except tomllib.TOMLDecodeError as e:
        raise ParseError(f"{path}: {e}") from e

    unknown = sorted(set(raw) - _KNOWN_KEYS)
    if unknown:
        raise ParseError(f"{path}: unknown field(s): {', '.join(unknown)}")
    missing = [k for k in _REQUIRED_KEYS if k not in raw]
    if missing:
        raise ValidationError(f"{path}: missing required field(s): {', '.join(missing)}")

    merged = dict(_SPEC_DEFAULTS)
    merged.update(raw)

    mu1 = float(_expect(merged["mu1"], (int, float), "mu1"))
    mu2_raw = _expect(merged["mu2"], (list,), "mu2")
    mu2 = tuple(float(_expect(m, (int, float), "mu2")) for m in mu2_raw)
    pairs_raw = _expect(merged["variance_pairs"], (list,), "variance_pairs")
    pairs = []
    for entry in pairs_raw:
        entry = _expect(entry, (list,), "variance_pairs")
        if len(entry) != 2:
            raise ValidationError(
                f"field 'variance_pairs': each pair needs exactly 2 values, got {entry}"
            )
        pairs.append(tuple(float(_expect(v, (int, float), "variance_pairs")) for v in entry))
    strategies = tuple(
        _expect(s, (str,), "strategies") for s in _expect(merged["strategies"], (list,), "strategies")
    )
    for s in strategies:
        if s not in StrategyKind._value2member_map_:
            raise ValidationError(
                f"field 'strategies': unknown strategy {s!r}; "
                f"known: {', '.join(k.value for k in StrategyKind)}"
            )
    trials = int(_expect(merged["trials"], (int,), "trials"))
    horizon = int(_expect(merged["horizon"], (int,), "horizon"))
    step = int(_expect(merged["checkpoint_step"], (int,), "checkpoint_step"))
    init_rounds = int(_expect(merged["init_rounds"], (int,), "init_rounds"))
    c_mu = float(_expect(merged["c_mu"], (int, float), "c_mu"))
    c_sigma2 = float(_expect(merged["c_sigma2"], (int, float), "c_sigma2"))
    pair_values = _expect(merged["pair_values"], (str,), "pair_values")
    mixing = _expect(merged["uniform_mixing"], (bool,), "uniform_mixing")
    setting_id = _expect(merged.get("setting_id", path.stem), (str,), "setting_id")

    try:
        config = ExperimentConfig(
            horizon=horizon,
            init_rounds=init_rounds,
            trunc=TruncationConstants(c_mu=c_mu, c_sigma2=c_sigma2),
            checkpoints=checkpoint_grid(horizon, step),
            uniform_mixing=mixing,
        )
        return ExperimentSpec(
            mu1=mu1,
            mu2_list=mu2,
            variance_pairs=tuple(pairs),
            strategies=strategies,
            trials=trials,
            config=config,
            setting_id=setting_id,
            pair_values=pair_values,
        )
    except ValidationError as e:
        raise ValidationError(f"{path}: {e}") from e


def _fmt(x: float) -> str:
    """Shortest 17-significant-digit form; round-trips exactly."""
    return f"{x:.17g}"


def write_csv(out, spec: ExperimentSpec, results: list[AggregateResult]) -> None:
    out.write(
        f"# bailab {__version__} seed={spec.config.master_seed} "
        f"generator={GENERATOR_NAME}\n"
    )
    out.write(CSV_HEADER + "\n")
    for res in results:
        lo, hi = res.pair
        if spec.pair_values == "variance":
            s1, s2 = math.sqrt(lo), math.sqrt(hi)
        else:
            s1, s2 = lo, hi
        rate_lb = lower_bound_rate(res.mu1 - res.mu2, s1, s2)
        var_pair = f"{_fmt(lo)}:{_fmt(hi)}"
        for t, errors in zip(res.checkpoints, res.error_counts):
            p = errors / res.trials
            rate_emp = "" if errors == 0 else _fmt(empirical_rate(p, t))
            out.write(
                f"{res.setting_id},{res.strategy.value},{_fmt(res.mu1)},"
                f"{_fmt(res.mu2)},{var_pair},{t},{res.trials},{errors},"
                f"{_fmt(p)},{rate_emp},{_fmt(rate_lb)}\n"
            )


def cmd_run(args) -> int:
    spec = parse_spec(resolve_spec_path(args.spec))
    cfg = spec.config
    horizon = args.horizon if args.horizon is not None else cfg.horizon
    if args.checkpoint_step is not None:
        step = args.checkpoint_step
    else:
        # the first checkpoint is the spec file's step; keep it when only
        # the horizon shrinks
        step = min(cfg.checkpoints[0], horizon)
    config = ExperimentConfig(
        horizon=horizon,
        init_rounds=cfg.init_rounds,
        trunc=cfg.trunc,
        checkpoints=checkpoint_grid(horizon, step),
        master_seed=args.seed,
        uniform_mixing=cfg.uniform_mixing,
    )
    spec = ExperimentSpec(
        mu1=spec.mu1,
        mu2_list=spec.mu2_list,
        variance_pairs=spec.variance_pairs,
        strategies=spec.strategies,
        trials=args.trials if args.trials is not None else spec.trials,
        config=config,
        setting_id=spec.setting_id,
        pair_values=spec.pair_values,
    )
    results = run_experiment(spec, workers=args.workers, progress=True)
    if args.out == "-":
        write_csv(sys.stdout, spec, results)
    else:
        with open(args.out, "w") as f:
            write_csv(f, spec, results)
        print(f"wrote {args.out}", file=sys.stderr)
    return 0


def cmd_bounds(args) -> int:
    instance = BanditInstance(args.mu1, args.mu2, args.var1, args.var2)
    if args.mu1 == args.mu2:
        raise ValidationError("equal means: the gap is zero, no bounds to report")
    rep = rate_report(args.mu1, args.mu2, instance.sigma1, instance.sigma2)
    print(f"gap (arm1 - arm2):   {_fmt(rep.delta)}")
    print(f"target allocation:   w1={_fmt(rep.w1)} w2={_fmt(rep.w2)}")
    print(f"aipw variance:       {_fmt(rep.v_aipw)}")
    print(f"lower-bound rate:    {_fmt(rep.rate_lower_bound)}")
    print(f"ipw variance:        {_fmt(rep.v_ipw)}")
    print(f"ipw rate:            {_fmt(rep.rate_ipw)}")
    if args.horizon is not None:
        err = oracle_exact_error(
            abs(rep.delta), instance.sigma1, instance.sigma2, args.horizon
        )
        print(f"oracle error at T={args.horizon}: {_fmt(err)}")
    return 0


def cmd_diagnose(args) -> int:
    if args.rounds < 1000:
        raise ValidationError(f"rounds must be >= 1000, got {args.rounds}")
    instance = BanditInstance(args.mu1, args.mu2, args.var1, args.var2)
    if args.mu1 == args.mu2:
        raise ValidationError("equal means: the diagnostic needs a nonzero gap")
    report = mds_diagnostic(instance, ExperimentConfig(), args.rounds, args.seed)
    # thresholds match a 4-sigma Monte Carlo band, floored at the defaults
    # calibrated for 1e5 rounds
    mean_tol = max(0.02, 4.0 / math.sqrt(report.rounds))
    sm_tol = max(0.07, 6.0 / math.sqrt(report.rounds))
    mean_ok = abs(report.mean) <= mean_tol
    sm_ok = abs(report.second_moment - 1.0) <= sm_tol
    print(f"rounds averaged:     {report.rounds}")
    print(
        f"score mean:          {_fmt(report.mean)} "
        f"(tolerance +-{mean_tol:g}) {'PASS' if mean_ok else 'FAIL'}"
    )
    print(
        f"score second moment: {_fmt(report.second_moment)} "
        f"(tolerance [{1 - sm_tol:g}, {1 + sm_tol:g}]) {'PASS' if sm_ok else 'FAIL'}"
    )
    return 0


class _Parser(argparse.ArgumentParser):
    """argparse exits 2 on bad usage; the contract here is 1."""

    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(1, f"{self.prog}: error: {message}\n")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(
        prog="bailab",
        description="Fixed-budget best-arm identification laboratory "
        "for two-armed Gaussian bandits.",
    )
    parser.add_argument("--version", action="version", version=f"bailab {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    run = sub.add_parser("run", help="run a grid and write a CSV table")
    run.add_argument("spec", help="spec file path or a bundled name (setting1/2/3)")
    run.add_argument("--seed", type=int, default=0, help="master seed (default 0)")
    run.add_argument("--workers", type=int, default=1, help="worker processes")
    run.add_argument("--out", default="-", help="output CSV path ('-' for stdout)")
    run.add_argument("--trials", type=int, default=None, help="override trial count")
    run.add_argument("--horizon", type=int, default=None, help="override horizon T")
    run.add_argument(
        "--checkpoint-step", type=int, default=None, help="override checkpoint spacing"
    )
    run.set_defaults(func=cmd_run)

    bounds = sub.add_parser("bounds", help="print allocations and error exponents")
    bounds.add_argument("mu1", type=float)
    bounds.add_argument("mu2", type=float)
    bounds.add_argument("var1", type=float)
    bounds.add_argument("var2", type=float)
    bounds.add_argument(
        "--horizon", type=int, default=None, help="also print the oracle error at T"
    )
    bounds.set_defaults(func=cmd_bounds)

    diag = sub.add_parser("diagnose", help="check the normalized score moments")
    diag.add_argument("mu1", type=float)
    diag.add_argument("mu2", type=float)
    diag.add_argument("var1", type=float)
    diag.add_argument("var2", type=float)
    diag.add_argument("rounds", type=int)
    diag.add_argument("seed", type=int)
    diag.set_defaults(func=cmd_diagnose)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (BailabError, ValueError) as e:
        print(f"bailab: error: {e}", file=sys.stderr)
        return 1
    except OSError as e:
        print(f"bailab: runtime failure: {e}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
