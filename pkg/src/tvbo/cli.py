"""Command-line entry point.

Exit codes: 0 success, 1 configuration error, 2 runtime or numerical error.
"""

from __future__ import annotations

import argparse
import json
import logging
import sys
from pathlib import Path

import numpy as np

from .bench import config as cfg
from .bench.diagnostics import BoundConstants, evaluate_bound, stopping_time_histogram
from .bench.ingest import ingest_arms_csv
from .bench.output import emit_bound, emit_csv, emit_stopping_times
from .bench.runner import run_experiment

log = logging.getLogger("tvbo")

PRESET_NOTES = {
    "within-model-eps0.01": "2-D Markov-chain objective, eps=0.01, all four policies",
    "within-model-eps0.03": "2-D Markov-chain objective, eps=0.03, all four policies",
    "within-model-eps0.05": "2-D Markov-chain objective, eps=0.05, all four policies",
    "within-model-misspecified": "true eps=0.05, TV/R configured with eps=0.001",
    "sensitivity-eps0.01": "ET-GP-UCB over delta_B in {0.005,0.01,0.05,0.1,0.5}, eps=0.01",
    "sensitivity-eps0.03": "ET-GP-UCB over delta_B in {0.005,0.01,0.05,0.1,0.5}, eps=0.03",
    "sensitivity-eps0.05": "ET-GP-UCB over delta_B in {0.005,0.01,0.05,0.1,0.5}, eps=0.05",
    "sudden-change": "two independent GP draws switched at t=100, T=300",
    "mc-eps0": "static objective, T=200; trigger false-positive rate",
    "mc-eps0.03": "stopping-time Monte Carlo, eps=0.03, T=200",
    "mc-eps0.1": "stopping-time Monte Carlo, eps=0.1, T=200",
}


def _add_config_args(p: argparse.ArgumentParser, seeds: bool = True):
    src = p.add_mutually_exclusive_group(required=True)
    src.add_argument("--preset", help="built-in configuration name (see list-presets)")
    src.add_argument("--config", type=Path, help="TOML configuration file")
    p.add_argument("--set", dest="overrides", action="append", default=[], metavar="KEY=VALUE",
                   help="override a config value, e.g. objective.epsilon=0.05 or policies.0.delta_B=0.2")
    if seeds:
        p.add_argument("--seeds", help="seed list such as 0..49 or 1,2,3")
    p.add_argument("--jobs", type=int, default=1, help="worker processes (default 1)")
    p.add_argument("--out", type=Path, help="output directory (default: config 'output')")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="tvbo", description="Time-varying Bayesian optimization benchmarks")
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("run", help="run an experiment and write trace/summary CSVs")
    _add_config_args(p)
    p.add_argument("--policies", help="comma-separated subset of policy names to run")

    p = sub.add_parser("stopping-times", help="first-reset time Monte Carlo for ET-GP-UCB")
    _add_config_args(p, seeds=False)
    p.add_argument("--runs", type=int, default=1000, help="number of seeded runs (default 1000)")

    p = sub.add_parser("bound", help="evaluate the ET-GP-UCB regret bound along one run")
    _add_config_args(p, seeds=False)
    p.add_argument("--runs", type=int, default=200, help="runs used to estimate the mean stopping time")
    p.add_argument("--seed", type=int, default=0, help="seed of the run the bound is evaluated on")

    p = sub.add_parser("ingest-check", help="validate an arms-replay CSV and report its statistics")
    p.add_argument("--csv", type=Path, required=True)
    p.add_argument("--train", required=True, help="training days as START:STOP (half-open)")
    p.add_argument("--test", required=True, help="test days as START:STOP (half-open)")
    p.add_argument("--steps-per-day", type=int, default=1)
    p.add_argument("--out", type=Path, help="write covariance.csv and the normalized test matrix here")

    p = sub.add_parser("list-presets", help="list presets, or print one as TOML")
    p.add_argument("name", nargs="?")
    return parser


def _load(args) -> cfg.ExperimentConfig:
    config = cfg.preset(args.preset) if args.preset else cfg.load_config(args.config)
    overrides = list(args.overrides)
    if getattr(args, "seeds", None):
        overrides.append(f"seeds={cfg.parse_seeds(args.seeds)}")
    if args.out is not None:
        overrides.append(f"output={json.dumps(str(args.out))}")
    return cfg.apply_overrides(config, overrides) if overrides else config


def _echo_config(config, out: Path):
    out.mkdir(parents=True, exist_ok=True)
    (out / "config.toml").write_text(cfg.dumps(config), encoding="utf-8")


def _days(text: str) -> tuple[int, int]:
    try:
        lo, hi = text.split(":")
        return int(lo), int(hi)
    except ValueError:
        raise cfg.ConfigError(f"day range must look like START:STOP, got {text!r}") from None


def cmd_run(args) -> int:
    config = _load(args)
    only = [s.strip() for s in args.policies.split(",")] if args.policies else None
    out = Path(config.output)
    _echo_config(config, out)
    try:
        traces = run_experiment(config, jobs=args.jobs, only=only)
    except KeyError as exc:
        raise cfg.ConfigError(str(exc)) from None
    paths = emit_csv(traces, out)
    for name, path in paths.items():
        print(f"{name}: {path}")
    return 0


def cmd_stopping_times(args) -> int:
    config = _load(args)
    out = Path(config.output)
    _echo_config(config, out)
    result = stopping_time_histogram(config, n_runs=args.runs, jobs=args.jobs)
    paths = emit_stopping_times(result, out)
    print(f"eps={result.epsilon:g} runs={len(result.taus)} censored={int(result.censored.sum())} "
          f"mean={result.mean:.3f} median={result.median:g} "
          f"P(tau<tau_bar)={result.fraction_below_tau_bar:.3f}")
    for name, path in paths.items():
        print(f"{name}: {path}")
    return 0


def cmd_bound(args) -> int:
    config = _load(args)
    out = Path(config.output)
    _echo_config(config, out)
    st = stopping_time_histogram(config, n_runs=args.runs, jobs=args.jobs)
    b = config.bound
    constants = BoundConstants(
        sigma_n_sq=config.noise_var, tau_bar=st.tau_bar, delta=b.delta,
        a0=b.a0, b0=b.b0, a1=b.a1, b1=b.b1, L=b.L, L_f=b.L_f,
    )
    et = next(p.label for p in config.policies if p.kind == "et_gp_ucb")
    single = cfg.apply_overrides(config, [f"seeds=[{args.seed}]"])
    trace = run_experiment(single, only=[et])[0]
    path = emit_bound(evaluate_bound(config, constants, trace), out)
    print(f"tau_bar={st.tau_bar:.3f} (mean tau {st.mean:.3f} / {st.quantile_delta:g}); "
          "gamma is a realized-information-gain surrogate (lower)")
    print(f"bound: {path}")
    return 0


def cmd_ingest_check(args) -> int:
    data = ingest_arms_csv(args.csv, _days(args.train), _days(args.test), args.steps_per_day)
    eig = np.linalg.eigvalsh(data.covariance)
    print(f"arms={data.n_arms} train_steps={len(data.train)} test_steps={len(data.test)} "
          f"min_eigenvalue={eig.min():.3g} max_eigenvalue={eig.max():.3g}")
    if args.out is not None:
        args.out.mkdir(parents=True, exist_ok=True)
        np.savetxt(args.out / "covariance.csv", data.covariance, delimiter=",", fmt="%.9g")
        np.savetxt(args.out / "test_normalized.csv", data.test, delimiter=",", fmt="%.9g")
        print(f"covariance: {args.out / 'covariance.csv'}")
    return 0


def cmd_list_presets(args) -> int:
    if args.name:
        sys.stdout.write(cfg.dumps(cfg.preset(args.name)))
        return 0
    width = max(map(len, cfg.PRESETS))
    for name in cfg.PRESETS:
        print(f"{name:<{width}}  {PRESET_NOTES.get(name, '')}")
    return 0


COMMANDS = {
    "run": cmd_run,
    "stopping-times": cmd_stopping_times,
    "bound": cmd_bound,
    "ingest-check": cmd_ingest_check,
    "list-presets": cmd_list_presets,
}


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING, format="%(levelname)s %(message)s")
    try:
        return COMMANDS[args.command](args)
    except cfg.ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 1
    except Exception as exc:  # noqa: BLE001 - mapped to the runtime exit code
        log.debug("runtime failure", exc_info=True)
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
