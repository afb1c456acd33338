"""Command-line surface: run one scenario, sweep a batch, or build the
no-solution comparison table across all three strategies.

Exit codes: 0 success, 2 configuration/validation error, 3 fatal
simulation error.
"""

from __future__ import annotations

import argparse
import sys
from dataclasses import replace
from pathlib import Path

from .barriers import CbfParams
from .config import RunConfig, load_config, resolve_scenario
from .constraints import StrategyKind
from .engine import make_circle_scenario, run_batch, run_scenario
from .errors import FatalSimulationError, SwarmCbfError, ValidationError
from .export import (export_feasible_bounds, export_report_csv, export_trace,
                     format_report_markdown)

EXIT_OK = 0
EXIT_VALIDATION = 2
EXIT_FATAL = 3

TABLE_GAMMAS = [0.5, 1.0, 5.0]


def _load(args) -> RunConfig:
    if args.config:
        config = load_config(Path(args.config).read_text())
    else:
        config = RunConfig(scenario=args.scenario or "circle_20")
    if args.strategy:
        config = replace(config, strategy=StrategyKind(args.strategy))
    if args.gamma is not None:
        if not args.gamma > 0:
            raise ValidationError(f"gamma must be positive, got {args.gamma}")
        config = replace(config, gamma=args.gamma)
    if args.seed is not None:
        config = replace(config, seed=args.seed)
    if getattr(args, "trials", None) is not None:
        if args.trials < 1:
            raise ValidationError(f"trials must be >= 1, got {args.trials}")
        config = replace(config, trials=args.trials)
    if args.out:
        config = replace(config, out=args.out)
    return config


def cmd_run(args) -> int:
    config = _load(args)
    scenario = resolve_scenario(config)
    out = Path(config.out)
    out.mkdir(parents=True, exist_ok=True)
    trace = run_scenario(scenario)
    stem = f"{scenario.name}_{scenario.strategy.value}"
    if config.emit_trace:
        export_trace(trace, out / f"{stem}_trace.csv")
    if config.emit_bounds and scenario.dim == 1:
        export_feasible_bounds(trace, 1, out / f"{stem}_bounds.csv")
    print(f"{stem}: {len(trace.records)} steps, "
          f"{trace.no_solution_steps} no-solution steps, "
          f"first at t={trace.first_infeasible_time}")
    return EXIT_OK


def cmd_batch(args) -> int:
    config = _load(args)
    scenario = resolve_scenario(config)
    gammas = [config.gamma] if config.gamma is not None else TABLE_GAMMAS
    report = run_batch(scenario, config.trials, gammas)
    out = Path(config.out)
    out.mkdir(parents=True, exist_ok=True)
    if config.emit_report:
        export_report_csv([report], out / f"batch_{scenario.strategy.value}.csv")
    for g in report.gammas:
        print(f"strategy={scenario.strategy.value} gamma={g}: "
              f"{report.no_solution_trials[g]}/{report.trials} no-solution trials")
    return EXIT_OK


def cmd_table3(args) -> int:
    trials = args.trials if args.trials is not None else 100
    if trials < 1:
        raise ValidationError(f"trials must be >= 1, got {trials}")
    seed = args.seed if args.seed is not None else 0
    out = Path(args.out or ".")
    out.mkdir(parents=True, exist_ok=True)
    reports = []
    for strategy in (StrategyKind.PROPOSED_ASYMMETRIC,
                     StrategyKind.PREVIOUS_ASYMMETRIC,
                     StrategyKind.SYMMETRIC):
        base = make_circle_scenario(20, 1.0, strategy=strategy, seed=seed)
        reports.append(run_batch(base, trials, TABLE_GAMMAS))
    export_report_csv(reports, out / "no_solution_table.csv")
    md = format_report_markdown(reports)
    (out / "no_solution_table.md").write_text(md)
    print(md, end="")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="swarmcbf",
        description="Decentralized CBF collision-avoidance simulations",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p, with_trials=False):
        p.add_argument("--config", help="JSON config file")
        p.add_argument("--scenario", choices=["one_d_three_robots", "circle_20"])
        p.add_argument("--strategy",
                       choices=[s.value for s in StrategyKind])
        p.add_argument("--gamma", type=float)
        p.add_argument("--seed", type=int)
        p.add_argument("--out", help="output directory")
        if with_trials:
            p.add_argument("--trials", type=int)

    p_run = sub.add_parser("run", help="run one scenario, write trace files")
    common(p_run)
    p_run.set_defaults(func=cmd_run)

    p_batch = sub.add_parser("batch", help="perturbed-trial sweep for one strategy")
    common(p_batch, with_trials=True)
    p_batch.set_defaults(func=cmd_batch)

    p_t3 = sub.add_parser("table3",
                          help="full 3-strategy x 3-gamma no-solution table")
    p_t3.add_argument("--trials", type=int)
    p_t3.add_argument("--seed", type=int)
    p_t3.add_argument("--out", help="output directory")
    p_t3.set_defaults(func=cmd_table3)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_VALIDATION if exc.code not in (0, None) else EXIT_OK
    try:
        return args.func(args)
    except FatalSimulationError as exc:
        print(f"fatal simulation error: {exc}", file=sys.stderr)
        return EXIT_FATAL
    except (SwarmCbfError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_VALIDATION


if __name__ == "__main__":
    sys.exit(main())
