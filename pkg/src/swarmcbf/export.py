"""CSV trace and report writers.

Traces serialize one row per step with a stable column layout per
dimension; a sidecar JSON records the fully resolved scenario so a trace
file is reproducible on its own. The 1D bounds export rebuilds each step's
feasible input interval for one robot, which is the data behind the
upper/lower-limit plots.
"""

from __future__ import annotations

import csv
import json
from pathlib import Path

import numpy as np

from .config import scenario_to_dict
from .engine import BatchReport, SimulationTrace, robot_constraints
from .errors import NotOneDimensional
from .qp import feasible_interval_1d


def _fmt(x: float) -> str:
    return repr(float(x))


def export_trace(trace: SimulationTrace, path) -> None:
    """Write step, t, per-robot x/y/vx/vy, feasible flags, and step minima."""
    path = Path(path)
    sc = trace.scenario
    n, d = sc.n_robots, sc.dim
    axes = ["x", "y"][:d]
    header = ["step", "t"]
    for i in range(n):
        header += [f"r{i}_{a}" for a in axes] + [f"r{i}_v{a}" for a in axes]
    header += [f"r{i}_feasible" for i in range(n)]
    header += ["min_constraint_lhs", "min_pair_distance"]
    with path.open("w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(header)
        for r in trace.records:
            row = [r.step, _fmt(r.t)]
            for i in range(n):
                row += [_fmt(v) for v in r.positions[i]]
                row += [_fmt(v) for v in r.velocities[i]]
            row += [int(f) for f in r.feasible]
            row += [_fmt(r.min_constraint_lhs), _fmt(r.min_pair_distance)]
            w.writerow(row)
    sidecar = path.with_suffix(path.suffix + ".scenario.json")
    sidecar.write_text(json.dumps(scenario_to_dict(sc), indent=2))


def export_feasible_bounds(trace: SimulationTrace, robot_index: int, path) -> None:
    """Per-step feasible input interval of one robot (1D scenarios only)."""
    sc = trace.scenario
    if sc.dim != 1:
        raise NotOneDimensional("bounds export is defined for 1D scenarios")
    path = Path(path)
    with path.open("w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["step", "t", "lower_bound", "upper_bound", "empty_flag"])
        for r in trace.records:
            cons = robot_constraints(r.positions, r.velocities, robot_index,
                                     sc.cbf, sc.params.m, sc.strategy)
            interval = feasible_interval_1d(cons)
            if interval is None:
                w.writerow([r.step, _fmt(r.t), "", "", 1])
            else:
                lo, hi = interval
                w.writerow([
                    r.step, _fmt(r.t),
                    "" if not np.isfinite(lo) else _fmt(lo),
                    "" if not np.isfinite(hi) else _fmt(hi),
                    0,
                ])


def export_report_csv(reports: list[BatchReport], path) -> None:
    """No-solution trial counts, one row per gamma, one column per strategy."""
    path = Path(path)
    strategies = [r.strategy.value for r in reports]
    gammas = sorted({g for r in reports for g in r.gammas})
    with path.open("w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["gamma"] + strategies)
        for g in gammas:
            w.writerow([_fmt(g)] + [r.no_solution_trials.get(g, "") for r in reports])


def format_report_markdown(reports: list[BatchReport]) -> str:
    """Markdown table of no-solution trial counts out of N."""
    strategies = [r.strategy.value for r in reports]
    gammas = sorted({g for r in reports for g in r.gammas})
    trials = reports[0].trials if reports else 0
    lines = [
        f"No-solution trials out of {trials}",
        "",
        "| gamma | " + " | ".join(strategies) + " |",
        "|" + "---|" * (len(strategies) + 1),
    ]
    for g in gammas:
        cells = [str(r.no_solution_trials.get(g, "")) for r in reports]
        lines.append(f"| {g} | " + " | ".join(cells) + " |")
    return "\n".join(lines) + "\n"
