"""Run the three-robot 1D scenario under all strategies and export traces.

Writes, per strategy, a step trace CSV plus the middle robot's feasible
input interval CSV (the data behind the upper/lower bound plots).

Usage: python3 scripts/run_1d_comparison.py [outdir]
"""

import sys
from pathlib import Path

from swarmcbf.constraints import StrategyKind
from swarmcbf.engine import make_1d_scenario, run_scenario
from swarmcbf.export import export_feasible_bounds, export_trace


def main() -> int:
    out = Path(sys.argv[1]) if len(sys.argv) > 1 else Path("out_1d")
    out.mkdir(parents=True, exist_ok=True)
    for strategy in StrategyKind:
        trace = run_scenario(make_1d_scenario(strategy=strategy))
        stem = f"one_d_{strategy.value}"
        export_trace(trace, out / f"{stem}_trace.csv")
        export_feasible_bounds(trace, 1, out / f"{stem}_bounds.csv")
        print(f"{strategy.value}: {trace.no_solution_steps} no-solution steps, "
              f"first at t={trace.first_infeasible_time}, "
              f"min distance {trace.min_distance_series.min():.4f}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
