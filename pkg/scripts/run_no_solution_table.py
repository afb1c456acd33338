"""Reproduce the no-solution comparison table on the 20-robot circle.

Runs 100 perturbed trials per (strategy, gamma) cell and writes the
count table as CSV and markdown. Takes several minutes at full size;
pass a smaller trial count to smoke-test.

Usage: python3 scripts/run_no_solution_table.py [outdir] [trials]
"""

import sys
from pathlib import Path

from swarmcbf.constraints import StrategyKind
from swarmcbf.engine import make_circle_scenario, run_batch
from swarmcbf.export import export_report_csv, format_report_markdown

GAMMAS = [0.5, 1.0, 5.0]


def main() -> int:
    out = Path(sys.argv[1]) if len(sys.argv) > 1 else Path("out_table")
    trials = int(sys.argv[2]) if len(sys.argv) > 2 else 100
    out.mkdir(parents=True, exist_ok=True)
    reports = []
    for strategy in (StrategyKind.PROPOSED_ASYMMETRIC,
                     StrategyKind.PREVIOUS_ASYMMETRIC,
                     StrategyKind.SYMMETRIC):
        base = make_circle_scenario(20, 1.0, strategy=strategy, seed=0)
        rep = run_batch(base, trials, GAMMAS)
        reports.append(rep)
        print(f"{strategy.value}: "
              + ", ".join(f"gamma={g}: {rep.no_solution_trials[g]}/{trials}"
                          for g in GAMMAS))
    export_report_csv(reports, out / "no_solution_table.csv")
    (out / "no_solution_table.md").write_text(format_report_markdown(reports))
    return 0


if __name__ == "__main__":
    sys.exit(main())
