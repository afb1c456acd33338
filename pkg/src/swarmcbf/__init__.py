"""Decentralized control-barrier-function collision avoidance for point-mass swarms."""

from .barriers import (CbfParams, h, h0, h2_diag, lie_f_h, lie_g_h,
                       margin_lower_bound, symmetric_margin)
from .constraints import (LinearConstraint, StrategyKind, WeightPair,
                          constraint_previous, constraint_proposed,
                          constraint_symmetric, fallback_input,
                          weights_previous, weights_proposed)
from .dynamics import (PairState, PhysicalParams, RobotState, nominal_input,
                       pair_state, step_dynamics)
from .engine import (BatchReport, Scenario, SimulationTrace, StepRecord,
                     make_1d_scenario, make_circle_scenario, run_batch,
                     run_scenario)
from .errors import (DegenerateConstraint, DegenerateWeight, DimensionMismatch,
                     FatalSimulationError, NotOneDimensional, SingularPair,
                     SpacingTooTight, SwarmCbfError, ValidationError)
from .qp import (Feasible, Infeasible, QpOutcome, QpProblem,
                 feasible_interval_1d, solve)

__all__ = [name for name in dir() if not name.startswith("_")]
__version__ = "0.1.0"
