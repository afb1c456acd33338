"""JSON run configuration: named scenario catalog plus inline scenarios.

Named scenarios carry the reference defaults: the 1D three-robot line
(r_s=0.5, gamma=2, 320 steps) and the 20-robot circle (r_s=0.08, 400
steps). Unknown keys are rejected so typos fail loudly.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field, replace

import numpy as np

from .barriers import CbfParams
from .constraints import StrategyKind
from .dynamics import PhysicalParams
from .engine import Scenario, make_1d_scenario, make_circle_scenario
from .errors import ValidationError

NAMED_SCENARIOS = ("one_d_three_robots", "circle_20")

_TOP_KEYS = {"scenario", "strategy", "gamma", "seed", "out", "trials",
             "emit_trace", "emit_bounds", "emit_report"}
_SCENARIO_KEYS = {"robots", "params", "cbf", "strategy", "dt", "steps",
                  "seed", "perturbation", "name"}


@dataclass(frozen=True)
class RunConfig:
    scenario: str | Scenario
    strategy: StrategyKind = StrategyKind.SYMMETRIC
    gamma: float | None = None
    seed: int = 0
    out: str = "."
    trials: int = 100
    emit_trace: bool = True
    emit_bounds: bool = True
    emit_report: bool = True


class ParseError(ValidationError):
    """Config text is not well-formed JSON."""


def _build_inline_scenario(obj: dict) -> Scenario:
    unknown = set(obj) - _SCENARIO_KEYS
    if unknown:
        raise ValidationError(f"unknown scenario keys: {sorted(unknown)}")
    for key in ("robots", "params", "cbf", "strategy"):
        if key not in obj:
            raise ValidationError(f"inline scenario missing required key '{key}'")
    try:
        P = np.array([r["position"] for r in obj["robots"]], dtype=np.float64)
        V = np.array([r["velocity"] for r in obj["robots"]], dtype=np.float64)
    except (KeyError, TypeError, ValueError) as exc:
        raise ValidationError(f"bad robots entry: {exc}") from exc
    pp = obj["params"]
    cc = obj["cbf"]
    try:
        params = PhysicalParams(m=pp["m"], k=pp["k"], c=pp["c"], goal=pp["goal"])
        cbf = CbfParams(r_s=cc["r_s"], gamma=cc["gamma"], t_c=cc["t_c"])
    except (KeyError, TypeError) as exc:
        raise ValidationError(f"bad params/cbf block: {exc}") from exc
    try:
        strategy = StrategyKind(obj["strategy"])
    except ValueError as exc:
        raise ValidationError(str(exc)) from exc
    return Scenario(
        positions=P, velocities=V, params=params, cbf=cbf, strategy=strategy,
        dt=obj.get("dt", 0.025), steps=obj.get("steps", 400),
        seed=obj.get("seed", 0), perturbation=obj.get("perturbation", 0.0),
        name=obj.get("name", "custom"),
    )


def load_config(text: str) -> RunConfig:
    """Parse and validate a JSON run configuration."""
    try:
        obj = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ParseError(f"line {exc.lineno}, col {exc.colno}: {exc.msg}") from exc
    if not isinstance(obj, dict):
        raise ValidationError("config must be a JSON object")
    unknown = set(obj) - _TOP_KEYS
    if unknown:
        raise ValidationError(f"unknown config keys: {sorted(unknown)}")
    if "scenario" not in obj:
        raise ValidationError("config missing required key 'scenario'")
    scenario = obj["scenario"]
    if isinstance(scenario, str):
        if scenario not in NAMED_SCENARIOS:
            raise ValidationError(
                f"unknown scenario '{scenario}'; expected one of {NAMED_SCENARIOS}"
            )
    elif isinstance(scenario, dict):
        scenario = _build_inline_scenario(scenario)
    else:
        raise ValidationError("scenario must be a name or an inline object")
    strategy_raw = obj.get("strategy", "symmetric")
    try:
        strategy = StrategyKind(strategy_raw)
    except ValueError as exc:
        raise ValidationError(str(exc)) from exc
    gamma = obj.get("gamma")
    if gamma is not None and not gamma > 0:
        raise ValidationError(f"gamma must be positive, got {gamma}")
    trials = obj.get("trials", 100)
    if not isinstance(trials, int) or trials < 1:
        raise ValidationError(f"trials must be a positive integer, got {trials}")
    return RunConfig(
        scenario=scenario, strategy=strategy, gamma=gamma,
        seed=obj.get("seed", 0), out=obj.get("out", "."), trials=trials,
        emit_trace=bool(obj.get("emit_trace", True)),
        emit_bounds=bool(obj.get("emit_bounds", True)),
        emit_report=bool(obj.get("emit_report", True)),
    )


def resolve_scenario(config: RunConfig) -> Scenario:
    """Materialize the configured scenario with strategy/gamma/seed applied."""
    if isinstance(config.scenario, Scenario):
        sc = replace(config.scenario, strategy=config.strategy, seed=config.seed)
    elif config.scenario == "one_d_three_robots":
        sc = make_1d_scenario(strategy=config.strategy)
        sc = replace(sc, seed=config.seed)
    else:
        sc = make_circle_scenario(20, 1.0, strategy=config.strategy,
                                  seed=config.seed)
    if config.gamma is not None:
        sc = replace(sc, cbf=replace(sc.cbf, gamma=float(config.gamma)))
    return sc


def scenario_to_dict(sc: Scenario) -> dict:
    """JSON-serializable snapshot of a fully resolved scenario."""
    return {
        "name": sc.name,
        "robots": [
            {"position": p.tolist(), "velocity": v.tolist()}
            for p, v in zip(sc.positions, sc.velocities)
        ],
        "params": {"m": sc.params.m, "k": sc.params.k, "c": sc.params.c,
                   "goal": sc.params.goal.tolist()},
        "cbf": {"r_s": sc.cbf.r_s, "gamma": sc.cbf.gamma, "t_c": sc.cbf.t_c},
        "strategy": sc.strategy.value,
        "dt": sc.dt, "steps": sc.steps, "seed": sc.seed,
        "perturbation": sc.perturbation,
    }


def serialize(config: RunConfig) -> str:
    """Inverse of load_config for valid configs."""
    obj: dict = {}
    if isinstance(config.scenario, Scenario):
        obj["scenario"] = scenario_to_dict(config.scenario)
    else:
        obj["scenario"] = config.scenario
    obj["strategy"] = config.strategy.value
    if config.gamma is not None:
        obj["gamma"] = config.gamma
    obj["seed"] = config.seed
    obj["out"] = config.out
    obj["trials"] = config.trials
    obj["emit_trace"] = config.emit_trace
    obj["emit_bounds"] = config.emit_bounds
    obj["emit_report"] = config.emit_report
    return json.dumps(obj, indent=2)
