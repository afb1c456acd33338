"""Per-robot linear input constraints under the three decentralizations.

A pairwise safety condition couples both robots' inputs; since a robot
cannot know the other's input, the condition is split into one half-plane
constraint per robot, g . u + b >= 0. Three splits are implemented:

* symmetric      -- each robot takes exactly half the burden;
* previous       -- speed-ratio weights from earlier work (w1 = 1,
                    w2 = other_speed / (self_speed + other_speed));
* proposed       -- absolute-velocity weights whose per-pair sums are both 2
                    and which admit a guaranteed braking input.

The proposed constraint is always computed from its closed form, never via
the w1/w2 ratios, because those ratios have singular denominators along
ordinary trajectories.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum

import numpy as np

from .barriers import CbfParams, _geometry
from .dynamics import PairState
from .errors import DegenerateWeight

# Absolute threshold for weight-denominator degeneracy; far below every
# distance scale used here (>= 0.08).
WEIGHT_EPS = 1e-9


class StrategyKind(str, Enum):
    SYMMETRIC = "symmetric"
    PREVIOUS_ASYMMETRIC = "previous"
    PROPOSED_ASYMMETRIC = "proposed"


@dataclass(frozen=True)
class LinearConstraint:
    """Half-plane constraint on one robot's input: g . u + b >= 0."""

    g: np.ndarray
    b: float

    def lhs(self, u) -> float:
        return float(self.g @ np.asarray(u, dtype=np.float64)) + self.b


@dataclass(frozen=True)
class WeightPair:
    w1: float
    w2: float


def constraint_symmetric(q: PairState, p: CbfParams, m: float) -> LinearConstraint:
    """Half-burden split: g = -2 L_g h, b = L_f h + gamma h."""
    d, rdot, cross2 = _geometry(q)
    g = q.x_ij * (-2.0 * p.t_c / (m * d))
    lfh = rdot + cross2 / d**3 * p.t_c
    b = lfh + p.gamma * (d + rdot * p.t_c - p.r_s)
    return LinearConstraint(g, b)


def _self_radial(self_velocity: np.ndarray, q: PairState, d: float) -> float:
    """Component of the robot's own velocity along the pair direction."""
    if q.dim == 1:
        return float(self_velocity[0]) * float(q.x_ij[0]) / d
    return (
        float(self_velocity[0]) * float(q.x_ij[0])
        + float(self_velocity[1]) * float(q.x_ij[1])
    ) / d


def weights_proposed(self_velocity, q: PairState, p: CbfParams) -> WeightPair:
    """Absolute-velocity weights; diagnostic only, see constraint_proposed.

    Raises DegenerateWeight when a denominator (L_f h or h) is within
    WEIGHT_EPS of zero.
    """
    self_velocity = np.asarray(self_velocity, dtype=np.float64)
    d, rdot, cross2 = _geometry(q)
    lfh = rdot + cross2 / d**3 * p.t_c
    hv = d + rdot * p.t_c - p.r_s
    if abs(lfh) < WEIGHT_EPS or abs(hv) < WEIGHT_EPS:
        raise DegenerateWeight(f"weight denominators L_f h={lfh}, h={hv}")
    sr = _self_radial(self_velocity, q, d)
    w1 = (-2.0 * sr + cross2 / d**3 * p.t_c) / lfh
    w2 = (d - 2.0 * sr * p.t_c - p.r_s) / hv
    return WeightPair(w1, w2)


def weights_previous(self_speed: float, other_speed: float) -> WeightPair:
    """Speed-ratio weights from earlier work; 0/0 falls back to an even split."""
    if self_speed < 0 or other_speed < 0:
        raise ValueError("speeds must be nonnegative")
    total = self_speed + other_speed
    if total < WEIGHT_EPS:
        return WeightPair(1.0, 0.5)
    return WeightPair(1.0, other_speed / total)


def constraint_proposed(self_velocity, q: PairState, p: CbfParams, m: float) -> LinearConstraint:
    """Proposed asymmetric split, computed from its singularity-free closed form."""
    self_velocity = np.asarray(self_velocity, dtype=np.float64)
    d, rdot, cross2 = _geometry(q)
    g = q.x_ij * (-2.0 * p.t_c / (m * d))
    sr = _self_radial(self_velocity, q, d)
    b = (
        -2.0 * sr
        + cross2 / d**3 * p.t_c
        + p.gamma * (d - 2.0 * sr * p.t_c - p.r_s)
    )
    return LinearConstraint(g, b)


def constraint_previous(
    self_velocity, other_velocity, q: PairState, p: CbfParams, m: float
) -> LinearConstraint:
    """Earlier speed-ratio split: b = L_f h + w2 gamma h with w1 = 1."""
    self_speed = float(np.linalg.norm(np.asarray(self_velocity, dtype=np.float64)))
    other_speed = float(np.linalg.norm(np.asarray(other_velocity, dtype=np.float64)))
    w = weights_previous(self_speed, other_speed)
    d, rdot, cross2 = _geometry(q)
    g = q.x_ij * (-2.0 * p.t_c / (m * d))
    lfh = rdot + cross2 / d**3 * p.t_c
    b = lfh + w.w2 * p.gamma * (d + rdot * p.t_c - p.r_s)
    return LinearConstraint(g, b)


def fallback_input(velocity, p: CbfParams, m: float) -> np.ndarray:
    """Braking input -m (gamma + 1/T_c) v.

    Satisfies every proposed-split constraint of the robot simultaneously
    whenever all separations are at least r_s, so it is the continuation
    input after a no-solution event.
    """
    velocity = np.asarray(velocity, dtype=np.float64)
    return -m * (p.gamma + 1.0 / p.t_c) * velocity
