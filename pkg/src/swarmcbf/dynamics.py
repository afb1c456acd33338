"""Point-mass robot states, second-order dynamics, and the nominal controller.

Robots are point masses with direct force input: m * a = u. The nominal
(collision-unaware) input is a PD law toward a shared goal. All quantities
are dimensionless; dimension d is 1 or 2.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DimensionMismatch, ValidationError


def as_vec(x) -> np.ndarray:
    """Coerce to a finite float64 vector of dimension 1 or 2."""
    v = np.atleast_1d(np.asarray(x, dtype=np.float64))
    if v.ndim != 1 or v.size not in (1, 2):
        raise ValidationError(f"expected a 1D or 2D vector, got shape {v.shape}")
    if not np.all(np.isfinite(v)):
        raise ValidationError(f"vector has non-finite components: {v}")
    return v


@dataclass(frozen=True)
class RobotState:
    """Position and velocity of one robot."""

    position: np.ndarray
    velocity: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "position", as_vec(self.position))
        object.__setattr__(self, "velocity", as_vec(self.velocity))
        if self.position.size != self.velocity.size:
            raise DimensionMismatch(
                f"position dim {self.position.size} != velocity dim {self.velocity.size}"
            )

    @property
    def dim(self) -> int:
        return self.position.size


@dataclass(frozen=True)
class PhysicalParams:
    """Mass and nominal-controller gains, shared by all robots in a scenario."""

    m: float
    k: float
    c: float
    goal: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "goal", as_vec(self.goal))
        if not self.m > 0:
            raise ValidationError(f"mass must be positive, got {self.m}")
        if self.k < 0 or self.c < 0:
            raise ValidationError(f"feedback gains must be >= 0, got k={self.k}, c={self.c}")


@dataclass(frozen=True)
class PairState:
    """Relative state of a robot pair: x_ij = x_j - x_i, v_ij = v_j - v_i."""

    x_ij: np.ndarray
    v_ij: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "x_ij", as_vec(self.x_ij))
        object.__setattr__(self, "v_ij", as_vec(self.v_ij))
        if self.x_ij.size != self.v_ij.size:
            raise DimensionMismatch(
                f"x_ij dim {self.x_ij.size} != v_ij dim {self.v_ij.size}"
            )

    @property
    def dim(self) -> int:
        return self.x_ij.size

    def __neg__(self) -> "PairState":
        return PairState(-self.x_ij, -self.v_ij)


def nominal_input(state: RobotState, params: PhysicalParams) -> np.ndarray:
    """PD input toward the goal: u = k (goal - x) - c v."""
    if params.goal.size != state.dim:
        raise DimensionMismatch("goal dimension does not match robot state")
    return params.k * (params.goal - state.position) - params.c * state.velocity


def step_dynamics(state: RobotState, u: np.ndarray, m: float, dt: float) -> RobotState:
    """Semi-implicit Euler step: update velocity first, then position with it."""
    if dt <= 0:
        raise ValidationError(f"dt must be positive, got {dt}")
    u = as_vec(u)
    if u.size != state.dim:
        raise DimensionMismatch("input dimension does not match robot state")
    v = state.velocity + (u / m) * dt
    x = state.position + v * dt
    return RobotState(x, v)


def pair_state(a: RobotState, b: RobotState) -> PairState:
    """Relative state seen by robot a against robot b."""
    if a.dim != b.dim:
        raise DimensionMismatch("robot states of different dimension")
    return PairState(b.position - a.position, b.velocity - a.velocity)
