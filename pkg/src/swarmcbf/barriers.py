"""Pairwise barrier functions and their Lie derivatives.

The distance barrier h0 = ||x_ij|| - r_s has relative degree two in the
force input, so the filter acts on the augmented barrier
h = h0 + (d/dt h0) * T_c. Both f- and g-Lie derivatives of h are closed
form; the tangential (cross) term exists only in 2D; the safety condition
enforced downstream is L_f h + L_g h (u_j - u_i) + gamma * h >= 0.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from .dynamics import PairState
from .errors import SingularPair, ValidationError

# Below this separation the barrier direction x/||x|| is meaningless;
# treat as a fatal modeling error rather than returning huge values.
SINGULAR_EPS = 1e-9


@dataclass(frozen=True)
class CbfParams:
    """Safe distance, constraint rate, and the barrier time constant."""

    r_s: float
    gamma: float
    t_c: float

    def __post_init__(self):
        if not (self.r_s > 0 and self.gamma > 0 and self.t_c > 0):
            raise ValidationError(
                f"CbfParams must be strictly positive: r_s={self.r_s}, "
                f"gamma={self.gamma}, t_c={self.t_c}"
            )


def _geometry(q: PairState) -> tuple[float, float, float]:
    """Return (||x||, radial speed v.x/||x||, squared cross product).

    The cross product y*vx - x*vy is defined as 0 in 1D.
    """
    x = q.x_ij
    v = q.v_ij
    if q.dim == 1:
        d = abs(float(x[0]))
        if d < SINGULAR_EPS:
            raise SingularPair(f"pair separation {d} below {SINGULAR_EPS}")
        return d, float(v[0]) * float(x[0]) / d, 0.0
    x0, x1 = float(x[0]), float(x[1])
    v0, v1 = float(v[0]), float(v[1])
    d = math.hypot(x0, x1)
    if d < SINGULAR_EPS:
        raise SingularPair(f"pair separation {d} below {SINGULAR_EPS}")
    cross = x1 * v0 - x0 * v1
    return d, (v0 * x0 + v1 * x1) / d, cross * cross


def h0(q: PairState, p: CbfParams) -> float:
    """Distance barrier: separation minus the safe distance."""
    d, _, _ = _geometry(q)
    return d - p.r_s


def h(q: PairState, p: CbfParams) -> float:
    """Augmented barrier h0 + (radial speed) * T_c; even in q."""
    d, rdot, _ = _geometry(q)
    return d + rdot * p.t_c - p.r_s


def lie_f_h(q: PairState, p: CbfParams) -> float:
    """Drift Lie derivative of h; even in q. Cross term vanishes in 1D."""
    d, rdot, cross2 = _geometry(q)
    return rdot + cross2 / d**3 * p.t_c


def lie_g_h(q: PairState, p: CbfParams, m: float):
    """Input Lie derivative of h: (x/||x||) * T_c / m, odd in q."""
    d, _, _ = _geometry(q)
    return q.x_ij * (p.t_c / (m * d))


def symmetric_margin(q: PairState, p: CbfParams) -> float:
    """Solution-existence margin L_f h + gamma h of the symmetric split.

    For the robot-in-the-middle configuration, a negative value means the
    symmetric per-robot constraints admit no common input.
    """
    d, rdot, cross2 = _geometry(q)
    lfh = rdot + cross2 / d**3 * p.t_c
    return lfh + p.gamma * (d + rdot * p.t_c - p.r_s)


def margin_lower_bound(q: PairState, p: CbfParams) -> float:
    """Analytic lower envelope of symmetric_margin on constraint-satisfying runs.

    Equals max(rdot, rdot * gamma * T_c); strictly negative whenever the
    pair is approaching, which is why the symmetric split can run dry.
    """
    d, rdot, _ = _geometry(q)
    return max(rdot, rdot * p.gamma * p.t_c)


def h2_diag(q: PairState, p: CbfParams) -> float:
    """Secondary barrier gamma*T_c*h0 + rdot*T_c, monitored at runtime.

    Stays nonnegative along any run that keeps the main safety condition
    satisfied; used as a diagnostic invariant, never as a constraint.
    """
    d, rdot, _ = _geometry(q)
    return p.gamma * p.t_c * (d - p.r_s) + rdot * p.t_c
