"""Multi-robot simulation: per-step constraint building, QP filtering, integration.

Each step every robot builds one half-plane constraint against every other
robot under the active decentralization strategy, projects its nominal
input onto the resulting polyhedron, and all robots integrate
synchronously from the same snapshot. A robot whose projection is
infeasible applies the braking fallback input and the run continues with
the event recorded.

Pair quantities for all n*(n-1) ordered pairs are computed with array
broadcasting; the scalar functions in barriers/constraints define the
semantics and the arrays here must match them (pinned by tests).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from functools import lru_cache

import numpy as np

from .barriers import SINGULAR_EPS, CbfParams
from .constraints import WEIGHT_EPS, LinearConstraint, StrategyKind
from .dynamics import PhysicalParams, RobotState
from .errors import FatalSimulationError, SingularPair, SpacingTooTight, ValidationError
from .qp import DEFAULT_TOLERANCE, project


@dataclass(frozen=True)
class Scenario:
    """Initial world plus every knob needed to reproduce a run."""

    positions: np.ndarray  # (n, d)
    velocities: np.ndarray  # (n, d)
    params: PhysicalParams
    cbf: CbfParams
    strategy: StrategyKind
    dt: float = 0.025
    steps: int = 400
    seed: int = 0
    perturbation: float = 0.0
    name: str = "custom"

    def __post_init__(self):
        P = np.atleast_2d(np.asarray(self.positions, dtype=np.float64))
        V = np.atleast_2d(np.asarray(self.velocities, dtype=np.float64))
        if P.shape != V.shape or P.ndim != 2 or P.shape[1] not in (1, 2):
            raise ValidationError(
                f"positions {P.shape} and velocities {V.shape} must match (n, d<=2)"
            )
        if not (np.all(np.isfinite(P)) and np.all(np.isfinite(V))):
            raise ValidationError("non-finite initial state")
        object.__setattr__(self, "positions", P)
        object.__setattr__(self, "velocities", V)
        object.__setattr__(self, "strategy", StrategyKind(self.strategy))
        if self.steps < 1:
            raise ValidationError(f"steps must be >= 1, got {self.steps}")
        if self.dt <= 0:
            raise ValidationError(f"dt must be positive, got {self.dt}")
        if self.perturbation < 0:
            raise ValidationError("perturbation must be >= 0")
        if self.params.goal.size != P.shape[1]:
            raise ValidationError("goal dimension differs from robot dimension")
        n = P.shape[0]
        if n > 1:
            diff = P[None, :, :] - P[:, None, :]
            dist = np.sqrt(np.einsum("ijk,ijk->ij", diff, diff))
            np.fill_diagonal(dist, np.inf)
            if float(dist.min()) < self.cbf.r_s:
                raise ValidationError(
                    f"initial pairwise distance {dist.min():.4g} below r_s={self.cbf.r_s}"
                )

    @property
    def n_robots(self) -> int:
        return self.positions.shape[0]

    @property
    def dim(self) -> int:
        return self.positions.shape[1]

    @property
    def robots(self) -> list[RobotState]:
        return [RobotState(p, v) for p, v in zip(self.positions, self.velocities)]


@dataclass(frozen=True)
class StepRecord:
    """State of the world at one step, before integration, plus the applied inputs."""

    step: int
    t: float
    positions: np.ndarray
    velocities: np.ndarray
    applied_u: np.ndarray
    feasible: np.ndarray  # (n,) bool
    min_constraint_lhs: float
    min_pair_distance: float
    pair_margin: np.ndarray  # condensed upper triangle, L_f h + gamma h
    pair_h: np.ndarray
    pair_h2: np.ndarray


@dataclass
class SimulationTrace:
    scenario: Scenario
    records: list[StepRecord]
    no_solution_steps: int
    first_infeasible_time: float | None

    @property
    def min_lhs_series(self) -> np.ndarray:
        return np.array([r.min_constraint_lhs for r in self.records])

    @property
    def min_distance_series(self) -> np.ndarray:
        return np.array([r.min_pair_distance for r in self.records])


@dataclass(frozen=True)
class TrialSummary:
    """Aggregates kept per batch trial instead of full records."""

    gamma: float
    trial: int
    no_solution_steps: int
    first_infeasible_time: float | None
    min_lhs_series: np.ndarray
    min_distance_series: np.ndarray
    steps_run: int
    fatal: str | None = None


@dataclass
class BatchReport:
    """Table-shaped summary of a (gamma x trial) sweep for one strategy."""

    strategy: StrategyKind
    gammas: list[float]
    trials: int
    no_solution_trials: dict[float, int]
    fatal_trials: dict[float, int]
    summaries: dict[float, list[TrialSummary]]


def _pair_tables(P: np.ndarray, V: np.ndarray, cbf: CbfParams, m: float):
    """All-pairs barrier quantities; entry [i, j] describes robot i against j.

    Returns dict with D (distance), U (unit x_ij), rdot (relative radial
    speed), sdot (own-velocity radial component), cr (cross term already
    scaled by T_c), h, lfh, margin, h2, G (constraint coefficient rows).
    Diagonals are inert (D=inf).
    """
    n, d = P.shape
    X = P[None, :, :] - P[:, None, :]
    Vd = V[None, :, :] - V[:, None, :]
    D = np.sqrt(np.einsum("ijk,ijk->ij", X, X))
    np.fill_diagonal(D, np.inf)
    if n > 1 and float(D.min()) < SINGULAR_EPS:
        raise SingularPair(f"pair separation {D.min()} below {SINGULAR_EPS}")
    U = X / D[:, :, None]
    rdot = np.einsum("ijk,ijk->ij", Vd, U)
    sdot = np.einsum("ik,ijk->ij", V, U)
    if d == 2:
        cross = X[:, :, 1] * Vd[:, :, 0] - X[:, :, 0] * Vd[:, :, 1]
        cr = cross * cross / D**3 * cbf.t_c
    else:
        cr = np.zeros_like(D)
    hm = D + rdot * cbf.t_c - cbf.r_s
    np.fill_diagonal(hm, 0.0)
    lfh = rdot + cr
    margin = lfh + cbf.gamma * hm
    h2 = cbf.gamma * cbf.t_c * (D - cbf.r_s) + rdot * cbf.t_c
    np.fill_diagonal(h2, 0.0)
    G = U * (-2.0 * cbf.t_c / m)
    return {
        "D": D, "U": U, "rdot": rdot, "sdot": sdot, "cr": cr,
        "h": hm, "lfh": lfh, "margin": margin, "h2": h2, "G": G,
    }


def _constraint_offsets(tab: dict, V: np.ndarray, cbf: CbfParams,
                        strategy: StrategyKind) -> np.ndarray:
    """Offset b[i, j] of robot i's constraint against robot j."""
    if strategy is StrategyKind.SYMMETRIC:
        return tab["margin"]
    if strategy is StrategyKind.PROPOSED_ASYMMETRIC:
        sdot = tab["sdot"]
        return (
            -2.0 * sdot
            + tab["cr"]
            + cbf.gamma * (tab["D"] - 2.0 * sdot * cbf.t_c - cbf.r_s)
        )
    speeds = np.linalg.norm(V, axis=1)
    total = speeds[:, None] + speeds[None, :]
    with np.errstate(invalid="ignore", divide="ignore"):
        w2 = np.where(total < WEIGHT_EPS, 0.5, speeds[None, :] / np.maximum(total, WEIGHT_EPS))
    return tab["lfh"] + w2 * cbf.gamma * tab["h"]


def robot_constraints(P: np.ndarray, V: np.ndarray, i: int, cbf: CbfParams,
                      m: float, strategy: StrategyKind) -> list[LinearConstraint]:
    """Robot i's constraint list at an arbitrary world state (for export/tests)."""
    P = np.atleast_2d(np.asarray(P, dtype=np.float64))
    V = np.atleast_2d(np.asarray(V, dtype=np.float64))
    tab = _pair_tables(P, V, cbf, m)
    b = _constraint_offsets(tab, V, cbf, strategy)
    others = [j for j in range(P.shape[0]) if j != i]
    return [LinearConstraint(tab["G"][i, j].copy(), float(b[i, j])) for j in others]


@lru_cache(maxsize=None)
def _triu_pairs(nc: int):
    return np.triu_indices(nc, 1)


def _project_batch(un: np.ndarray, Gn: np.ndarray, bn: np.ndarray,
                   r0n: np.ndarray):
    """Exact projections for a batch of robots by full candidate enumeration.

    un: (R, d) nominal inputs; Gn/bn: (R, nc, d)/(R, nc) per-robot
    constraints; r0n: residuals at un. Candidates are the nominal input,
    all single-constraint projections, and (d=2) all pair intersections,
    each aimed a rounding pad inside its half-planes. Returns (U, rowmin,
    ok, acts): chosen points, their worst residuals, which robots accepted
    a candidate that is feasible with the usual rounding floor, and the
    active row pair of each accepted candidate (-1 padded). Robots not
    accepted (near-empty or empty polyhedra) must go through project().
    """
    R, nc, d = Gn.shape
    gn2 = np.einsum("rjd,rjd->rj", Gn, Gn)
    pad = 2e-14 * (np.abs(r0n - bn) + np.abs(bn) + 1.0)
    t = (-r0n + pad) / np.maximum(gn2, 1e-300)
    parts = [un[:, None, :], un[:, None, :] + t[..., None] * Gn]
    if d == 2 and nc >= 2:
        jj, kk = _triu_pairs(nc)
        a, c = Gn[:, jj, :], Gn[:, kk, :]
        det = a[..., 0] * c[..., 1] - a[..., 1] * c[..., 0]
        ta = pad[:, jj] - bn[:, jj]
        tb = pad[:, kk] - bn[:, kk]
        good = np.abs(det) > 1e-14 * np.sqrt(gn2[:, jj] * gn2[:, kk])
        det_safe = np.where(good, det, 1.0)
        ux = np.where(good, (ta * c[..., 1] - tb * a[..., 1]) / det_safe, un[:, 0:1])
        uy = np.where(good, (tb * a[..., 0] - ta * c[..., 0]) / det_safe, un[:, 1:2])
        parts.append(np.stack([ux, uy], axis=2))
    C = np.concatenate(parts, axis=1)
    resid = np.einsum("rkd,rjd->rkj", C, Gn) + bn[:, None, :]
    rmin = resid.min(axis=2)
    dist2 = np.einsum("rkd,rkd->rk", C - un[:, None, :], C - un[:, None, :])
    dist2 = np.where(rmin >= 0.0, dist2, np.inf)
    ksel = np.argmin(dist2, axis=1)
    ar = np.arange(R)
    U = C[ar, ksel]
    rsel = resid[ar, ksel]
    ssel = np.abs(rsel - bn) + np.abs(bn) + 1.0
    ok = np.isfinite(dist2[ar, ksel]) & np.all(rsel >= 1e-14 * ssel, axis=1)
    acts = np.full((R, 2), -1, dtype=np.int64)
    single = (ksel >= 1) & (ksel <= nc)
    acts[single, 0] = ksel[single] - 1
    if d == 2 and nc >= 2:
        pair = ksel > nc
        acts[pair, 0] = jj[ksel[pair] - nc - 1]
        acts[pair, 1] = kk[ksel[pair] - nc - 1]
    return U, rmin[ar, ksel], ok, acts


def _project_warm(un: np.ndarray, Gn: np.ndarray, bn: np.ndarray,
                  r0n: np.ndarray, acts: np.ndarray):
    """Re-try each robot's previous active rows before full enumeration.

    During packed quasi-equilibrium the same one or two constraints stay
    active for long stretches. The remembered candidate is rebuilt with
    the same padded formulas as _project_batch and accepted only when it
    is feasible with the rounding floor and its KKT multipliers are
    nonnegative, which certifies it as the exact projection; anything
    else falls through to the full path. Returns (U, rowmin, ok).
    """
    R, nc, d = Gn.shape
    ar = np.arange(R)
    gn2 = np.einsum("rjd,rjd->rj", Gn, Gn)
    pad = 2e-14 * (np.abs(r0n - bn) + np.abs(bn) + 1.0)
    j = acts[:, 0]
    k = np.where(acts[:, 1] >= 0, acts[:, 1], 0)
    is_pair = acts[:, 1] >= 0
    tj = (-r0n[ar, j] + pad[ar, j]) / np.maximum(gn2[ar, j], 1e-300)
    U = un + tj[:, None] * Gn[ar, j]
    lam_ok = (~is_pair) & (tj >= 0.0)
    if d == 2:
        a = Gn[ar, j]
        c = Gn[ar, k]
        det = a[:, 0] * c[:, 1] - a[:, 1] * c[:, 0]
        ta = pad[ar, j] - bn[ar, j]
        tb = pad[ar, k] - bn[ar, k]
        good = np.abs(det) > 1e-14 * np.sqrt(gn2[ar, j] * gn2[ar, k])
        det_safe = np.where(good, det, 1.0)
        ux = (ta * c[:, 1] - tb * a[:, 1]) / det_safe
        uy = (tb * a[:, 0] - ta * c[:, 0]) / det_safe
        V = np.stack([ux, uy], axis=1)
        dv = V - un
        p1 = np.einsum("rd,rd->r", a, dv)
        p2 = np.einsum("rd,rd->r", c, dv)
        ac = np.einsum("rd,rd->r", a, c)
        gram = gn2[ar, j] * gn2[ar, k] - ac * ac
        gram_safe = np.where(gram > 0.0, gram, 1.0)
        l1 = (gn2[ar, k] * p1 - ac * p2) / gram_safe
        l2 = (gn2[ar, j] * p2 - ac * p1) / gram_safe
        pair_ok = is_pair & good & (gram > 0.0) & (l1 >= 0.0) & (l2 >= 0.0)
        U = np.where(is_pair[:, None], V, U)
        lam_ok = lam_ok | pair_ok
    resid = np.einsum("rd,rjd->rj", U, Gn) + bn
    rmin = resid.min(axis=1)
    scale = np.abs(resid - bn) + np.abs(bn) + 1.0
    ok = lam_ok & np.all(resid >= 1e-14 * scale, axis=1)
    return U, rmin, ok


def _simulate(scenario: Scenario, positions: np.ndarray, velocities: np.ndarray,
              collect_records: bool, stop_after_infeasible: int | None = None,
              tolerance: float = DEFAULT_TOLERANCE):
    """Shared core of run_scenario and run_batch.

    stop_after_infeasible: if set, stop that many steps after the first
    no-solution step (batch mode only cares whether one occurred).
    """
    cbf, params, strategy = scenario.cbf, scenario.params, scenario.strategy
    m, dt = params.m, scenario.dt
    P = positions.copy()
    V = velocities.copy()
    n = P.shape[0]
    not_self = ~np.eye(n, dtype=bool)
    fb_gain = -m * (cbf.gamma + 1.0 / cbf.t_c)

    records: list[StepRecord] = []
    min_lhs_series = np.empty(scenario.steps)
    min_dist_series = np.empty(scenario.steps)
    no_solution_steps = 0
    first_infeasible_time = None
    steps_run = 0
    iu, ju = np.triu_indices(n, 1)
    act_mem = np.full((n, 2), -1, dtype=np.int64)

    for step in range(scenario.steps):
        t = step * dt
        try:
            tab = _pair_tables(P, V, cbf, m)
        except SingularPair as exc:
            raise FatalSimulationError(f"step {step}: {exc}") from exc
        b = _constraint_offsets(tab, V, cbf, strategy)
        G = tab["G"]
        u_hat = params.k * (params.goal[None, :] - P) - params.c * V

        applied = u_hat.copy()
        feasible = np.ones(n, dtype=bool)
        if n > 1:
            lhs0 = np.einsum("ijk,ik->ij", G, u_hat) + b
            lhs0[~not_self] = np.inf
            min_lhs = np.inf
            needs = np.where(lhs0.min(axis=1) < 0.0)[0]
            needs_all = needs
            if needs.size:
                sel = not_self[needs]
                Gn = G[needs][sel].reshape(needs.size, n - 1, -1)
                bn = b[needs][sel].reshape(needs.size, n - 1)
                r0n = lhs0[needs][sel].reshape(needs.size, n - 1)
                un = u_hat[needs]
                warm = act_mem[needs, 0] >= 0
                if np.any(warm):
                    Uw, rw, okw = _project_warm(un[warm], Gn[warm], bn[warm],
                                                r0n[warm], act_mem[needs[warm]])
                    hit = needs[warm][okw]
                    if hit.size:
                        applied[hit] = Uw[okw]
                        min_lhs = min(min_lhs, float(rw[okw].min()))
                        cold = np.ones(needs.size, dtype=bool)
                        cold[np.where(warm)[0][okw]] = False
                        needs, Gn, bn, r0n, un = (needs[cold], Gn[cold],
                                                  bn[cold], r0n[cold], un[cold])
            if needs.size:
                U1, rowmin, ok, acts = _project_batch(un, Gn, bn, r0n)
                if np.any(ok):
                    applied[needs[ok]] = U1[ok]
                    min_lhs = min(min_lhs, float(rowmin[ok].min()))
                    act_mem[needs[ok]] = acts[ok]
                    needs = needs[~ok]
            for i in needs:
                Gi = G[i][not_self[i]]
                bi = b[i][not_self[i]]
                u, info = project(u_hat[i], Gi, bi, tolerance)
                if u is None:
                    feasible[i] = False
                    applied[i] = fb_gain * V[i]
                else:
                    applied[i] = u
                row = Gi @ applied[i] + bi
                min_lhs = min(min_lhs, float(row.min()))
                act_mem[i] = -1
            keep = np.ones(n, dtype=bool)
            keep[needs_all] = False
            if np.any(keep):
                min_lhs = min(min_lhs, float(lhs0[keep].min()))
            min_dist = float(tab["D"].min())
        else:
            min_lhs = np.inf
            min_dist = np.inf

        if not np.all(feasible):
            no_solution_steps += 1
            if first_infeasible_time is None:
                first_infeasible_time = t

        min_lhs_series[step] = min_lhs
        min_dist_series[step] = min_dist
        if collect_records:
            records.append(StepRecord(
                step=step, t=t,
                positions=P.copy(), velocities=V.copy(), applied_u=applied,
                feasible=feasible, min_constraint_lhs=min_lhs,
                min_pair_distance=min_dist,
                pair_margin=tab["margin"][iu, ju].copy(),
                pair_h=tab["h"][iu, ju].copy(),
                pair_h2=tab["h2"][iu, ju].copy(),
            ))
        steps_run = step + 1

        V = V + (applied / m) * dt
        P = P + V * dt

        if (stop_after_infeasible is not None and first_infeasible_time is not None
                and t >= first_infeasible_time + stop_after_infeasible * dt):
            break

    return (records, no_solution_steps, first_infeasible_time,
            min_lhs_series[:steps_run], min_dist_series[:steps_run], steps_run)


def run_scenario(scenario: Scenario, tolerance: float = DEFAULT_TOLERANCE) -> SimulationTrace:
    """Run a scenario to completion with full per-step records.

    Deterministic: the initial state is used as given (perturbation is a
    batch-runner concern).
    """
    records, n_bad, first_t, _, _, _ = _simulate(
        scenario, scenario.positions, scenario.velocities, collect_records=True,
        tolerance=tolerance)
    return SimulationTrace(scenario, records, n_bad, first_t)


def _perturbed_initial(scenario: Scenario, gamma_index: int, trial: int):
    """Seeded uniform micro-noise on each initial position/velocity component."""
    ss = np.random.SeedSequence(entropy=scenario.seed,
                                spawn_key=(gamma_index, trial))
    rng = np.random.default_rng(ss)
    p = scenario.perturbation
    P = scenario.positions + rng.uniform(-p, p, scenario.positions.shape)
    V = scenario.velocities + rng.uniform(-p, p, scenario.velocities.shape)
    return P, V


def run_batch(base: Scenario, trials: int, gammas: list[float],
              stop_after_infeasible: int | None = 0,
              tolerance: float = DEFAULT_TOLERANCE) -> BatchReport:
    """Sweep gamma values with perturbed trials; count no-solution trials.

    Each trial perturbs the base initial state with its own seeded noise so
    the sweep is reproducible and order-independent. By default a trial
    stops right after its first no-solution step (the event of interest has
    already happened and been recorded); pass stop_after_infeasible=None to
    always run full length.
    """
    if trials < 1:
        raise ValidationError(f"trials must be >= 1, got {trials}")
    counts: dict[float, int] = {}
    fatals: dict[float, int] = {}
    summaries: dict[float, list[TrialSummary]] = {}
    for gi, gamma in enumerate(gammas):
        cbf = replace(base.cbf, gamma=float(gamma))
        sc = replace(base, cbf=cbf)
        rows: list[TrialSummary] = []
        bad = 0
        fatal = 0
        for trial in range(trials):
            P, V = _perturbed_initial(sc, gi, trial)
            try:
                (_, n_bad, first_t, lhs, dist, steps_run) = _simulate(
                    sc, P, V, collect_records=False,
                    stop_after_infeasible=stop_after_infeasible,
                    tolerance=tolerance)
            except FatalSimulationError as exc:
                fatal += 1
                rows.append(TrialSummary(gamma, trial, 0, None,
                                         np.empty(0), np.empty(0), 0, str(exc)))
                continue
            if n_bad > 0:
                bad += 1
            rows.append(TrialSummary(gamma, trial, n_bad, first_t,
                                     lhs, dist, steps_run))
        counts[float(gamma)] = bad
        fatals[float(gamma)] = fatal
        summaries[float(gamma)] = rows
    return BatchReport(base.strategy, [float(g) for g in gammas], trials,
                       counts, fatals, summaries)


def make_1d_scenario(cbf: CbfParams | None = None,
                     strategy: StrategyKind = StrategyKind.SYMMETRIC) -> Scenario:
    """Three collinear robots: outer two coast inward at speed 5, middle at rest.

    Nominal inputs are all zero (k = c = 0), so only the safety filter acts.
    """
    if cbf is None:
        cbf = CbfParams(r_s=0.5, gamma=2.0, t_c=0.025)
    params = PhysicalParams(m=1.0, k=0.0, c=0.0, goal=np.zeros(1))
    return Scenario(
        positions=np.array([[-10.0], [0.0], [10.0]]),
        velocities=np.array([[5.0], [0.0], [-5.0]]),
        params=params, cbf=cbf, strategy=strategy,
        dt=0.025, steps=320, seed=0, perturbation=0.0,
        name="one_d_three_robots",
    )


def make_circle_scenario(n: int, radius: float, cbf: CbfParams | None = None,
                         strategy: StrategyKind = StrategyKind.PROPOSED_ASYMMETRIC,
                         seed: int = 0, perturbation: float = 0.01) -> Scenario:
    """n robots at rest on a circle, all attracted to the shared center goal."""
    if n < 2:
        raise ValidationError(f"need at least 2 robots, got {n}")
    if cbf is None:
        cbf = CbfParams(r_s=0.08, gamma=1.0, t_c=0.025)
    spacing = 2.0 * radius * math.sin(math.pi / n)
    if spacing < cbf.r_s:
        raise SpacingTooTight(
            f"adjacent spacing {spacing:.4g} below r_s={cbf.r_s}"
        )
    angles = 2.0 * np.pi * np.arange(n) / n
    P = radius * np.stack([np.cos(angles), np.sin(angles)], axis=1)
    params = PhysicalParams(m=1.0, k=1.0, c=0.3, goal=np.zeros(2))
    return Scenario(
        positions=P, velocities=np.zeros_like(P),
        params=params, cbf=cbf, strategy=strategy,
        dt=0.025, steps=400, seed=seed, perturbation=perturbation,
        name=f"circle_{n}",
    )
