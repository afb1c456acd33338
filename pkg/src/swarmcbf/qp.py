"""Exact projection QP for 1 or 2 decision variables.

Minimizes 0.5 ||u_hat - u||^2 subject to linear inequalities g . u + b >= 0.
With d <= 2 and a handful of constraints the projection is found exactly by
enumerating active sets: the unconstrained point, single-constraint
projections, and (in 2D) pair intersections. For speed the enumeration
runs over a working set seeded with the constraints violated at u_hat and
grown until the restricted projection is feasible for everything, which is
the standard optimality argument for polyhedral projection.

Infeasibility is declared through a phase-1 certificate: the minimum
achievable worst violation, found by vertex enumeration on the epigraph
with one step of iterative refinement per vertex. Worst violations are
always re-evaluated at the concrete point, so the certificate is a tight
upper bound and a point within tolerance is returned as feasible even when
the exact polyhedron is empty.

The chosen point is nudged along active-constraint normals until every
floating-point residual is nonnegative, so downstream margin traces never
show spurious negative values of rounding size.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache
from itertools import combinations

import numpy as np

from .constraints import LinearConstraint
from .errors import DegenerateConstraint, DimensionMismatch

DEFAULT_TOLERANCE = 1e-6

# ||g||^2 below this is treated as a zero coefficient vector.
_ZERO_G = 1e-30


@dataclass(frozen=True)
class QpProblem:
    u_hat: np.ndarray
    constraints: list[LinearConstraint]


@dataclass(frozen=True)
class Feasible:
    u: np.ndarray
    active_set: tuple[int, ...]


@dataclass(frozen=True)
class Infeasible:
    certificate: float  # minimum achievable worst violation, > tolerance


QpOutcome = Feasible | Infeasible


@lru_cache(maxsize=64)
def _triu(n: int):
    return np.triu_indices(n, 1)


@lru_cache(maxsize=64)
def _subsets(n: int, k: int):
    return np.array(list(combinations(range(n), k)))


def _polish(u: np.ndarray, G: np.ndarray, b: np.ndarray, gn2: np.ndarray,
            tol: float) -> np.ndarray:
    """Nudge u along constraint normals until every residual is >= 0.

    Repairs are accepted only when they succeed completely while moving u
    by at most tol; otherwise the original point is returned untouched, so
    a genuinely empty polyhedron is never papered over.
    """
    u2 = u.copy()
    for _ in range(12):
        r = G @ u2 + b
        # demand a small positive floor so re-evaluations of the same
        # expression in a different operation order stay nonnegative
        floor = 1e-14 * (np.abs(G @ u2) + np.abs(b) + 1.0)
        bad = np.where(r < floor)[0]
        if bad.size == 0:
            if float(np.linalg.norm(u2 - u)) <= tol:
                return u2
            return u
        if float(r[bad].min()) < -tol:
            return u
        # lift every floor-violating residual at once: a joint step over the
        # offending normals handles near-antiparallel pairs that a
        # one-at-a-time nudge would ping-pong between
        target = 2.0 * floor[bad] - r[bad]
        if bad.size == 1:
            i = bad[0]
            du = (target[0] / gn2[i]) * G[i]
        elif bad.size == 2 and u.size == 2:
            a, c = G[bad[0]], G[bad[1]]
            det = a[0] * c[1] - a[1] * c[0]
            if abs(det) < 1e-16 * math.sqrt(gn2[bad[0]] * gn2[bad[1]]):
                return u
            du = np.array([
                (target[0] * c[1] - target[1] * a[1]) / det,
                (target[1] * a[0] - target[0] * c[0]) / det,
            ])
        else:
            du, *_ = np.linalg.lstsq(G[bad], target, rcond=None)
        if not np.all(np.isfinite(du)) or float(np.linalg.norm(du)) > tol:
            return u
        u2 = u2 + du
    return u


def _candidates(u_hat: np.ndarray, G: np.ndarray, b: np.ndarray,
                gn2: np.ndarray, W: np.ndarray) -> np.ndarray:
    """Projection candidates from working set W, deterministic order:
    u_hat, single-constraint projections, 2D pair intersections (refined)."""
    d = u_hat.size
    GW, bW, gn2W = G[W], b[W], gn2[W]
    cands = [u_hat[None, :]]
    t = (-bW - GW @ u_hat) / gn2W
    cands.append(u_hat[None, :] + t[:, None] * GW)
    nw = len(W)
    if d == 2 and nw >= 2:
        kk, ll = _triu(nw)
        a, c = GW[kk], GW[ll]
        det = a[:, 0] * c[:, 1] - a[:, 1] * c[:, 0]
        ok = np.abs(det) > 1e-14 * np.sqrt(gn2W[kk] * gn2W[ll])
        if np.any(ok):
            ak, al = a[ok], c[ok]
            bk, bl = bW[kk[ok]], bW[ll[ok]]
            dt = det[ok]
            ux = (-bk * al[:, 1] + bl * ak[:, 1]) / dt
            uy = (-bl * ak[:, 0] + bk * al[:, 0]) / dt
            # one refinement pass against the same 2x2 systems
            rk = -bk - (ak[:, 0] * ux + ak[:, 1] * uy)
            rl = -bl - (al[:, 0] * ux + al[:, 1] * uy)
            ux = ux + (rk * al[:, 1] - rl * ak[:, 1]) / dt
            uy = uy + (rl * ak[:, 0] - rk * al[:, 0]) / dt
            cands.append(np.stack([ux, uy], axis=1))
    return np.concatenate(cands, axis=0)


def _phase1_points(G: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Candidate minimizers of the worst violation max_k(-g_k.u - b_k).

    Vertices of the epigraph LP in (u, s): d+1 active constraints, solved
    with one refinement pass. Exactly antiparallel coefficient pairs in 2D
    (singular as triples) contribute their closed-form optimum point.
    """
    n, d = G.shape
    k = d + 1
    pts = []
    if n >= k:
        idx = _subsets(n, k)
        A = np.concatenate([G[idx], np.ones((len(idx), k, 1))], axis=2)
        rhs = -b[idx][..., None]
        dets = np.linalg.det(A)
        ok = np.abs(dets) > 1e-300
        if np.any(ok):
            Aok, rok = A[ok], rhs[ok]
            z = np.linalg.solve(Aok, rok)
            z = z + np.linalg.solve(Aok, rok - Aok @ z)
            pts.append(z[:, :d, 0])
    if d == 2 and n >= 2:
        norms = np.sqrt(np.einsum("ij,ij->i", G, G))
        U = G / norms[:, None]
        kk, ll = _triu(n)
        S = U[kk] + U[ll]
        anti = np.einsum("ij,ij->i", S, S) < 1e-18
        if np.any(anti):
            ka, la = kk[anti], ll[anti]
            # along the shared direction e = U[ka]: worst violation of the
            # pair is minimized at p = (b_l/n_l - b_k/n_k) / 2 on that axis
            p = (b[la] / norms[la] - b[ka] / norms[ka]) / 2.0
            pts.append(U[ka] * p[:, None])
    if not pts:
        return np.zeros((0, d))
    return np.concatenate(pts, axis=0)


def _phase1_best(G: np.ndarray, b: np.ndarray):
    """Best vertex of the phase-1 epigraph: (point, its true worst violation)."""
    pts = _phase1_points(G, b)
    if len(pts) == 0:
        return None, np.inf
    viols = -(pts @ G.T + b).min(axis=1)
    i = int(np.argmin(viols))
    return pts[i], float(viols[i])


def _phase1_cutting(G: np.ndarray, b: np.ndarray, seed: np.ndarray):
    """Cutting-plane minimization of the worst violation.

    Enumerates epigraph vertices of a small working subset only; the subset
    optimum is a lower bound of the full optimum, so when the subset point's
    full worst violation matches it the point is globally optimal. Returns
    (point, violation) where the violation is always the true value at the
    point (an achievable upper bound), or (None, inf) when the loop stalls.
    """
    n, d = G.shape
    if n <= d + 2:
        return _phase1_best(G, b)
    W = np.argsort(G @ seed + b)[: d + 1]
    for _ in range(n):
        pt, lo = _phase1_best(G[W], b[W])
        if pt is None:
            return None, np.inf
        r = G @ pt + b
        full = -float(r.min())
        if full <= lo + 1e-12 * (1.0 + abs(lo)):
            return pt, full
        if full <= 0.0:
            return pt, full
        worst = int(np.argmin(r))
        if worst in W:
            return None, np.inf
        W = np.append(W, worst)
    return None, np.inf


def project(u_hat: np.ndarray, G: np.ndarray, b: np.ndarray,
            tol: float = DEFAULT_TOLERANCE):
    """Core routine on arrays: returns (u, active_set) or (None, certificate).

    G has one row per constraint; rows with a zero coefficient vector are
    vacuous when their offset is >= -tol and certify infeasibility otherwise.
    """
    u_hat = np.asarray(u_hat, dtype=np.float64)
    G = np.asarray(G, dtype=np.float64)
    b = np.asarray(b, dtype=np.float64)
    d = u_hat.size
    if G.ndim != 2 or G.shape[1] != d:
        raise DimensionMismatch(f"constraint matrix {G.shape} vs input dim {d}")

    gn2 = np.einsum("ij,ij->i", G, G)
    orig = np.arange(len(b))
    zero = gn2 <= _ZERO_G
    if np.any(zero):
        worst = float(np.max(-b[zero]))
        if worst > tol:
            return None, worst
        G, b, gn2, orig = G[~zero], b[~zero], gn2[~zero], orig[~zero]
    n = len(b)
    if n == 0:
        return u_hat.copy(), ()

    r0 = G @ u_hat + b
    if float(r0.min()) >= 0.0:
        # demand the same rounding floor as _polish before trusting u_hat,
        # so re-evaluation of the residuals in any operation order stays >= 0
        s0 = np.abs(G @ u_hat) + np.abs(b) + 1.0
        if float((r0 - 1e-14 * s0).min()) >= 0.0:
            return u_hat.copy(), ()
        u = _polish(u_hat.copy(), G, b, gn2, tol)
        r = G @ u + b
        return u, tuple(orig[np.abs(r) <= tol])

    W = np.where(r0 < 0.0)[0]
    best_cand = None
    for _ in range(n):
        C = _candidates(u_hat, G, b, gn2, W)
        R = C @ G.T + b
        feasW = R[:, W].min(axis=1) >= -tol
        if not np.any(feasW):
            break  # even the relaxation is infeasible
        dist2 = np.einsum("ij,ij->i", C - u_hat, C - u_hat)
        dist2 = np.where(feasW, dist2, np.inf)
        i = int(np.argmin(dist2))
        viol = -float(R[i].min())
        best_cand = (C[i], viol)
        if viol <= tol:
            u = _polish(C[i].copy(), G, b, gn2, tol)
            r = G @ u + b
            return u, tuple(orig[np.abs(r) <= tol])
        grow = np.where(R[i] < -tol)[0]
        W = np.union1d(W, grow)

    # no exactly-feasible point: look for the least achievable worst
    # violation, cheaply first, then by full vertex enumeration before any
    # infeasibility verdict
    seed = best_cand[0] if best_cand is not None else u_hat
    pt_fast, cert_fast = _phase1_cutting(G, b, seed)
    if cert_fast <= tol:
        u = _polish(pt_fast.copy(), G, b, gn2, tol)
        r = G @ u + b
        return u, tuple(orig[np.abs(r) <= tol])

    pt_full, cert = _phase1_best(G, b)
    if best_cand is not None and best_cand[1] < cert:
        pt_full, cert = best_cand[0], best_cand[1]
    if pt_full is None:
        # fewer independent constraints than needed for a conflict
        return u_hat.copy(), ()
    if cert <= tol:
        u = _polish(pt_full.copy(), G, b, gn2, tol)
        r = G @ u + b
        return u, tuple(orig[np.abs(r) <= tol])
    return None, cert


def solve(problem: QpProblem, tolerance: float = DEFAULT_TOLERANCE) -> QpOutcome:
    """Exact Euclidean projection of u_hat onto the feasible polyhedron."""
    u_hat = np.asarray(problem.u_hat, dtype=np.float64)
    if u_hat.size not in (1, 2):
        raise DimensionMismatch(f"decision dimension must be 1 or 2, got {u_hat.size}")
    for c in problem.constraints:
        if np.asarray(c.g).size != u_hat.size:
            raise DimensionMismatch("constraint dimension differs from u_hat")
    if problem.constraints:
        G = np.stack([np.asarray(c.g, dtype=np.float64) for c in problem.constraints])
        b = np.array([c.b for c in problem.constraints], dtype=np.float64)
    else:
        G = np.zeros((0, u_hat.size))
        b = np.zeros(0)
    u, info = project(u_hat, G, b, tolerance)
    if u is None:
        return Infeasible(certificate=info)
    return Feasible(u=u, active_set=info)


def feasible_interval_1d(
    constraints: list[LinearConstraint], tolerance: float = DEFAULT_TOLERANCE
):
    """Intersection interval of 1D half-line constraints.

    Returns (lower, upper) with infinities where unbounded, or None when
    the intersection is empty. Vacuous zero-g constraints are ignored; a
    zero-g constraint with b < -tolerance raises DegenerateConstraint.
    """
    lo, hi = -np.inf, np.inf
    for c in constraints:
        g = np.asarray(c.g, dtype=np.float64)
        if g.size != 1:
            raise DimensionMismatch("feasible_interval_1d requires 1D constraints")
        gv = float(g[0])
        if gv * gv <= _ZERO_G:
            if c.b < -tolerance:
                raise DegenerateConstraint(
                    f"zero coefficient with negative offset {c.b}"
                )
            continue
        bound = -c.b / gv
        if gv > 0:
            lo = max(lo, bound)
        else:
            hi = min(hi, bound)
    if lo > hi:
        return None
    return lo, hi
