"""Simulation engine: determinism, symmetry, bookkeeping, batch sweeps.

The vectorized all-pairs tables must agree with the scalar constraint
functions, and the batched projection must agree with the single-robot
QP solver; both are pinned here on random states.
"""

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from swarmcbf.barriers import CbfParams
from swarmcbf.constraints import (StrategyKind, constraint_previous,
                                  constraint_proposed, constraint_symmetric,
                                  fallback_input)
from swarmcbf.dynamics import PhysicalParams, RobotState, pair_state
from swarmcbf.engine import (Scenario, _perturbed_initial, _project_batch,
                             make_1d_scenario, make_circle_scenario,
                             robot_constraints, run_batch, run_scenario)
from swarmcbf.errors import SpacingTooTight, ValidationError
from swarmcbf.qp import project

CBF = CbfParams(r_s=0.5, gamma=2.0, t_c=0.025)


def small_circle(strategy, gamma=1.0, steps=60):
    sc = make_circle_scenario(6, 0.5, strategy=strategy)
    from dataclasses import replace
    return replace(sc, cbf=CbfParams(r_s=0.08, gamma=gamma, t_c=0.025),
                   steps=steps)


def test_run_scenario_deterministic():
    sc = small_circle(StrategyKind.PROPOSED_ASYMMETRIC)
    a = run_scenario(sc)
    b = run_scenario(sc)
    for ra, rb in zip(a.records, b.records):
        assert np.array_equal(ra.positions, rb.positions)
        assert np.array_equal(ra.velocities, rb.velocities)
        assert np.array_equal(ra.applied_u, rb.applied_u)
        assert ra.min_constraint_lhs == rb.min_constraint_lhs
    assert a.no_solution_steps == b.no_solution_steps


@pytest.mark.parametrize("strategy", list(StrategyKind))
def test_1d_mirror_symmetry(strategy):
    # x1 = -x3 initially and the dynamics are mirror-invariant
    trace = run_scenario(make_1d_scenario(strategy=strategy))
    for r in trace.records:
        assert abs(r.positions[0, 0] + r.positions[2, 0]) < 1e-9
        assert abs(r.velocities[0, 0] + r.velocities[2, 0]) < 1e-9
        assert abs(r.positions[1, 0]) < 1e-9


def test_no_solution_steps_matches_records():
    trace = run_scenario(make_1d_scenario(strategy=StrategyKind.SYMMETRIC))
    bad = sum(1 for r in trace.records if not np.all(r.feasible))
    assert trace.no_solution_steps == bad
    assert bad > 0
    first = next(r.t for r in trace.records if not np.all(r.feasible))
    assert trace.first_infeasible_time == first


def test_fallback_applied_on_infeasible_steps():
    sc = make_1d_scenario(strategy=StrategyKind.SYMMETRIC)
    trace = run_scenario(sc)
    seen = 0
    for r in trace.records:
        for i in range(3):
            if not r.feasible[i]:
                expect = fallback_input(r.velocities[i], sc.cbf, sc.params.m)
                assert np.array_equal(r.applied_u[i], expect)
                seen += 1
    assert seen > 0


def test_min_lhs_is_lhs_at_applied_input():
    sc = small_circle(StrategyKind.SYMMETRIC, gamma=5.0, steps=80)
    trace = run_scenario(sc)
    for r in trace.records:
        vals = []
        for i in range(sc.n_robots):
            cons = robot_constraints(r.positions, r.velocities, i, sc.cbf,
                                     sc.params.m, sc.strategy)
            vals += [c.lhs(r.applied_u[i]) for c in cons]
        assert abs(min(vals) - r.min_constraint_lhs) < 1e-9


@pytest.mark.parametrize("strategy", list(StrategyKind))
def test_robot_constraints_match_scalar_functions(strategy):
    rng = np.random.default_rng(7)
    P = rng.uniform(-3, 3, (5, 2))
    V = rng.uniform(-2, 2, (5, 2))
    robots = [RobotState(p, v) for p, v in zip(P, V)]
    for i in range(5):
        cons = robot_constraints(P, V, i, CBF, 1.3, strategy)
        others = [j for j in range(5) if j != i]
        for c, j in zip(cons, others):
            q = pair_state(robots[i], robots[j])
            if strategy is StrategyKind.SYMMETRIC:
                ref = constraint_symmetric(q, CBF, 1.3)
            elif strategy is StrategyKind.PROPOSED_ASYMMETRIC:
                ref = constraint_proposed(V[i], q, CBF, 1.3)
            else:
                ref = constraint_previous(V[i], V[j], q, CBF, 1.3)
            assert np.allclose(c.g, ref.g, atol=1e-12)
            assert abs(c.b - ref.b) < 1e-9 * (1 + abs(ref.b))


@settings(max_examples=60, deadline=None)
@given(st.integers(0, 2**31 - 1), st.integers(3, 8))
def test_project_batch_agrees_with_project(seed, nc):
    rng = np.random.default_rng(seed)
    G = rng.normal(size=(1, nc, 2))
    b = rng.normal(size=(1, nc)) * 0.5
    u = rng.normal(size=(1, 2))
    r0 = np.einsum("rjd,rd->rj", G, u) + b
    U, rowmin, ok, acts = _project_batch(u, G, b, r0)
    ref_u, info = project(u[0], G[0], b[0], 1e-6)
    if ok[0]:
        # accepted point must be feasible and no farther than the QP answer
        assert rowmin[0] >= 0.0
        if ref_u is not None:
            du = np.linalg.norm(U[0] - u[0])
            dref = np.linalg.norm(ref_u - u[0])
            assert du <= dref + 1e-6


def test_perturbed_initial_reproducible():
    sc = make_circle_scenario(8, 0.8, seed=42)
    P1, V1 = _perturbed_initial(sc, 1, 3)
    P2, V2 = _perturbed_initial(sc, 1, 3)
    assert np.array_equal(P1, P2) and np.array_equal(V1, V2)
    P3, _ = _perturbed_initial(sc, 1, 4)
    assert not np.array_equal(P1, P3)
    assert np.all(np.abs(P1 - sc.positions) <= sc.perturbation)


def test_scenario_validation():
    p = PhysicalParams(m=1.0, k=1.0, c=0.1, goal=np.zeros(2))
    good = dict(params=p, cbf=CBF, strategy=StrategyKind.SYMMETRIC)
    with pytest.raises(ValidationError):
        Scenario(positions=np.zeros((2, 2)), velocities=np.zeros((3, 2)), **good)
    with pytest.raises(ValidationError):  # overlap below r_s
        Scenario(positions=np.array([[0.0, 0.0], [0.1, 0.0]]),
                 velocities=np.zeros((2, 2)), **good)
    with pytest.raises(ValidationError):
        Scenario(positions=np.array([[0.0, 0.0], [3.0, 0.0]]),
                 velocities=np.zeros((2, 2)), steps=0, **good)
    with pytest.raises(ValidationError):
        Scenario(positions=np.array([[0.0, 0.0], [3.0, 0.0]]),
                 velocities=np.zeros((2, 2)), dt=0.0, **good)
    with pytest.raises(ValidationError):  # 1D robots, 2D goal
        Scenario(positions=np.array([[0.0], [3.0]]),
                 velocities=np.zeros((2, 1)), **good)


def test_circle_spacing_guard():
    with pytest.raises(SpacingTooTight):
        make_circle_scenario(200, 1.0)
    sc = make_circle_scenario(20, 1.0)
    d01 = np.linalg.norm(sc.positions[0] - sc.positions[1])
    assert d01 > sc.cbf.r_s


def test_run_batch_report_shape():
    base = small_circle(StrategyKind.SYMMETRIC, steps=120)
    rep = run_batch(base, trials=3, gammas=[1.0, 5.0])
    assert rep.strategy is StrategyKind.SYMMETRIC
    assert rep.gammas == [1.0, 5.0]
    assert rep.trials == 3
    for g in rep.gammas:
        rows = rep.summaries[g]
        assert len(rows) == 3
        bad = sum(1 for r in rows if r.no_solution_steps > 0)
        assert rep.no_solution_trials[g] == bad
        assert 0 <= rep.fatal_trials[g] <= 3
        for r in rows:
            assert r.min_lhs_series.shape == (r.steps_run,)
            assert r.min_distance_series.shape == (r.steps_run,)


def test_run_batch_trial_independent_of_stop_mode():
    base = small_circle(StrategyKind.PROPOSED_ASYMMETRIC, steps=50)
    a = run_batch(base, trials=2, gammas=[1.0], stop_after_infeasible=None)
    b = run_batch(base, trials=2, gammas=[1.0], stop_after_infeasible=None)
    for ra, rb in zip(a.summaries[1.0], b.summaries[1.0]):
        assert np.array_equal(ra.min_lhs_series, rb.min_lhs_series)


def test_proposed_run_keeps_barriers_nonnegative():
    trace = run_scenario(make_1d_scenario(strategy=StrategyKind.PROPOSED_ASYMMETRIC))
    assert trace.no_solution_steps == 0
    for r in trace.records:
        assert r.pair_h.min() > -1e-3
        assert r.pair_h2.min() > -1e-3
    assert trace.min_distance_series.min() >= CBF.r_s - 1e-9
