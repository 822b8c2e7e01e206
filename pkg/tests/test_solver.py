import math

import numpy as np
import pytest
from scipy.optimize import minimize_scalar

from innosearch import (
    ConvergenceError,
    CostModel,
    FrontierPath,
    ModelParams,
    SolverConfig,
    activity_split,
    backward_induction,
    bellman_rhs,
    continuation_inequality_check,
    cost_integral,
    euler_residual,
    final_stage_boundary,
    frontier_sequence,
    myopic_boundary,
    search_upper_bound,
    value_iteration,
)
from innosearch.model import cost_density

# frozen canonical results at grid 2048, tol 1e-9 (see conftest for the instance)
W0_CANONICAL = 0.3293771377650821
L1_CANONICAL = 0.35126426490956847
# p l v - C(0, l) at l = 1/2: 1/2 - (ln 2 - 1/2) = 1 - ln 2
ONE_PERIOD_AT_HALF = 0.3068528194400547
# s v - C(1/4, 1/2) = 2/7 - (ln(3/2) - 1/4)
RHS_QUARTER_HALF = 0.13024917760612133


# ------------------------------------------------------------- bellman_rhs


def test_rhs_pure_wait_is_discounted_continuation(base_params):
    assert bellman_rhs(base_params, 0.3, 0.3, lambda x: 7.0) == pytest.approx(
        0.9 * 7.0, abs=1e-14
    )


def test_rhs_one_period_frozen(base_params):
    got = bellman_rhs(base_params, 0.0, 0.5, lambda x: 0.0)
    assert got == pytest.approx(ONE_PERIOD_AT_HALF, abs=1e-14)


def test_rhs_interior_frozen(base_params):
    got = bellman_rhs(base_params, 0.25, 0.5, lambda x: 0.0)
    assert got == pytest.approx(RHS_QUARTER_HALF, abs=1e-14)
    # same number assembled from its parts
    s = 0.5 * 0.25 / (1.0 - 0.125)
    rebuilt = s * 2.0 - cost_integral(base_params.cost, 0.25, 0.5)
    assert got == pytest.approx(rebuilt, abs=1e-15)


def test_rhs_rejects_bad_frontiers(base_params):
    with pytest.raises(ValueError):
        bellman_rhs(base_params, 0.5, 0.4, lambda x: 0.0)
    with pytest.raises(ValueError):
        bellman_rhs(base_params, 0.5, 1.0, lambda x: 0.0)


# --------------------------------------------------------- value iteration


def test_canonical_regression(base_solution):
    sol = base_solution
    assert sol.converged
    assert sol.iterations < 100
    assert sol.values[0] == pytest.approx(W0_CANONICAL, abs=1e-9)
    assert sol.policy_at(0.0) == pytest.approx(L1_CANONICAL, abs=1e-6)
    assert sol.cap == pytest.approx(2.0 - math.sqrt(2.0), abs=1e-10)


def test_agreement_with_long_truncated_horizon(base_params, base_solution):
    # an independent route to the same function: 500 backward sweeps from
    # zero on a finer grid; the tail the truncation drops is worth < 1e-9
    truncated = backward_induction(base_params, 500, SolverConfig(grid_size=4096))
    probes = np.linspace(0.0, base_solution.cap * 0.99, 23)
    gap = np.max(np.abs(base_solution.value_at(probes) - truncated.value_at(probes)))
    assert gap < 1e-4


def test_near_myopic_when_future_worthless():
    params = ModelParams(0.5, 2.0, 1e-6, CostModel.reciprocal(0.0, 1.0))
    sol = value_iteration(params, SolverConfig(grid_size=2048))
    assert sol.policy_at(0.0) == pytest.approx(0.5, abs=1e-4)


def test_first_boundary_stops_short_of_myopic(base_solution):
    # waiting has option value: the marginal project can be searched next
    # period instead, so the first interval ends below the one-shot boundary
    q = myopic_boundary(base_solution.params)
    assert 0.0 < base_solution.policy_at(0.0) < q
    rng = np.random.default_rng(13)
    for i in range(6):
        c0 = float(rng.uniform(0.0, 0.2))
        k = float(rng.uniform(0.5, 2.0))
        cost = CostModel.reciprocal(c0, k) if i % 2 else CostModel.logarithmic(c0, k)
        p = float(rng.uniform(0.3, 0.7))
        params = ModelParams(p, (c0 + 1.0) / p, 0.9, cost)
        sol = value_iteration(params, SolverConfig(grid_size=512))
        assert sol.policy_at(0.0) < myopic_boundary(params) + 1e-12


def test_value_shape(base_solution):
    w = base_solution.values
    assert np.all(w >= -1e-12)
    assert w[-1] == pytest.approx(0.0, abs=1e-9)
    assert np.all(np.diff(w) <= 1e-12)


def test_policy_bounds(base_solution):
    sol = base_solution
    assert np.all(sol.policy >= sol.nodes - 1e-12)
    assert np.all(sol.policy <= sol.cap + 1e-12)
    # the target frontier should not step backwards by more than grid noise
    assert np.all(np.diff(sol.policy) >= -sol.cell)


def test_contraction_history(base_solution):
    h = base_solution.sup_norm_history
    ratios = np.array(h[1:]) / np.array(h[:-1])
    assert np.all(ratios[2:] <= base_solution.params.delta + 0.01)


def test_bellman_residual_everywhere(base_solution):
    sol = base_solution
    rhs = bellman_rhs(sol.params, sol.nodes, sol.policy, sol.value_at)
    assert np.max(np.abs(rhs - sol.values)) <= 10.0 * sol.config.tol


def test_runs_out_of_sweeps(base_params):
    with pytest.raises(ConvergenceError) as err:
        value_iteration(base_params, SolverConfig(max_iters=3))
    assert len(err.value.history) == 3


def test_infeasible_instance_rejected():
    params = ModelParams(0.1, 1.0, 0.9, CostModel.reciprocal(0.2, 1.0))
    with pytest.raises(ValueError):
        value_iteration(params)


def test_scale_invariance(base_params):
    lam = 10.0
    scaled = ModelParams(
        base_params.p,
        base_params.v * lam,
        base_params.delta,
        CostModel.reciprocal(base_params.cost.c0 * lam, base_params.cost.k * lam),
    )
    cfg = SolverConfig(grid_size=2048, tol=1e-12)
    cfg_scaled = SolverConfig(grid_size=2048, tol=1e-12 * lam)
    sol = value_iteration(base_params, cfg)
    sol_scaled = value_iteration(scaled, cfg_scaled)
    assert sol_scaled.values[0] / sol.values[0] == pytest.approx(lam, abs=1e-8)
    assert np.max(np.abs(sol_scaled.policy - sol.policy)) < sol.cell


def test_solver_config_validation():
    with pytest.raises(ValueError):
        SolverConfig(grid_size=32)
    with pytest.raises(ValueError):
        SolverConfig(tol=0.0)
    with pytest.raises(ValueError):
        SolverConfig(coarse_points=4)
    with pytest.raises(ValueError):
        SolverConfig(max_iters=0)


# ------------------------------------------------------- truncated horizon


def test_single_period_is_myopic(base_params):
    bsol = backward_induction(base_params, 1, SolverConfig(grid_size=2048))
    assert bsol.path.boundaries[1] == pytest.approx(0.5, abs=1e-10)
    assert bsol.stage_values[1][0] == pytest.approx(ONE_PERIOD_AT_HALF, abs=1e-9)


def test_forced_second_period_boundary(base_params):
    # from l = 1/2 the closing period solves c(l') = p v / (1 - p/2) = 4/3,
    # so l' = 4/7 for the reciprocal density
    assert final_stage_boundary(base_params, 0.5) == pytest.approx(4.0 / 7.0, abs=1e-9)


def test_more_periods_always_help(base_params):
    bsol = backward_induction(base_params, 10, SolverConfig(grid_size=1024))
    at_zero = [bsol.stage_values[t][0] for t in range(1, 11)]
    assert all(b > a for a, b in zip(at_zero, at_zero[1:]))


def test_final_stage_first_order_condition(base_params):
    p, v = base_params.p, base_params.v
    for truncation in (1, 2, 5):
        bsol = backward_induction(base_params, truncation, SolverConfig(grid_size=2048))
        l_prev, l_last = bsol.path.boundaries[-2], bsol.path.boundaries[-1]
        resid = cost_density(base_params.cost, l_last) - p * v / (1.0 - l_prev * p)
        assert abs(resid) < 1e-8


def test_two_period_value_against_nested_closed_form(base_params):
    # grid-free reference: the closing stage has a closed-form boundary for
    # the reciprocal density, leaving a one-dimensional concave outer problem
    p, v, delta = base_params.p, base_params.v, base_params.delta
    cap = search_upper_bound(base_params)

    def tail_value(l1):
        pv_post = p * v / (1.0 - l1 * p)
        l2 = min(pv_post / (pv_post + 1.0), cap)
        s = p * (l2 - l1) / (1.0 - l1 * p)
        return s * v - cost_integral(base_params.cost, l1, l2)

    def objective(l1):
        head = p * l1 * v - cost_integral(base_params.cost, 0.0, l1)
        return head + delta * (1.0 - l1 * p) * tail_value(l1)

    opt = minimize_scalar(
        lambda x: -objective(x), bounds=(0.0, cap), method="bounded", options={"xatol": 1e-12}
    )
    bsol = backward_induction(base_params, 2, SolverConfig(grid_size=2048))
    assert bsol.stage_values[2][0] == pytest.approx(-opt.fun, abs=1e-6)
    assert bsol.path.boundaries[1] == pytest.approx(opt.x, abs=5e-4)


def test_backward_rejects_bad_truncation(base_params):
    with pytest.raises(ValueError):
        backward_induction(base_params, 0)


# ----------------------------------------------------------- path extraction


def test_frontier_sequence_shape(base_solution, base_path):
    path = base_path
    assert path.boundaries[0] == 0.0
    assert len(path.boundaries) == path.horizon + 1
    inc = path.increments()
    assert np.all(inc >= 0.0)
    assert np.all(path.boundaries <= base_solution.cap + 1e-12)
    # the path walks most of the way to the cap within 200 periods
    assert base_solution.cap - path.boundaries[-1] < 10 * base_solution.cell


def test_activity_split_synthetic():
    path = FrontierPath(np.array([0.0, 0.3, 0.5, 0.5 + 1e-12, 0.5 + 2e-12]), 4)
    report = activity_split(path, 1e-6)
    assert report.active_count == 2
    assert report.contiguous
    assert report.tail_max < 1e-11

    broken = FrontierPath(np.array([0.0, 0.3, 0.3 + 1e-12, 0.5]), 3)
    report = activity_split(broken, 1e-6)
    assert report.active_count == 1
    assert not report.contiguous
    assert report.tail_max == pytest.approx(0.2 - 1e-12, abs=1e-9)


def test_stopped_plan_is_underbid_nearby(base_params):
    # stopping at 1/2 for good cannot be optimal: a one-period extension to
    # 0.51 already pays better, while a distant candidate does not
    near, far = continuation_inequality_check(base_params, 0.0, 0.5, [0.51, 0.99])
    assert near.violated
    assert near.lhs == pytest.approx(0.49 / 0.51, abs=1e-12)
    assert near.rhs == pytest.approx(0.75, abs=1e-15)
    assert not far.violated
    assert far.lhs == pytest.approx(1.0 / 99.0, abs=1e-12)
    with pytest.raises(ValueError):
        continuation_inequality_check(base_params, 0.0, 0.5, [0.4])
    with pytest.raises(ValueError):
        continuation_inequality_check(base_params, 0.6, 0.5, [0.7])


# ------------------------------------------------------------------- euler


def test_one_shot_marginal_condition(base_params):
    # with no continuation the optimum is exactly the myopic boundary
    q = myopic_boundary(base_params)
    h = 1e-6
    f = lambda x: bellman_rhs(base_params, 0.0, x, lambda _: 0.0)
    assert abs(f(q + h) - f(q - h)) / (2 * h) < 1e-8


def test_euler_residual_small_on_path(base_params, base_solution, base_path):
    for l in (0.0, float(base_path.boundaries[1]), float(base_path.boundaries[3])):
        resid = euler_residual(base_params, base_solution, l)
        assert resid is not None
        assert abs(resid) < 1e-3


def test_perturbed_policy_has_larger_gradient(base_params, base_solution):
    sol = base_solution
    resid = euler_residual(base_params, sol, 0.0)
    lp = sol.policy_at(0.0) + 0.05
    h = 0.5 * sol.cell
    slope = (
        bellman_rhs(base_params, 0.0, lp + h, sol.value_at)
        - bellman_rhs(base_params, 0.0, lp - h, sol.value_at)
    ) / (2 * h)
    assert abs(slope) > abs(resid)
    assert slope < 0.0


def test_euler_not_applicable_at_boundary(base_params, base_solution):
    near_cap = base_solution.cap * (1.0 - 1e-7)
    assert euler_residual(base_params, base_solution, near_cap) is None
    with pytest.raises(ValueError):
        euler_residual(base_params, base_solution, base_solution.cap)
