"""Dynamic-programming solver for the optimal search frontier.

The searcher who has failed on [0, l) solves

    W(l) = max_{l' in [l, j*]}  s v - C(l, l') + delta (1 - l' p) / (1 - l p) W(l')

where s = p (l' - l) / (1 - l p) is the chance this period's interval
contains the feasible project, C is the interval cost, and
(1 - l' p) / (1 - l p) = 1 - s is the chance of reaching next period with
frontier l'. States above j* = search_upper_bound never pay even without
discounting, so the grid lives on [0, j*].

Numerics: uniform grid, piecewise-linear interpolation of W between nodes,
and per-node maximization by a coarse scan over evenly spaced candidates
followed by golden-section refinement of the bracket around the best
candidate. Everything is vectorized across nodes. Tie-breaking is
deterministic and favors the smallest maximizer: the coarse scan takes the
first maximum and golden-section comparisons keep the left interval on
equal values.

Value iteration stops when successive sweeps differ by less than tol in sup
norm, then runs one extra sweep so the returned policy is the greedy policy
against the returned values.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, List, Optional, Sequence

import numpy as np

from .model import (
    BISECT_TOL,
    ArrayLike,
    ModelParams,
    _bisect_increasing,
    cost_density,
    cost_integral,
    feasible_to_search,
    search_upper_bound,
)

_INVPHI = (math.sqrt(5.0) - 1.0) / 2.0
_INVPHI2 = 1.0 - _INVPHI

# An increment is reported as active when it exceeds
# max(ACTIVITY_FLOOR, cell * ACTIVITY_CELL_FRACTION); below that the step is
# numerically indistinguishable from zero at the working grid resolution.
ACTIVITY_FLOOR = 1e-13
ACTIVITY_CELL_FRACTION = 1e-3


class ConvergenceError(RuntimeError):
    """Value iteration ran out of sweeps before reaching tol."""

    def __init__(self, message: str, history: Sequence[float]):
        super().__init__(message)
        self.history = list(history)


@dataclass(frozen=True)
class SolverConfig:
    grid_size: int = 2048
    tol: float = 1e-9
    max_iters: int = 100_000
    inner_tol: float = 1e-10
    coarse_points: int = 64

    def __post_init__(self):
        if self.grid_size < 64:
            raise ValueError(f"grid_size must be >= 64, got {self.grid_size}")
        if not (self.tol > 0.0):
            raise ValueError(f"tol must be > 0, got {self.tol}")
        if self.max_iters < 1:
            raise ValueError(f"max_iters must be >= 1, got {self.max_iters}")
        if not (self.inner_tol > 0.0):
            raise ValueError(f"inner_tol must be > 0, got {self.inner_tol}")
        if self.coarse_points < 8:
            raise ValueError(f"coarse_points must be >= 8, got {self.coarse_points}")


@dataclass
class FrontierPath:
    """Optimal frontier positions l_0 = 0, l_1, ..., l_horizon."""

    boundaries: np.ndarray
    horizon: int

    def increments(self) -> np.ndarray:
        return np.diff(self.boundaries)


@dataclass
class ActivityReport:
    """Split of a path's increments into an active prefix and a numerically idle tail."""

    threshold: float
    active_count: int
    contiguous: bool
    tail_max: float


@dataclass
class ContinuationReport:
    candidate: float
    lhs: float
    rhs: float
    violated: bool


@dataclass
class ValueSolution:
    params: ModelParams
    config: SolverConfig
    cap: float
    nodes: np.ndarray
    values: np.ndarray
    policy: np.ndarray
    iterations: int
    sup_norm_history: List[float]
    converged: bool

    @property
    def cell(self) -> float:
        return self.cap / (len(self.nodes) - 1)

    @property
    def activity_threshold(self) -> float:
        return max(ACTIVITY_FLOOR, self.cell * ACTIVITY_CELL_FRACTION)

    def value_at(self, l: ArrayLike) -> ArrayLike:
        out = np.interp(l, self.nodes, self.values)
        return float(out) if np.ndim(l) == 0 else out

    def policy_at(self, l: float) -> float:
        """Exact-state maximizer of the Bellman objective given this solution's values."""
        if not (0.0 <= l <= self.cap):
            raise ValueError(f"frontier {l} outside [0, {self.cap}]")
        arg, _ = _maximize_rows(
            self.params,
            np.array([l]),
            self.cap,
            self.nodes,
            self.values,
            self.config,
        )
        return float(min(max(arg[0], l), self.cap))


@dataclass
class BackwardSolution(ValueSolution):
    truncation: int = 0
    stage_values: List[np.ndarray] = field(default_factory=list)
    path: Optional[FrontierPath] = None


def bellman_rhs(
    params: ModelParams,
    l: ArrayLike,
    l_next: ArrayLike,
    continuation: Callable[[ArrayLike], ArrayLike],
) -> ArrayLike:
    """One-period payoff of moving the frontier from l to l_next.

    continuation maps next-period frontiers to continuation values; it is
    weighted by the survival odds (1 - l_next p) / (1 - l p) and discounted.
    l_next = l degenerates to delta * continuation(l): a pure wait.
    """
    scalar = np.ndim(l) == 0 and np.ndim(l_next) == 0
    l = np.asarray(l, dtype=float)
    l_next = np.asarray(l_next, dtype=float)
    if np.any(l < 0.0) or np.any(l_next < l) or np.any(l_next >= 1.0):
        raise ValueError("frontiers must satisfy 0 <= l <= l_next < 1")
    w = np.asarray(continuation(l_next), dtype=float)
    out = _rhs_raw(params, l, l_next, w)
    return float(out) if scalar else out


def _rhs_raw(params: ModelParams, l, l_next, w):
    """Bellman right side on raw arrays; no domain checks, continuation precomputed."""
    denom = 1.0 - l * params.p
    s = params.p * (l_next - l) / denom
    cost = cost_integral(params.cost, l, l_next)
    return s * params.v - cost + params.delta * (1.0 - l_next * params.p) / denom * w


def _interp_rhs(params: ModelParams, l, l_next, nodes, values):
    return _rhs_raw(params, l, l_next, np.interp(l_next, nodes, values))


def _maximize_rows(
    params: ModelParams,
    l: np.ndarray,
    cap: float,
    nodes: np.ndarray,
    values: np.ndarray,
    config: SolverConfig,
):
    """Maximize the Bellman objective over l' in [l_i, cap] for each row i.

    Coarse scan over coarse_points candidates, then golden-section on the
    bracket around the best candidate, run for a fixed iteration count so
    every row's bracket shrinks below inner_tol. Returns (argmax, max). The
    coarse candidate is kept when refinement cannot strictly beat it, except
    that exact ties go to the smaller frontier.
    """
    K = config.coarse_points
    w = np.linspace(0.0, 1.0, K)
    X = l[:, None] + (cap - l)[:, None] * w[None, :]
    F = _interp_rhs(params, l[:, None], X, nodes, values)
    kbest = np.argmax(F, axis=1)
    rows = np.arange(len(l))
    xc = X[rows, kbest]
    fc = F[rows, kbest]
    a = X[rows, np.maximum(kbest - 1, 0)]
    b = X[rows, np.minimum(kbest + 1, K - 1)]

    h = b - a
    hmax = float(np.max(h, initial=0.0))
    if hmax > config.inner_tol:
        n = int(math.ceil(math.log(config.inner_tol / hmax) / math.log(_INVPHI)))
        x1 = a + _INVPHI2 * h
        x2 = a + _INVPHI * h
        f1 = _interp_rhs(params, l, x1, nodes, values)
        f2 = _interp_rhs(params, l, x2, nodes, values)
        for _ in range(n):
            left = f1 >= f2
            b = np.where(left, x2, b)
            a = np.where(left, a, x1)
            h = b - a
            xnew = np.where(left, a + _INVPHI2 * h, a + _INVPHI * h)
            fnew = _interp_rhs(params, l, xnew, nodes, values)
            x1, x2, f1, f2 = (
                np.where(left, xnew, x2),
                np.where(left, x1, xnew),
                np.where(left, fnew, f2),
                np.where(left, f1, fnew),
            )
        xg = np.where(f1 >= f2, x1, x2)
        fg = np.maximum(f1, f2)
    else:
        xg, fg = xc, fc

    arg = np.where(fg > fc, xg, np.where(fg < fc, xc, np.minimum(xg, xc)))
    best = np.maximum(fg, fc)
    # b = l + (cap - l) can round one ulp past cap; keep the policy inside the state space
    return np.minimum(arg, cap), best


def _sweep(params: ModelParams, cap: float, nodes: np.ndarray, values: np.ndarray, config: SolverConfig):
    return _maximize_rows(params, nodes, cap, nodes, values, config)


def value_iteration(params: ModelParams, config: Optional[SolverConfig] = None) -> ValueSolution:
    """Solve the infinite-horizon problem by value iteration from W = 0.

    Sweeps until the sup-norm change drops below config.tol, then performs
    one extra sweep so the returned policy is greedy against the returned
    values (their Bellman residual is then below delta * tol). Raises
    ConvergenceError when max_iters sweeps are not enough; the error carries
    the sup-norm history for diagnostics.
    """
    config = config or SolverConfig()
    if not feasible_to_search(params):
        raise ValueError("searching is not worthwhile: p v <= c(0)")
    cap = search_upper_bound(params)
    nodes = np.linspace(0.0, cap, config.grid_size)
    values = np.zeros(config.grid_size)
    history: List[float] = []
    converged = False
    for _ in range(config.max_iters):
        _, new_values = _sweep(params, cap, nodes, values, config)
        diff = float(np.max(np.abs(new_values - values)))
        history.append(diff)
        values = new_values
        if diff < config.tol:
            converged = True
            break
    if not converged:
        raise ConvergenceError(
            f"no convergence after {config.max_iters} sweeps: "
            f"last sup-norm change {history[-1]:.3e} vs tol {config.tol:.3e}",
            history,
        )
    policy, final_values = _sweep(params, cap, nodes, values, config)
    history.append(float(np.max(np.abs(final_values - values))))
    return ValueSolution(
        params=params,
        config=config,
        cap=cap,
        nodes=nodes,
        values=final_values,
        policy=policy,
        iterations=len(history),
        sup_norm_history=history,
        converged=True,
    )


def final_stage_boundary(params: ModelParams, l_prev: float, cap: Optional[float] = None) -> float:
    """Optimal frontier for a last period with no continuation, from l_prev.

    The one-period objective p (l' - l) v / (1 - l p) - C(l, l') is strictly
    concave in l' (its second derivative is -c'(l') < 0), so the maximizer is
    the unique root of c(l') = p v / (1 - l_prev p), found by bisection. This
    pins the terminal boundary far more precisely than a derivative-free
    search of the flat objective could.
    """
    if cap is None:
        cap = search_upper_bound(params)
        if cap is None:
            raise ValueError("searching is not worthwhile: p v <= c(0)")
    if not (0.0 <= l_prev <= cap):
        raise ValueError(f"frontier {l_prev} outside [0, {cap}]")
    target = params.p * params.v / (1.0 - l_prev * params.p)
    f = lambda x: cost_density(params.cost, x) - target
    if f(cap) <= 0.0:
        return cap
    return _bisect_increasing(f, l_prev, cap, BISECT_TOL)


def backward_induction(
    params: ModelParams, truncation: int, config: Optional[SolverConfig] = None
) -> BackwardSolution:
    """Solve the problem truncated to `truncation` periods of search.

    Builds stage values by backward sweeps from the zero terminal function,
    then extracts the optimal frontier path from l = 0, re-maximizing at the
    exact continuous state each period. The last period of the path uses
    final_stage_boundary instead of the bracketed search.
    """
    config = config or SolverConfig()
    if truncation < 1:
        raise ValueError(f"truncation must be >= 1, got {truncation}")
    if not feasible_to_search(params):
        raise ValueError("searching is not worthwhile: p v <= c(0)")
    cap = search_upper_bound(params)
    nodes = np.linspace(0.0, cap, config.grid_size)
    stage_values = [np.zeros(config.grid_size)]
    history: List[float] = []
    policy = np.zeros(config.grid_size)
    for _ in range(truncation):
        policy, new_values = _sweep(params, cap, nodes, stage_values[-1], config)
        history.append(float(np.max(np.abs(new_values - stage_values[-1]))))
        stage_values.append(new_values)

    boundaries = np.zeros(truncation + 1)
    l = 0.0
    for t in range(1, truncation + 1):
        remaining = truncation - t
        if remaining == 0:
            lp = final_stage_boundary(params, l, cap)
        else:
            arg, _ = _maximize_rows(
                params, np.array([l]), cap, nodes, stage_values[remaining], config
            )
            lp = float(arg[0])
        l = min(max(lp, l), cap)
        boundaries[t] = l

    return BackwardSolution(
        params=params,
        config=config,
        cap=cap,
        nodes=nodes,
        values=stage_values[-1],
        policy=policy,
        iterations=truncation,
        sup_norm_history=history,
        converged=True,
        truncation=truncation,
        stage_values=stage_values,
        path=FrontierPath(boundaries, truncation),
    )


def frontier_sequence(solution: ValueSolution, horizon: int) -> FrontierPath:
    """Forward-simulate the optimal frontier from l = 0 for `horizon` periods.

    Each step re-maximizes at the exact current state rather than snapping to
    the grid, and clamps to [l, cap] so increments are never negative. Late
    increments shrink geometrically and eventually fall below the solver's
    resolution; activity_split separates the economically active prefix from
    that numerically idle tail.
    """
    if not solution.converged:
        raise ValueError("solution did not converge; no path to extract")
    if horizon < 1:
        raise ValueError(f"horizon must be >= 1, got {horizon}")
    boundaries = np.zeros(horizon + 1)
    l = 0.0
    for t in range(1, horizon + 1):
        l = solution.policy_at(l)
        boundaries[t] = l
    return FrontierPath(boundaries, horizon)


def activity_split(path: FrontierPath, threshold: float) -> ActivityReport:
    """Count leading increments above threshold and check the tail stays below."""
    inc = path.increments()
    above = inc > threshold
    active = int(np.argmin(above)) if not above.all() else len(inc)
    tail = inc[active:]
    tail_max = float(tail.max()) if len(tail) else 0.0
    return ActivityReport(
        threshold=threshold,
        active_count=active,
        contiguous=not bool((tail > threshold).any()),
        tail_max=tail_max,
    )


def continuation_inequality_check(
    params: ModelParams,
    l_prev: float,
    l_last: float,
    candidates: Sequence[float],
) -> List[ContinuationReport]:
    """Test whether stopping at l_last beats a one-period extension to each candidate.

    A plan that stops at l_last after coming from l_prev is undermined by a
    candidate extension l_c whenever

        c(l_last) / c(l_c)  >=  (1 - l_last p) / (1 - l_prev p),

    which always happens for l_c close enough to l_last: the left side tends
    to 1 while the right side stays strictly below it. Each report carries
    both sides so callers can see the margin.
    """
    if not (0.0 <= l_prev < l_last < 1.0):
        raise ValueError("need 0 <= l_prev < l_last < 1")
    rhs = (1.0 - l_last * params.p) / (1.0 - l_prev * params.p)
    c_last = cost_density(params.cost, l_last)
    reports = []
    for cand in candidates:
        if not (l_last < cand < 1.0):
            raise ValueError(f"candidate {cand} must lie in (l_last, 1)")
        lhs = c_last / cost_density(params.cost, cand)
        reports.append(ContinuationReport(candidate=float(cand), lhs=float(lhs), rhs=float(rhs), violated=bool(lhs >= rhs)))
    return reports


def euler_residual(
    params: ModelParams,
    solution: ValueSolution,
    l: float,
    step: Optional[float] = None,
) -> Optional[float]:
    """Central-difference derivative of the Bellman objective at the chosen policy.

    Near zero for interior policies; returns None when the policy sits too
    close to l or the cap for a symmetric difference to fit, in which case
    the first-order condition does not apply.
    """
    if not (0.0 <= l < solution.cap):
        raise ValueError(f"frontier {l} outside [0, cap)")
    lp = solution.policy_at(l)
    h = step if step is not None else 0.5 * solution.cell
    if lp - l < 2.0 * h or solution.cap - lp < 2.0 * h:
        return None
    fplus = bellman_rhs(params, l, lp + h, solution.value_at)
    fminus = bellman_rhs(params, l, lp - h, solution.value_at)
    return float((fplus - fminus) / (2.0 * h))
