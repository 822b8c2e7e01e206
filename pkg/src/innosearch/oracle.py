"""Exact finite benchmark for the continuum search problem.

Splitting [0, 1) into N equal slots of mass 1/N turns the search problem
into a finite one: an assignment sends each slot to a period in 1..T or
leaves it unsearched (digit 0). Expected discounted payoff of an assignment
with period masses m_t, period costs K_t, and prior searched mass M_{t-1}:

    sum_t delta^(t-1) [ p m_t v - (1 - p M_{t-1}) K_t ]

best_assignment enumerates every one of the (T+1)^N assignments, with no
pruning and no dynamic-programming shortcut, so it is usable as an
independent check on the continuum solver. The only concession to speed is
shared arithmetic: assignments are split into a high-slot half and a
low-slot half, per-half mass and cost profiles are tabulated once, and the
cross terms between halves reduce to two matrix products evaluated in
blocks. Every assignment still gets its exact value.

Assignments are ordered by their mixed-radix code with slot 0 most
significant, so numeric order coincides with lexicographic order of the
schedule tuple; the reported maximizer is the lexicographically earliest.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from typing import Optional, Tuple

import numpy as np

from .model import ModelParams, CostFamily, cost_integral
from .solver import BackwardSolution

DEFAULT_BUDGET = 10_000_000


class BudgetExceededError(RuntimeError):
    """Enumeration would exceed the configured assignment budget."""

    def __init__(self, total: int, budget: int):
        super().__init__(
            f"enumeration needs {total} assignment evaluations, budget is {budget}"
        )
        self.total = total
        self.budget = budget


@dataclass(frozen=True, eq=False)
class DiscreteInstance:
    """N-slot, T-period instance: slot i costs slot_costs[i] and has mass 1/N."""

    p: float
    v: float
    delta: float
    horizon: int
    slot_costs: np.ndarray

    def __post_init__(self):
        if not (0.0 < self.p < 1.0):
            raise ValueError(f"p must lie in (0, 1), got {self.p}")
        if not (self.v > 0.0 and math.isfinite(self.v)):
            raise ValueError(f"v must be finite and > 0, got {self.v}")
        if not (0.0 < self.delta < 1.0):
            raise ValueError(f"delta must lie in (0, 1), got {self.delta}")
        if self.horizon < 1:
            raise ValueError(f"horizon must be >= 1, got {self.horizon}")
        costs = np.asarray(self.slot_costs, dtype=float)
        object.__setattr__(self, "slot_costs", costs)
        if costs.ndim != 1 or len(costs) < 1:
            raise ValueError("slot_costs must be a non-empty vector")
        if np.any(costs < 0.0) or np.isnan(costs).any():
            raise ValueError("slot costs must be non-negative")
        if len(costs) > 1 and not np.all(np.diff(costs) > 0.0):
            raise ValueError("slot costs must be strictly increasing")

    @property
    def slots(self) -> int:
        return len(self.slot_costs)

    @classmethod
    def from_params(cls, params: ModelParams, slots: int, horizon: int) -> "DiscreteInstance":
        """Discretize params into `slots` equal cells.

        The last cell [1 - 1/N, 1) is integrated in closed form: the
        reciprocal density is not integrable there (cost +inf, the slot can
        never be worth searching), the logarithmic one is.
        """
        if slots < 1:
            raise ValueError(f"slots must be >= 1, got {slots}")
        edges = np.arange(slots + 1) / slots
        costs = np.empty(slots)
        if slots > 1:
            costs[:-1] = cost_integral(params.cost, edges[:-2], edges[1:-1])
        a = edges[-2]
        c = params.cost
        if c.family is CostFamily.RECIPROCAL:
            costs[-1] = math.inf
        else:
            costs[-1] = c.c0 * (1.0 - a) + c.k * ((1.0 - a) - (1.0 - a) * math.log1p(-a))
        return cls(params.p, params.v, params.delta, horizon, costs)


@dataclass(frozen=True)
class Assignment:
    """Slot-to-period schedule; digit 0 means the slot is never searched."""

    schedule: Tuple[int, ...]

    def __post_init__(self):
        sched = tuple(int(d) for d in self.schedule)
        object.__setattr__(self, "schedule", sched)
        if any(d < 0 for d in sched):
            raise ValueError("schedule digits must be >= 0")

    def code(self, horizon: int) -> int:
        """Mixed-radix code with slot 0 most significant, base horizon + 1."""
        code = 0
        for d in self.schedule:
            code = code * (horizon + 1) + d
        return code


@dataclass
class StructureReport:
    no_gaps: bool
    increasing_order: bool
    no_breaks: bool

    @property
    def all_pass(self) -> bool:
        return self.no_gaps and self.increasing_order and self.no_breaks


@dataclass
class OracleReport:
    assignment: Assignment
    value: float
    tie_count: int
    evaluations: int


@dataclass
class ComparisonReport:
    discrete_value: float
    continuous_value: float
    value_gap: float
    frontier_deviation: float
    assignment: Assignment
    tie_count: int


def _period_profiles(instance: DiscreteInstance, schedule: np.ndarray):
    """Per-period masses, costs, and prior cumulative mass for one schedule."""
    T = instance.horizon
    mass = 1.0 / instance.slots
    m = np.zeros(T)
    K = np.zeros(T)
    for t in range(1, T + 1):
        sel = schedule == t
        m[t - 1] = sel.sum() * mass
        K[t - 1] = instance.slot_costs[sel].sum()
    M_prior = np.concatenate(([0.0], np.cumsum(m)[:-1]))
    return m, K, M_prior


def _check_schedule(instance: DiscreteInstance, assignment: Assignment) -> np.ndarray:
    sched = np.asarray(assignment.schedule, dtype=int)
    if len(sched) != instance.slots:
        raise ValueError(
            f"schedule length {len(sched)} does not match {instance.slots} slots"
        )
    if np.any(sched > instance.horizon):
        raise ValueError(f"schedule digits must be <= horizon {instance.horizon}")
    return sched


def evaluate_assignment(instance: DiscreteInstance, assignment: Assignment) -> float:
    """Expected discounted payoff of one assignment, exactly.

    The survival coefficient (1 - p M_{t-1}) multiplies K_t before anything
    is subtracted, so an infinite slot cost propagates to -inf without ever
    forming inf - inf.
    """
    sched = _check_schedule(instance, assignment)
    m, K, M_prior = _period_profiles(instance, sched)
    value = 0.0
    for t in range(1, instance.horizon + 1):
        coeff = 1.0 - instance.p * M_prior[t - 1]
        value += instance.delta ** (t - 1) * (
            instance.p * m[t - 1] * instance.v - coeff * K[t - 1]
        )
    return float(value)


def evaluate_assignment_recursive(instance: DiscreteInstance, assignment: Assignment) -> float:
    """Same payoff through the conditional one-period recursion.

    V_t = s_t v - K_t + delta (1 - s_t) V_{t+1} with s_t the success chance
    conditional on reaching period t. Independent of evaluate_assignment's
    summation, which makes the pair a useful consistency check.
    """
    sched = _check_schedule(instance, assignment)
    m, K, M_prior = _period_profiles(instance, sched)
    V = 0.0
    for t in range(instance.horizon, 0, -1):
        alive = 1.0 - instance.p * M_prior[t - 1]
        s = instance.p * m[t - 1] / alive
        V = s * instance.v - K[t - 1] + instance.delta * (1.0 - s) * V
    return float(V)


def _half_tables(instance: DiscreteInstance, slot_idx: np.ndarray):
    """Tabulate per-pattern period profiles for one half of the slots.

    Returns (patterns, own_value, cost_disc, prior_mass, bad) where
    own_value is the half's payoff ignoring the other half, cost_disc[t] is
    delta^(t-1) K_t, prior_mass[t] is M_{t-1}, and bad flags patterns that
    schedule a slot with infinite cost. Infinite costs enter the tables as 0
    and are restored to -inf through the bad flag, which keeps the matrix
    arithmetic free of inf * 0.
    """
    T = instance.horizon
    mass = 1.0 / instance.slots
    m_half = len(slot_idx)
    patterns = np.array(
        list(itertools.product(range(T + 1), repeat=m_half)), dtype=np.int8
    ).reshape(-1, m_half)
    R = patterns.shape[0]
    costs = instance.slot_costs[slot_idx] if m_half else np.zeros(0)
    infinite = ~np.isfinite(costs)
    finite_costs = np.where(infinite, 0.0, costs)
    disc = instance.delta ** np.arange(T)

    masses = np.zeros((R, T))
    K = np.zeros((R, T))
    bad = np.zeros(R, dtype=bool)
    for t in range(1, T + 1):
        sel = patterns == t
        masses[:, t - 1] = sel.sum(axis=1) * mass
        K[:, t - 1] = sel @ finite_costs
        if infinite.any():
            bad |= sel @ infinite
    prior = np.concatenate((np.zeros((R, 1)), np.cumsum(masses, axis=1)[:, :-1]), axis=1)
    own = (disc * (instance.p * instance.v * masses - (1.0 - instance.p * prior) * K)).sum(axis=1)
    return patterns, own, disc * K, prior, bad


def best_assignment_report(
    instance: DiscreteInstance, budget: int = DEFAULT_BUDGET
) -> OracleReport:
    """Exhaustively enumerate all (T+1)^N assignments and return the best.

    Raises BudgetExceededError up front when the enumeration would exceed
    `budget` evaluations. Ties are counted at exact float equality; the
    returned maximizer is the lexicographically earliest.
    """
    N = instance.slots
    T = instance.horizon
    total = (T + 1) ** N
    if total > budget:
        raise BudgetExceededError(total, budget)

    n_hi = N // 2
    pat_hi, own_hi, Kd_hi, prior_hi, bad_hi = _half_tables(instance, np.arange(n_hi))
    pat_lo, own_lo, Kd_lo, prior_lo, bad_lo = _half_tables(instance, np.arange(n_hi, N))
    R_lo = pat_lo.shape[0]

    best = -math.inf
    best_code = 0
    ties = 0
    chunk = max(1, int(2_000_000 // max(R_lo, 1)))
    p = instance.p
    for i0 in range(0, pat_hi.shape[0], chunk):
        i1 = min(i0 + chunk, pat_hi.shape[0])
        block = (
            own_hi[i0:i1, None]
            + own_lo[None, :]
            + p * (Kd_hi[i0:i1] @ prior_lo.T + prior_hi[i0:i1] @ Kd_lo.T)
        )
        if bad_hi[i0:i1].any():
            block[bad_hi[i0:i1], :] = -math.inf
        if bad_lo.any():
            block[:, bad_lo] = -math.inf
        bmax = float(block.max())
        if bmax == -math.inf:
            continue
        if bmax > best:
            best = bmax
            flat = int(np.argmax(block == bmax))
            best_code = (i0 + flat // R_lo) * R_lo + flat % R_lo
            ties = int((block == bmax).sum())
        elif bmax == best:
            ties += int((block == bmax).sum())

    hi_code, lo_code = divmod(best_code, R_lo)
    schedule = tuple(pat_hi[hi_code].tolist()) + tuple(pat_lo[lo_code].tolist())
    return OracleReport(
        assignment=Assignment(schedule),
        value=best,
        tie_count=ties,
        evaluations=total,
    )


def best_assignment(
    instance: DiscreteInstance, budget: int = DEFAULT_BUDGET
) -> Tuple[Assignment, float]:
    report = best_assignment_report(instance, budget)
    return report.assignment, report.value


def structure_check(assignment: Assignment) -> StructureReport:
    """Check the qualitative shape an optimal assignment must have.

    no_gaps: searched slots form a prefix of the slot order.
    increasing_order: periods are nondecreasing along the searched prefix.
    no_breaks: no empty period earlier than a nonempty one.
    """
    sched = np.asarray(assignment.schedule, dtype=int)
    searched = np.flatnonzero(sched > 0)
    no_gaps = bool(len(searched) == 0 or searched[-1] == len(searched) - 1)
    digits = sched[searched]
    increasing = bool(np.all(np.diff(digits) >= 0)) if len(digits) else True
    used = np.unique(digits)
    no_breaks = bool(len(used) == 0 or (used[0] == 1 and used[-1] == len(used)))
    return StructureReport(no_gaps=no_gaps, increasing_order=increasing, no_breaks=no_breaks)


def compare_with_continuous(
    instance: DiscreteInstance,
    solution: BackwardSolution,
    budget: int = DEFAULT_BUDGET,
    report: Optional[OracleReport] = None,
) -> ComparisonReport:
    """Benchmark the truncated continuum solution against the exact discrete optimum.

    The discrete plan class embeds in the continuum one, so the continuum
    value should weakly dominate, with a gap that shrinks as slots refine.
    The frontier deviation compares cumulative searched mass after each
    period against the continuum path boundaries.
    """
    if instance.horizon != solution.truncation:
        raise ValueError(
            f"instance horizon {instance.horizon} does not match solution truncation {solution.truncation}"
        )
    params = solution.params
    if not (instance.p == params.p and instance.v == params.v and instance.delta == params.delta):
        raise ValueError("instance and solution disagree on p, v, or delta")
    ref = DiscreteInstance.from_params(params, instance.slots, instance.horizon)
    same = np.isclose(ref.slot_costs, instance.slot_costs, rtol=1e-12, atol=1e-12) | (
        np.isinf(ref.slot_costs) & np.isinf(instance.slot_costs)
    )
    if not same.all():
        raise ValueError("instance slot costs were not built from the solution's cost model")

    if report is None:
        report = best_assignment_report(instance, budget)
    m, _, M_prior = _period_profiles(instance, np.asarray(report.assignment.schedule))
    cum_mass = M_prior + m  # searched mass through each period
    deviation = float(np.max(np.abs(cum_mass - solution.path.boundaries[1:])))
    continuous = float(solution.values[0])
    return ComparisonReport(
        discrete_value=report.value,
        continuous_value=continuous,
        value_gap=continuous - report.value,
        frontier_deviation=deviation,
        assignment=report.assignment,
        tie_count=report.tie_count,
    )
