"""Model primitives for sequential search over a continuum of projects.

A unit mass of candidate projects is indexed by j in [0, 1). At most one
project is feasible: the prior probability that a feasible project exists is
p, and conditional on existence its index is uniform on [0, 1). Searching a
set of projects costs the integral of a marginal cost density c(j) over the
set, the searcher discounts at delta per period, and the feasible project
pays v once completed.

Because c is increasing, optimal search sets are intervals that extend the
already-searched prefix. The state is therefore the frontier l in [0, 1):
the mass of projects searched so far and found infeasible. Everything below
works on frontier endpoints.

Two marginal cost families are supported, both strictly increasing with
c(j) -> inf as j -> 1:

    reciprocal     c(j) = c0 + k * j / (1 - j)
    logarithmic    c(j) = c0 - k * log(1 - j)

Interval costs use the closed-form antiderivatives, so no quadrature is
needed anywhere in the package. The reciprocal density is not integrable up
to 1; the logarithmic one is.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum
from typing import Callable, Optional, Union

import numpy as np

ArrayLike = Union[float, np.ndarray]

# Shared root-finding constants: brackets stop this far short of j = 1, and
# bisection runs until the bracket is narrower than BISECT_TOL.
BISECT_EDGE = 1e-12
BISECT_TOL = 1e-12


class CostFamily(str, Enum):
    RECIPROCAL = "reciprocal"
    LOGARITHMIC = "logarithmic"


@dataclass(frozen=True)
class CostModel:
    """Marginal search cost c(j) = c0 + k * phi(j) for a supported family."""

    family: CostFamily
    c0: float = 0.0
    k: float = 1.0

    def __post_init__(self):
        object.__setattr__(self, "family", CostFamily(self.family))
        if not (self.c0 >= 0.0 and math.isfinite(self.c0)):
            raise ValueError(f"c0 must be finite and >= 0, got {self.c0}")
        if not (self.k > 0.0 and math.isfinite(self.k)):
            raise ValueError(f"k must be finite and > 0, got {self.k}")

    @classmethod
    def reciprocal(cls, c0: float = 0.0, k: float = 1.0) -> "CostModel":
        return cls(CostFamily.RECIPROCAL, c0, k)

    @classmethod
    def logarithmic(cls, c0: float = 0.0, k: float = 1.0) -> "CostModel":
        return cls(CostFamily.LOGARITHMIC, c0, k)


@dataclass(frozen=True)
class ModelParams:
    """Primitive parameters: prior p, prize v, discount delta, cost model."""

    p: float
    v: float
    delta: float
    cost: CostModel

    def __post_init__(self):
        if not (0.0 < self.p < 1.0):
            raise ValueError(f"p must lie in (0, 1), got {self.p}")
        if not (self.v > 0.0 and math.isfinite(self.v)):
            raise ValueError(f"v must be finite and > 0, got {self.v}")
        if not (0.0 < self.delta < 1.0):
            raise ValueError(f"delta must lie in (0, 1), got {self.delta}")


def _scalar_input(*xs) -> bool:
    return all(np.ndim(x) == 0 for x in xs)


def _ret(scalar: bool, out: np.ndarray) -> ArrayLike:
    return float(out) if scalar else out


def cost_density(cost: CostModel, j: ArrayLike) -> ArrayLike:
    """Marginal cost c(j). Accepts scalars or arrays with j in [0, 1)."""
    scalar = _scalar_input(j)
    j = np.asarray(j, dtype=float)
    if np.any(j < 0.0) or np.any(j >= 1.0):
        raise ValueError("project index outside [0, 1)")
    if cost.family is CostFamily.RECIPROCAL:
        out = cost.c0 + cost.k * j / (1.0 - j)
    else:
        out = cost.c0 - cost.k * np.log1p(-j)
    return _ret(scalar, out)


def cost_integral(cost: CostModel, a: ArrayLike, b: ArrayLike) -> ArrayLike:
    """Cost of searching the interval [a, b), via the closed-form antiderivative.

    Requires 0 <= a <= b < 1 elementwise. Zero-width intervals cost exactly 0.
    """
    scalar = _scalar_input(a, b)
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    if np.any(a < 0.0) or np.any(b < a) or np.any(b >= 1.0):
        raise ValueError("interval endpoints must satisfy 0 <= a <= b < 1")
    d = b - a
    if cost.family is CostFamily.RECIPROCAL:
        # integral of j/(1-j) on [a, b) is log((1-a)/(1-b)) - (b - a)
        out = cost.c0 * d + cost.k * (np.log1p(-a) - np.log1p(-b) - d)
    else:
        # integral of -log(1-j) on [a, b) is (1-b)log(1-b) - (1-a)log(1-a) + (b - a)
        out = cost.c0 * d + cost.k * (
            (1.0 - b) * np.log1p(-b) - (1.0 - a) * np.log1p(-a) + d
        )
    return _ret(scalar, np.where(d == 0.0, 0.0, out))


def posterior_feasible(params: ModelParams, l: ArrayLike) -> ArrayLike:
    """Probability a feasible project remains after [0, l) failed: (1-l)p / (1-lp)."""
    scalar = _scalar_input(l)
    l = np.asarray(l, dtype=float)
    if np.any(l < 0.0) or np.any(l >= 1.0):
        raise ValueError("frontier outside [0, 1)")
    return _ret(scalar, (1.0 - l) * params.p / (1.0 - l * params.p))


def success_probability(params: ModelParams, l: ArrayLike, l_next: ArrayLike) -> ArrayLike:
    """Chance the period succeeds when the frontier moves from l to l_next.

    Conditional on the history of failures up to l, the feasible project sits
    in [l, l_next) with probability p (l_next - l) / (1 - l p).
    """
    scalar = _scalar_input(l, l_next)
    l = np.asarray(l, dtype=float)
    l_next = np.asarray(l_next, dtype=float)
    if np.any(l < 0.0) or np.any(l_next < l) or np.any(l_next >= 1.0):
        raise ValueError("frontiers must satisfy 0 <= l <= l_next < 1")
    return _ret(scalar, params.p * (l_next - l) / (1.0 - l * params.p))


def feasible_to_search(params: ModelParams) -> bool:
    """True when the first marginal project is worth searching: p v > c(0)."""
    return params.p * params.v > params.cost.c0


def _bisect_increasing(
    f: Callable[[float], float], lo: float, hi: float, tol: float = BISECT_TOL
) -> float:
    """Root of f on [lo, hi] given f(lo) <= 0 <= f(hi), to bracket width tol."""
    flo = f(lo)
    fhi = f(hi)
    if flo > 0.0 or fhi < 0.0:
        raise ValueError("bisection bracket does not straddle a root")
    if flo == 0.0:
        return lo
    if fhi == 0.0:
        return hi
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        if hi - lo <= tol:
            break
        fm = f(mid)
        if fm == 0.0:
            return mid
        if fm < 0.0:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


def myopic_boundary(params: ModelParams) -> Optional[float]:
    """One-shot optimal frontier q*: the root of c(q) = p v, or None if p v <= c(0).

    A searcher with no continuation extends the frontier until the marginal
    cost eats the marginal expected prize. The root is unique because c is
    strictly increasing and diverges at 1.
    """
    pv = params.p * params.v
    if pv <= params.cost.c0:
        return None
    f = lambda q: cost_density(params.cost, q) - pv
    hi = 0.5
    while f(hi) < 0.0 and hi < 1.0 - BISECT_EDGE:
        hi = min(1.0 - BISECT_EDGE, 0.5 * (1.0 + hi))
    return _bisect_increasing(f, 0.0, hi)


def search_upper_bound(params: ModelParams) -> Optional[float]:
    """Largest frontier any optimal plan can reach: the last root of c(j)(1 - jp) = p v.

    Beyond this point even a myopically-adjusted marginal project loses money
    in every continuation, so the solver never needs states above it. The
    left side is convex for the reciprocal family, making the root unique;
    for the logarithmic family at large p it can cross p v more than once,
    and we return the last crossing so the state grid covers every frontier
    that could be profitable. If no crossing occurs below 1 - BISECT_EDGE the
    edge itself is returned.

    Returns None when searching is infeasible outright (p v <= c(0)).
    """
    q = myopic_boundary(params)
    if q is None:
        return None
    pv = params.p * params.v
    g = lambda j: cost_density(params.cost, j) * (1.0 - j * params.p) - pv
    hi = 1.0 - BISECT_EDGE
    if g(hi) <= 0.0:
        return hi
    # geometric ladder from q* toward the edge; take the last sign change
    gap = 1.0 - q
    ladder = 1.0 - gap * np.logspace(0.0, np.log10(BISECT_EDGE / gap), 200)
    lo = q
    for t in ladder[1:]:
        if g(t) > 0.0:
            return _bisect_increasing(g, lo, float(t))
        lo = float(t)
    return _bisect_increasing(g, lo, hi)
