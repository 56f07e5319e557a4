"""Independent certificates for solutions of the chance-constrained program.

Everything here is deliberately decoupled from the MIP formulations: the
worst-case probability comes from a one-dimensional breakpoint scan, the
superquantile check from sorting, and the reference optimum from explicit
support enumeration.  These routines are the ground truth the solver stack
is tested against.
"""
from __future__ import annotations

import itertools
import math
from dataclasses import dataclass

import numpy as np

from .constants import FEAS_TOL, MARGIN_TOL
from .model import DrccpInstance, distance_profile, floor_frac_count
from .simplex import LpProblem, SimplexSolver


def worst_case_prob(distances, theta: float) -> float:
    """Largest violation probability over all distributions within
    transport cost theta of the empirical one.

    distances[i] is the distance from sample i to the unsafe region (zero
    means already unsafe).  The supremum equals

        min over t > 0 of  theta / t + mean(max(0, 1 - d_i / t)),

    capped at 1; the minimum is attained at one of the positive distance
    values, or in the t -> infinity limit.  With theta = 0 it reduces to the
    empirical violation frequency.
    """
    d = np.asarray(distances, dtype=float)
    if d.ndim != 1 or d.size == 0:
        raise ValueError("distances must be a nonempty vector")
    if np.any(d < -MARGIN_TOL):
        raise ValueError("distances must be nonnegative")
    if theta < 0.0:
        raise ValueError("theta must be nonnegative")
    d = np.maximum(d, 0.0)
    n = d.size
    zero_frac = float(np.count_nonzero(d == 0.0)) / n
    if theta == 0.0:
        return zero_frac
    best = 1.0  # t -> infinity moves every point for free rate 0, prob -> 1
    for t in np.unique(d[d > 0.0]):
        val = theta / t + float(np.mean(np.maximum(0.0, 1.0 - d / t)))
        best = min(best, val)
    return min(best, 1.0)


@dataclass(frozen=True)
class CvarResult:
    """Superquantile value with matching primal and dual certificates.

    primal = t + mean(max(0, v - t)) / epsilon evaluated at the optimal
    threshold t; dual = (1 / (epsilon * n)) * sum(y * v) for the extreme
    weight vector y.  The two agree exactly, not just within tolerance.
    """

    value: float
    dual_value: float
    t: float
    y: np.ndarray
    r: np.ndarray


def cvar(values, epsilon: float) -> CvarResult:
    v = np.asarray(values, dtype=float)
    if v.ndim != 1 or v.size == 0:
        raise ValueError("values must be a nonempty vector")
    if not 0.0 < epsilon < 1.0:
        raise ValueError("epsilon must lie in (0, 1)")
    n = v.size
    k = floor_frac_count(epsilon, n)
    order = np.argsort(-v, kind="stable")
    t = float(v[order[k]])
    r = np.maximum(0.0, v - t)
    y = np.zeros(n)
    y[order[:k]] = 1.0
    y[order[k]] = min(1.0, max(0.0, epsilon * n - k))
    primal = t + float(np.sum(r)) / (epsilon * n)
    dual = float(np.dot(y, v)) / (epsilon * n)
    return CvarResult(value=primal, dual_value=dual, t=t, y=y, r=r)


@dataclass(frozen=True)
class FeasibilityCertificate:
    feasible: bool
    t: float
    r: np.ndarray
    budget_slack: float  # epsilon * t - theta - mean(r); >= 0 iff feasible


def lemma_certificate(distances, epsilon: float, theta: float) -> FeasibilityCertificate:
    """Feasibility witness for the distance profile of a candidate point.

    The point is robustly feasible iff for some t >= 0 the shortfalls
    r_i = max(0, t - d_i) satisfy epsilon * t >= theta + mean(r).  The left
    side minus the right is concave piecewise linear in t with breakpoints
    at the distances, so the (k+1)-th smallest distance maximizes the slack
    (k = floor(epsilon * n)); evaluating there decides feasibility.
    """
    d = np.asarray(distances, dtype=float)
    if d.ndim != 1 or d.size == 0:
        raise ValueError("distances must be a nonempty vector")
    if np.any(d < -MARGIN_TOL):
        raise ValueError("distances must be nonnegative")
    d = np.maximum(d, 0.0)
    n = d.size
    k = floor_frac_count(epsilon, n)
    t = float(np.sort(d)[k])
    r = np.maximum(0.0, t - d)
    slack = epsilon * t - theta - float(np.mean(r))
    return FeasibilityCertificate(feasible=slack >= -FEAS_TOL, t=t, r=r, budget_slack=slack)


@dataclass(frozen=True)
class EnumerationResult:
    status: str  # 'optimal' or 'infeasible'
    objective: float | None
    x: np.ndarray | None
    support: tuple | None
    supports_tried: int


def enumerate_optimal(instance: DrccpInstance, big_m: float | None = None,
                      max_supports: int = 200000) -> EnumerationResult:
    """Reference optimum by brute force over discard sets.

    For every subset of at most k scenarios, fix z on that subset and solve
    the continuous relaxation of the distance-based model; the best LP value
    over all subsets is the exact mixed-integer optimum.  Errors out when
    the subset count exceeds max_supports.
    """
    from .formulations import build_basic

    n, k = instance.n, instance.k
    total = sum(math.comb(n, j) for j in range(k + 1))
    if total > max_supports:
        raise ValueError(
            f"enumeration would try {total} supports, over the budget of {max_supports}"
        )
    model = build_basic(instance, big_m=big_m)
    c, A, senses, b, lb, ub = model.to_dense()
    prob = LpProblem(c=c, A=A, senses=senses, b=b, lb=lb.copy(), ub=ub.copy())
    solver = SimplexSolver(prob)
    z_idx = model.block_indices("z")
    x_idx = model.block_indices("x")
    best_obj = math.inf
    best_x = None
    best_support = None
    tried = 0
    for size in range(k + 1):
        for support in itertools.combinations(range(n), size):
            tried += 1
            chosen = set(support)
            for pos, j in enumerate(z_idx):
                val = 1.0 if pos in chosen else 0.0
                solver.set_bound(j, val, val)
            solver.reset_basis()
            sol = solver.solve()
            if sol.status == "optimal" and sol.objective < best_obj - 0.0:
                best_obj = sol.objective
                best_x = sol.x[x_idx].copy()
                best_support = support
    if best_x is None:
        return EnumerationResult("infeasible", None, None, None, tried)
    return EnumerationResult("optimal", float(best_obj), best_x, best_support, tried)
