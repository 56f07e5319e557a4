"""Mixed-integer formulations of the chance-constrained program.

Five builders share one variable layout (x block, z block, r block, t):

* ``saa``       -- empirical (radius-zero) baseline: at most k scenarios may
                   be violated, enforced with big-M indicator rows.
* ``basic``     -- exact distance-based model: sample i is either discarded
                   (z_i = 1) or its distance to the unsafe region must reach
                   t - r_i, with the Wasserstein budget row
                   eps*t >= theta + mean(r).
* ``knapsack``  -- basic plus two families of valid rows: sum(z) <= k and
                   the radius-zero scenario rows reusing the same z.
* ``reduced``   -- knapsack with every big-M scenario coefficient replaced
                   by the quantile-shifted constant h[i, p]; big-M survives
                   only in the indicator rows.
* ``compact``   -- reduced, keeping scenario rows only for samples above the
                   per-row quantile, plus one row per p forcing the
                   (k+1)-smallest margin to reach t.

All scenario data is pre-normalized by the dual norm of each safety row, so
row coefficients are exactly the quantities the separation routines reason
about.  theta must be positive for the distance-based models; the saa
builder is the radius-zero baseline.
"""
from __future__ import annotations

import itertools
import math
from dataclasses import dataclass

import numpy as np

from .constants import MARGIN_TOL
from .model import (
    BINARY,
    CONTINUOUS,
    DrccpInstance,
    MipModel,
    dual_norm,
)
from .simplex import LpProblem, solve_lp

FORMULATION_KINDS = ("saa", "basic", "knapsack", "reduced", "compact")


@dataclass(frozen=True)
class QuantileData:
    """Per-row order statistics of the scenario terms.

    q[p] is the (k+1)-th largest value of -b_p @ xi_i over the N samples
    (duplicates counted separately), h[i, p] = (-b_p @ xi_i - q[p]) scaled by
    the dual norm, and surviving[p] lists the scenario indices with
    -b_p @ xi_i strictly above q[p]; there are never more than k of them.
    """

    k: int
    q: np.ndarray
    h: np.ndarray
    surviving: tuple


def _scaled_rows(instance: DrccpInstance):
    """Per row p: (a / ||b||_*, (b @ xi_i + d) / ||b||_* for all i)."""
    out = []
    for row in instance.rows:
        scale = dual_norm(row.b, instance.norm)
        a_sc = row.a / scale
        bxi = (instance.samples.samples @ row.b + row.d) / scale
        out.append((a_sc, bxi))
    return out


def compute_quantiles(instance: DrccpInstance) -> QuantileData:
    k = instance.k
    n, p_count = instance.n, instance.p
    q = np.empty(p_count)
    h = np.empty((n, p_count))
    surviving = []
    for p, row in enumerate(instance.rows):
        scale = dual_norm(row.b, instance.norm)
        v = -(instance.samples.samples @ row.b)
        order = np.argsort(-v, kind="stable")
        q[p] = v[order[k]]
        h[:, p] = (v - q[p]) / scale
        surviving.append(np.flatnonzero(v > q[p]))
    return QuantileData(k=k, q=q, h=h, surviving=tuple(surviving))


def compute_big_m(instance: DrccpInstance) -> float:
    """Smallest symmetric bound on all scaled margins over the domain.

    For every row the margin (b_p @ xi_i + d_p - a_p @ x) / ||b_p||_* is
    bracketed by solving min and max of a_p @ x over X (two LPs per row,
    skipped when a_p = 0).  The result is the max of the absolute bracket
    ends over all rows and samples.  Requires a bounded, nonempty domain.
    """
    dom = instance.domain
    big = 0.0
    for row in instance.rows:
        scale = dual_norm(row.b, instance.norm)
        bxi = (instance.samples.samples @ row.b + row.d)
        if np.any(row.a != 0.0):
            amin, amax = _linear_range(dom, row.a)
        else:
            amin = amax = 0.0
        lo = (bxi.min() - amax) / scale
        hi = (bxi.max() - amin) / scale
        big = max(big, abs(lo), abs(hi))
    return big


def _linear_range(dom, a):
    base = LpProblem(
        c=a, A=dom.G, senses=["<="] * dom.G.shape[0], b=dom.g, lb=dom.lb, ub=dom.ub
    )
    low = solve_lp(base)
    if low.status == "unbounded":
        raise ValueError("domain is not compact: big-M undefined")
    if low.status == "infeasible":
        raise ValueError("domain is empty")
    neg = LpProblem(
        c=-a, A=dom.G, senses=["<="] * dom.G.shape[0], b=dom.g, lb=dom.lb, ub=dom.ub
    )
    high = solve_lp(neg)
    if high.status == "unbounded":
        raise ValueError("domain is not compact: big-M undefined")
    return low.objective, -high.objective


def _base_model(instance: DrccpInstance, with_rt: bool, theta_var: bool = False):
    """Shared variable layout and domain rows."""
    m = MipModel()
    L = instance.dim_x
    for j in range(L):
        m.add_var(f"x[{j}]", CONTINUOUS, instance.domain.lb[j], instance.domain.ub[j], "x")
    for i in range(instance.n):
        m.add_var(f"z[{i}]", BINARY, 0.0, 1.0, "z")
    if with_rt:
        for i in range(instance.n):
            m.add_var(f"r[{i}]", CONTINUOUS, 0.0, math.inf, "r")
        m.add_var("t", CONTINUOUS, 0.0, math.inf, "t")
    if theta_var:
        m.add_var("theta", CONTINUOUS, 0.0, math.inf, "theta")
    for i in range(instance.domain.G.shape[0]):
        coefs = [(j, instance.domain.G[i, j]) for j in range(L) if instance.domain.G[i, j] != 0.0]
        m.add_constraint(coefs, "<=", instance.domain.g[i], "domain")
    return m


def _budget_row(model, instance, theta_var):
    n = instance.n
    t_idx = model.block_indices("t")[0]
    r_idx = model.block_indices("r")
    coefs = [(t_idx, instance.epsilon)] + [(j, -1.0 / n) for j in r_idx]
    if theta_var:
        coefs.append((model.block_indices("theta")[0], -1.0))
        model.add_constraint(coefs, ">=", 0.0, "budget")
    else:
        model.add_constraint(coefs, ">=", instance.theta, "budget")


def _indicator_rows(model, instance, big_m):
    t_idx = model.block_indices("t")[0]
    r_idx = model.block_indices("r")
    z_idx = model.block_indices("z")
    for i in range(instance.n):
        model.add_constraint(
            [(z_idx[i], -big_m), (t_idx, -1.0), (r_idx[i], 1.0)], ">=", -big_m, "indicator"
        )


def _knapsack_row(model, instance):
    z_idx = model.block_indices("z")
    model.add_constraint([(j, 1.0) for j in z_idx], "<=", float(instance.k), "knapsack")


def _scenario_rows_saa(model, instance, big_m, scaled):
    z_idx = model.block_indices("z")
    L = instance.dim_x
    for i in range(instance.n):
        for p in range(instance.p):
            a_sc, bxi = scaled[p]
            coefs = [(j, -a_sc[j]) for j in range(L) if a_sc[j] != 0.0]
            coefs.append((z_idx[i], big_m))
            model.add_constraint(coefs, ">=", -bxi[i], "scenario_saa")


def _scenario_rows_distance(model, instance, scaled, z_coef):
    """Rows  margin_{i,p}(x) + z_coef(i, p) * z_i - t + r_i >= 0."""
    z_idx = model.block_indices("z")
    r_idx = model.block_indices("r")
    t_idx = model.block_indices("t")[0]
    L = instance.dim_x
    for i in range(instance.n):
        for p in range(instance.p):
            coef = z_coef(i, p)
            if coef is None:
                continue
            a_sc, bxi = scaled[p]
            coefs = [(j, -a_sc[j]) for j in range(L) if a_sc[j] != 0.0]
            if coef != 0.0:
                coefs.append((z_idx[i], coef))
            coefs.extend([(t_idx, -1.0), (r_idx[i], 1.0)])
            model.add_constraint(coefs, ">=", -bxi[i], "scenario")


def _quantile_bound_rows(model, instance, quant):
    t_idx = model.block_indices("t")[0]
    L = instance.dim_x
    for p, row in enumerate(instance.rows):
        scale = dual_norm(row.b, instance.norm)
        a_sc = row.a / scale
        coefs = [(j, -a_sc[j]) for j in range(L) if a_sc[j] != 0.0]
        coefs.append((t_idx, -1.0))
        model.add_constraint(coefs, ">=", (quant.q[p] - row.d) / scale, "quantile_bound")


def _set_cost(model, instance):
    model.set_objective(
        [(j, instance.cost[j]) for j in range(instance.dim_x) if instance.cost[j] != 0.0],
        "min",
    )


def _require_positive_theta(instance):
    if instance.theta <= 0.0:
        raise ValueError(
            "theta must be positive for distance-based formulations; "
            "use the saa formulation for radius zero"
        )


def build_saa(instance: DrccpInstance, big_m: float | None = None) -> MipModel:
    """Radius-zero baseline: at most k scenarios violated."""
    if big_m is None:
        big_m = compute_big_m(instance)
    scaled = _scaled_rows(instance)
    m = _base_model(instance, with_rt=False)
    _knapsack_row(m, instance)
    _scenario_rows_saa(m, instance, big_m, scaled)
    _set_cost(m, instance)
    return m.validate()


def build_basic(instance: DrccpInstance, big_m: float | None = None) -> MipModel:
    _require_positive_theta(instance)
    if big_m is None:
        big_m = compute_big_m(instance)
    scaled = _scaled_rows(instance)
    m = _base_model(instance, with_rt=True)
    _budget_row(m, instance, theta_var=False)
    _indicator_rows(m, instance, big_m)
    _scenario_rows_distance(m, instance, scaled, lambda i, p: big_m)
    _set_cost(m, instance)
    return m.validate()


def build_knapsack(instance: DrccpInstance, big_m: float | None = None) -> MipModel:
    _require_positive_theta(instance)
    if big_m is None:
        big_m = compute_big_m(instance)
    scaled = _scaled_rows(instance)
    m = _base_model(instance, with_rt=True)
    _budget_row(m, instance, theta_var=False)
    _indicator_rows(m, instance, big_m)
    _knapsack_row(m, instance)
    _scenario_rows_distance(m, instance, scaled, lambda i, p: big_m)
    _scenario_rows_saa(m, instance, big_m, scaled)
    _set_cost(m, instance)
    return m.validate()


def build_reduced(
    instance: DrccpInstance,
    big_m: float | None = None,
    quant: QuantileData | None = None,
) -> MipModel:
    _require_positive_theta(instance)
    if big_m is None:
        big_m = compute_big_m(instance)
    if quant is None:
        quant = compute_quantiles(instance)
    scaled = _scaled_rows(instance)
    m = _base_model(instance, with_rt=True)
    _budget_row(m, instance, theta_var=False)
    _indicator_rows(m, instance, big_m)
    _knapsack_row(m, instance)
    _scenario_rows_distance(m, instance, scaled, lambda i, p: float(quant.h[i, p]))
    _set_cost(m, instance)
    return m.validate()


def build_compact(
    instance: DrccpInstance,
    big_m: float | None = None,
    quant: QuantileData | None = None,
) -> MipModel:
    _require_positive_theta(instance)
    if big_m is None:
        big_m = compute_big_m(instance)
    if quant is None:
        quant = compute_quantiles(instance)
    scaled = _scaled_rows(instance)
    surviving = [set(map(int, s)) for s in quant.surviving]
    m = _base_model(instance, with_rt=True)
    _budget_row(m, instance, theta_var=False)
    _indicator_rows(m, instance, big_m)
    _knapsack_row(m, instance)
    _scenario_rows_distance(
        m,
        instance,
        scaled,
        lambda i, p: float(quant.h[i, p]) if i in surviving[p] else None,
    )
    _quantile_bound_rows(m, instance, quant)
    _set_cost(m, instance)
    return m.validate()


_BUILDERS = {
    "saa": build_saa,
    "basic": build_basic,
    "knapsack": build_knapsack,
    "reduced": build_reduced,
    "compact": build_compact,
}


def build_formulation(instance, kind, big_m=None, quant=None) -> MipModel:
    if kind not in _BUILDERS:
        raise ValueError(f"unknown formulation kind {kind!r}")
    if kind in ("reduced", "compact"):
        return _BUILDERS[kind](instance, big_m=big_m, quant=quant)
    return _BUILDERS[kind](instance, big_m=big_m)


# ---------------------------------------------------------------------------
# Radius ceiling
# ---------------------------------------------------------------------------

def build_theta_variant(instance: DrccpInstance, matrix: str = "compact",
                        big_m: float | None = None) -> MipModel:
    """The radius-maximization model: theta becomes a variable, objective
    max theta, all other rows taken from the chosen formulation matrix."""
    if matrix not in ("basic", "knapsack", "compact"):
        raise ValueError(f"unsupported theta-variant matrix {matrix!r}")
    if big_m is None:
        big_m = compute_big_m(instance)
    scaled = _scaled_rows(instance)
    m = _base_model(instance, with_rt=True, theta_var=True)
    _budget_row(m, instance, theta_var=True)
    _indicator_rows(m, instance, big_m)
    if matrix in ("knapsack", "compact"):
        _knapsack_row(m, instance)
    if matrix == "compact":
        quant = compute_quantiles(instance)
        surviving = [set(map(int, s)) for s in quant.surviving]
        _scenario_rows_distance(
            m,
            instance,
            scaled,
            lambda i, p: float(quant.h[i, p]) if i in surviving[p] else None,
        )
        _quantile_bound_rows(m, instance, quant)
    else:
        _scenario_rows_distance(m, instance, scaled, lambda i, p: big_m)
        if matrix == "knapsack":
            _scenario_rows_saa(m, instance, big_m, scaled)
    m.set_objective([(m.block_indices("theta")[0], 1.0)], "max")
    return m.validate()


def theta_max(instance: DrccpInstance, matrix: str = "compact", config=None) -> float:
    """Largest Wasserstein radius that keeps the instance feasible.

    Solves the radius-maximization MIP and returns the incumbent objective,
    which is a certified-feasible radius.  The default constraint matrix is
    the compact one; the basic and knapsack matrices give the same optimum
    and are available for cross-checks.
    """
    from . import bnc

    model = build_theta_variant(instance, matrix=matrix)
    result = bnc.solve(model, config=config)
    if result.status == "infeasible" or result.objective is None:
        raise ValueError("radius maximization found no feasible point")
    if result.objective <= MARGIN_TOL:
        raise ValueError(
            "no positive feasible radius: the empirical baseline is already infeasible"
        )
    return float(result.objective)


def theta_grid(theta_max_value: float) -> list:
    """Ten-point radius grid: 0.001 then (j-1)/10 * theta_max for j=2..10."""
    return [0.001] + [(j - 1) / 10.0 * theta_max_value for j in range(2, 11)]
