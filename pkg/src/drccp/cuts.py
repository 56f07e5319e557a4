"""Valid inequalities for the distance-based formulations.

Two families, both indexed by a safety row p and a sequence J of scenarios
taken from the above-quantile set of that row, listed in decreasing h order
with a zero sentinel appended:

* star (mixing) cuts:   margin_{j1,p}(x) + sum_t (h_t - h_{t+1}) z_{j_t} >= 0
* path cuts:            g*_p(x) - t + sum_t r_{j_t} >= sum_t (h_t - h_{t+1}) (1 - z_{j_t})

Separation is exact: a greedy scan maximizes the star right-hand side and a
quadratic dynamic program maximizes the path value.  Each routine returns at
most one cut per row, the most violated one, and only when the violation
clears CUT_VIOLATION_TOL.

check_cut_validity is the independent referee: it minimizes the cut's
left-hand side over every discard support of the exact knapsack-strengthened
region and accepts only if no support can dip below the right-hand side.
"""
from __future__ import annotations

import itertools
import math
from dataclasses import dataclass

import numpy as np

from .constants import CUT_VIOLATION_TOL, MARGIN_TOL
from .formulations import QuantileData, build_knapsack, compute_quantiles
from .model import DrccpInstance, dual_norm
from .simplex import LpProblem, SimplexSolver


@dataclass(frozen=True)
class FractionalPoint:
    """Relaxation values split into the shared variable blocks."""

    x: np.ndarray
    z: np.ndarray
    r: np.ndarray | None = None
    t: float | None = None


def point_from_solution(model, values):
    values = np.asarray(values, dtype=float)
    x = values[model.block_indices("x")]
    z = values[model.block_indices("z")]
    r_idx = model.block_indices("r")
    t_idx = model.block_indices("t")
    return FractionalPoint(
        x=x,
        z=z,
        r=values[r_idx] if r_idx else None,
        t=float(values[t_idx[0]]) if t_idx else None,
    )


@dataclass(frozen=True)
class Cut:
    family: str  # 'mixing' or 'path'
    p: int
    sequence: tuple  # scenario ids, h-descending
    x_coefs: np.ndarray
    z_coefs: tuple  # ((scenario id, coefficient), ...)
    r_coefs: tuple
    t_coef: float
    rhs: float  # row sense is >=
    violation: float


def format_cut(cut: Cut) -> str:
    ids = ",".join(str(int(j)) for j in cut.sequence)
    return f"{cut.family} p={cut.p} J=[{ids}] viol={_short_sci(cut.violation)}"


def _short_sci(v: float) -> str:
    mant, exp = f"{v:.1e}".split("e")
    return f"{mant}e{int(exp)}"


def cut_row(cut: Cut, model):
    """Map a cut onto model variable indices: (sparse coefs, rhs)."""
    x_idx = model.block_indices("x")
    z_idx = model.block_indices("z")
    r_idx = model.block_indices("r")
    t_idx = model.block_indices("t")
    coefs = [(x_idx[j], v) for j, v in enumerate(cut.x_coefs) if v != 0.0]
    coefs.extend((z_idx[i], v) for i, v in cut.z_coefs if v != 0.0)
    if cut.r_coefs and not r_idx:
        raise ValueError("cut uses shortfall variables the model does not have")
    coefs.extend((r_idx[i], v) for i, v in cut.r_coefs)
    if cut.t_coef != 0.0:
        if not t_idx:
            raise ValueError("cut uses the threshold variable the model does not have")
        coefs.append((t_idx[0], cut.t_coef))
    return coefs, cut.rhs


# ---------------------------------------------------------------------------
# Pure separation cores (candidate arrays in, positions out)
# ---------------------------------------------------------------------------

def most_violated_star(h, z):
    """Sequence maximizing sum (h_t - h_{t+1}) (1 - z_t), sentinel h = 0.

    Scan candidates by decreasing h, keeping an element exactly when its
    (1 - z) weight strictly beats the best seen so far; the telescoped value
    of that chain dominates every other subsequence.  Returns (positions in
    chosen order, value).
    """
    h = np.asarray(h, dtype=float)
    z = np.asarray(z, dtype=float)
    order = np.argsort(-h, kind="stable")
    chosen = []
    best = 0.0
    for pos in order:
        if h[pos] <= 0.0:
            break
        w = 1.0 - z[pos]
        if w > best:
            chosen.append(int(pos))
            best = w
    val = 0.0
    for a, pos in enumerate(chosen):
        nxt = h[chosen[a + 1]] if a + 1 < len(chosen) else 0.0
        val += (h[pos] - nxt) * (1.0 - z[pos])
    return tuple(chosen), val


def best_path_sequence(h, z, r):
    """Nonempty sequence maximizing
    sum (h_t - h_{t+1}) (1 - z_t) - sum r_t, sentinel h = 0.

    Quadratic dynamic program over candidates sorted by decreasing h:
    f[a] = best value of a chain starting at a, linking a either straight to
    the sentinel or to any later candidate.  Returns (positions, value);
    (empty, 0.0) when there are no candidates.
    """
    h = np.asarray(h, dtype=float)
    z = np.asarray(z, dtype=float)
    r = np.asarray(r, dtype=float)
    order = [int(p) for p in np.argsort(-h, kind="stable") if h[p] > 0.0]
    m = len(order)
    if m == 0:
        return (), 0.0
    f = np.empty(m)
    nxt = np.full(m, -1, dtype=int)
    for a in range(m - 1, -1, -1):
        pos = order[a]
        w = 1.0 - z[pos]
        best = h[pos] * w - r[pos]  # link straight to the sentinel
        link = -1
        for b in range(a + 1, m):
            cand = (h[pos] - h[order[b]]) * w - r[pos] + f[b]
            if cand > best + 0.0:
                best = cand
                link = b
        f[a] = best
        nxt[a] = link
    start = int(np.argmax(f))
    seq = []
    a = start
    while a != -1:
        seq.append(order[a])
        a = nxt[a]
    return tuple(seq), float(f[start])


# ---------------------------------------------------------------------------
# Separators
# ---------------------------------------------------------------------------

class _SeparatorBase:
    def __init__(self, instance: DrccpInstance, quant: QuantileData | None = None):
        self.instance = instance
        self.quant = quant if quant is not None else compute_quantiles(instance)
        self.emitted = []
        self._rows = []
        for p, row in enumerate(instance.rows):
            scale = dual_norm(row.b, instance.norm)
            bxi = (instance.samples.samples @ row.b + row.d) / scale
            self._rows.append((row.a / scale, bxi, (row.d - self.quant.q[p]) / scale))

    def _g_star(self, p, x):
        a_sc, _, gconst = self._rows[p]
        return gconst - float(a_sc @ x)

    def separate(self, point: FractionalPoint):
        cuts = []
        for p in range(self.instance.p):
            cut = self._separate_row(p, point)
            if cut is not None:
                cuts.append(cut)
                self.emitted.append(cut)
        return cuts


class MixingSeparator(_SeparatorBase):
    family = "mixing"

    def _separate_row(self, p, point):
        cand = self.quant.surviving[p]
        if cand.size == 0:
            return None
        h = self.quant.h[cand, p]
        positions, val = most_violated_star(h, point.z[cand])
        viol = val - self._g_star(p, point.x)
        if viol <= CUT_VIOLATION_TOL or not positions:
            return None
        seq = tuple(int(cand[pos]) for pos in positions)
        hs = [self.quant.h[j, p] for j in seq]
        z_coefs = tuple(
            (seq[a], hs[a] - (hs[a + 1] if a + 1 < len(seq) else 0.0))
            for a in range(len(seq))
        )
        a_sc, bxi, _ = self._rows[p]
        return Cut(
            family=self.family,
            p=p,
            sequence=seq,
            x_coefs=-a_sc,
            z_coefs=z_coefs,
            r_coefs=(),
            t_coef=0.0,
            rhs=-float(bxi[seq[0]]),
            violation=float(viol),
        )


class PathSeparator(_SeparatorBase):
    family = "path"

    def _separate_row(self, p, point):
        if point.r is None or point.t is None:
            raise ValueError("path separation needs the shortfall and threshold values")
        cand = self.quant.surviving[p]
        if cand.size == 0:
            return None
        h = self.quant.h[cand, p]
        positions, val = best_path_sequence(h, point.z[cand], point.r[cand])
        u_star = self._g_star(p, point.x) - point.t
        viol = val - u_star
        if viol <= CUT_VIOLATION_TOL or not positions:
            return None
        seq = tuple(int(cand[pos]) for pos in positions)
        hs = [self.quant.h[j, p] for j in seq]
        deltas = [hs[a] - (hs[a + 1] if a + 1 < len(seq) else 0.0) for a in range(len(seq))]
        a_sc, _, gconst = self._rows[p]
        return Cut(
            family=self.family,
            p=p,
            sequence=seq,
            x_coefs=-a_sc,
            z_coefs=tuple(zip(seq, deltas)),
            r_coefs=tuple((j, 1.0) for j in seq),
            t_coef=-1.0,
            rhs=float(sum(deltas) - gconst),
            violation=float(viol),
        )


# ---------------------------------------------------------------------------
# Independent validity referee
# ---------------------------------------------------------------------------

def check_cut_validity(cut: Cut, instance: DrccpInstance, big_m: float | None = None,
                       max_supports: int = 20000) -> bool:
    """True iff the cut holds at every point of the exact feasible region.

    Enumerates all discard supports of size at most k; for each, fixes z and
    minimizes the cut's left-hand side over the knapsack-strengthened
    continuous region.  The cut is valid when no support reaches a value
    below rhs - MARGIN_TOL.
    """
    n, k = instance.n, instance.k
    total = sum(math.comb(n, j) for j in range(k + 1))
    if total > max_supports:
        raise ValueError(
            f"validity check would try {total} supports, over the budget of {max_supports}"
        )
    model = build_knapsack(instance, big_m=big_m)
    c, A, senses, b, lb, ub = model.to_dense()
    obj = np.zeros(model.num_vars)
    x_idx = model.block_indices("x")
    z_idx = model.block_indices("z")
    r_idx = model.block_indices("r")
    t_idx = model.block_indices("t")
    for j, v in enumerate(cut.x_coefs):
        obj[x_idx[j]] = v
    for i, v in cut.z_coefs:
        obj[z_idx[i]] = v
    for i, v in cut.r_coefs:
        obj[r_idx[i]] = v
    if cut.t_coef != 0.0:
        obj[t_idx[0]] = cut.t_coef
    prob = LpProblem(c=obj, A=A, senses=senses, b=b, lb=lb, ub=ub)
    solver = SimplexSolver(prob)
    for size in range(k + 1):
        for support in itertools.combinations(range(n), size):
            chosen = set(support)
            for pos, j in enumerate(z_idx):
                val = 1.0 if pos in chosen else 0.0
                solver.set_bound(j, val, val)
            solver.reset_basis()
            sol = solver.solve()
            if sol.status == "infeasible":
                continue
            if sol.status != "optimal":
                return False
            if sol.objective < cut.rhs - MARGIN_TOL:
                return False
    return True
