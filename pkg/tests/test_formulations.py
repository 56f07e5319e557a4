"""Formulation builders: quantiles, big-M, row contracts, radius ceiling."""
import math

import numpy as np
import pytest

from drccp import formulations as F
from drccp import transport
from drccp.bnc import model_to_lp
from drccp.model import DrccpInstance, Polyhedron, SafetyRow, SampleSet
from drccp.simplex import solve_lp
from conftest import box_instance, line_instance, small_transport


def values_instance(values, epsilon, theta=0.05):
    """Instance whose quantile statistics are exactly the given values: one
    safety row with b=[-1], so -b @ xi_i = values[i] and the dual norm is 1."""
    values = np.asarray(values, dtype=float).reshape(-1, 1)
    return DrccpInstance(
        cost=[1.0],
        domain=Polyhedron(G=np.zeros((0, 1)), g=[], lb=[0.0], ub=[10.0]),
        rows=(SafetyRow(a=[-1.0], b=[-1.0], d=0.0),),
        samples=SampleSet(values),
        epsilon=epsilon,
        theta=theta,
    )


class TestQuantiles:
    def test_hand_case(self):
        inst = values_instance([3.0, 1.0, 4.0, 1.0, 5.0], epsilon=0.2)
        quant = F.compute_quantiles(inst)
        assert quant.k == 1
        # Second largest of (3, 1, 4, 1, 5) is 4.
        np.testing.assert_allclose(quant.q, [4.0])
        np.testing.assert_allclose(quant.h[:, 0], [-1.0, -3.0, 0.0, -3.0, 1.0])
        np.testing.assert_array_equal(quant.surviving[0], [4])

    def test_ties_leave_no_survivors(self):
        inst = values_instance([2.0, 2.0, 2.0], epsilon=0.4)
        quant = F.compute_quantiles(inst)
        assert quant.k == 1
        np.testing.assert_allclose(quant.q, [2.0])
        assert quant.surviving[0].size == 0

    def test_survivor_count_bounded_by_k(self):
        for seed in range(10):
            inst = box_instance(seed=seed, n=12, rows=3, epsilon=0.25)
            quant = F.compute_quantiles(inst)
            for surv in quant.surviving:
                assert surv.size <= inst.k

    def test_h_scaled_by_dual_norm(self):
        # b = [-3, -4] under the l2 norm: scale 5.
        samples = np.array([[1.0, 1.0], [0.0, 0.0], [2.0, 2.0]])
        inst = DrccpInstance(
            cost=[1.0],
            domain=Polyhedron(G=np.zeros((0, 1)), g=[], lb=[0.0], ub=[1.0]),
            rows=(SafetyRow(a=[0.0], b=[-3.0, -4.0], d=0.0),),
            samples=SampleSet(samples),
            epsilon=0.4,
            theta=0.05,
        )
        quant = F.compute_quantiles(inst)
        # v = (7, 0, 14), k = 1, q = 7, h = (v - 7) / 5.
        np.testing.assert_allclose(quant.q, [7.0])
        np.testing.assert_allclose(quant.h[:, 0], [0.0, -1.4, 1.4])


class TestBigM:
    def test_zero_a_fast_path(self):
        inst = values_instance([1.0, 2.0, 5.0], epsilon=0.4)
        inst = DrccpInstance(
            cost=inst.cost, domain=inst.domain,
            rows=(SafetyRow(a=[0.0], b=[-1.0], d=0.0),),
            samples=inst.samples, epsilon=inst.epsilon, theta=inst.theta,
        )
        # margin = -xi / 1, so the bracket is [-5, -1] and the bound is 5.
        assert F.compute_big_m(inst) == 5.0

    def test_bracket_includes_domain_extremes(self):
        inst = line_instance([0.5, 1.5], epsilon=0.5, theta=0.05, lo=0.0, hi=10.0)
        # margin = x - xi over x in [0, 10]: range [-1.5, 9.5] => bound 9.5.
        assert F.compute_big_m(inst) == pytest.approx(9.5, abs=1e-12)

    def test_unbounded_domain_rejected(self):
        inst = line_instance([0.5], epsilon=0.5, theta=0.05, lo=0.0, hi=math.inf)
        with pytest.raises(ValueError, match="not compact"):
            F.compute_big_m(inst)

    def test_matches_transport_closed_form(self):
        for seed in (1, 7, 23):
            tp, inst = small_transport(seed=seed)
            assert F.compute_big_m(inst) == pytest.approx(
                transport.transport_big_m(tp), abs=1e-9
            )


class TestRowContracts:
    @pytest.fixture
    def case(self):
        inst = box_instance(seed=5, n=8, dim=2, rows=3, epsilon=0.25, theta=0.04)
        return inst, F.compute_big_m(inst), F.compute_quantiles(inst)

    def counts(self, model):
        return {
            lbl: len(model.rows_labeled(lbl))
            for lbl in ("domain", "budget", "indicator", "knapsack", "scenario",
                        "scenario_saa", "quantile_bound")
        }

    def test_saa_layout(self, case):
        inst, bm, _ = case
        m = F.build_saa(inst, big_m=bm)
        c = self.counts(m)
        assert c == {"domain": 0, "budget": 0, "indicator": 0, "knapsack": 1,
                     "scenario": 0, "scenario_saa": inst.n * inst.p, "quantile_bound": 0}
        assert len(m.block_indices("x")) == inst.dim_x
        assert len(m.block_indices("z")) == inst.n
        assert m.block_indices("r") == [] and m.block_indices("t") == []

    def test_basic_layout(self, case):
        inst, bm, _ = case
        m = F.build_basic(inst, big_m=bm)
        c = self.counts(m)
        assert c == {"domain": 0, "budget": 1, "indicator": inst.n, "knapsack": 0,
                     "scenario": inst.n * inst.p, "scenario_saa": 0, "quantile_bound": 0}
        assert len(m.block_indices("r")) == inst.n
        assert len(m.block_indices("t")) == 1

    def test_knapsack_layout(self, case):
        inst, bm, _ = case
        c = self.counts(F.build_knapsack(inst, big_m=bm))
        assert c["knapsack"] == 1
        assert c["scenario"] == inst.n * inst.p
        assert c["scenario_saa"] == inst.n * inst.p

    def test_reduced_layout(self, case):
        inst, bm, quant = case
        m = F.build_reduced(inst, big_m=bm, quant=quant)
        c = self.counts(m)
        assert c["scenario"] == inst.n * inst.p
        assert c["scenario_saa"] == 0 and c["quantile_bound"] == 0
        # Every z coefficient in a scenario row is the matching h entry.
        z_idx = set(m.block_indices("z"))
        seen = 0
        for ridx in m.rows_labeled("scenario"):
            for j, coef in m.constraints[ridx].coefs:
                if j in z_idx:
                    seen += 1
                    i = m.block_indices("z").index(j)
                    assert any(
                        abs(coef - quant.h[i, p]) <= 1e-12 for p in range(inst.p)
                    )
        assert seen > 0

    def test_compact_layout(self, case):
        inst, bm, quant = case
        m = F.build_compact(inst, big_m=bm, quant=quant)
        c = self.counts(m)
        assert c["scenario"] == sum(s.size for s in quant.surviving)
        assert c["quantile_bound"] == inst.p

    def test_domain_rows_carried(self):
        tp, inst = small_transport(seed=3)
        m = F.build_compact(inst)
        assert len(m.rows_labeled("domain")) == inst.domain.G.shape[0]
        assert inst.domain.G.shape[0] > 0

    def test_zero_theta_rejected(self):
        inst = line_instance([0.1, 0.9], epsilon=0.5, theta=0.0)
        for kind in ("basic", "knapsack", "reduced", "compact"):
            with pytest.raises(ValueError, match="saa formulation"):
                F.build_formulation(inst, kind)
        # The empirical baseline accepts radius zero.
        F.build_saa(inst)

    def test_unknown_kind_rejected(self):
        inst = line_instance([0.1, 0.9], epsilon=0.5, theta=0.1)
        with pytest.raises(ValueError, match="unknown formulation"):
            F.build_formulation(inst, "fancy")

    def test_big_m_override_lands_in_rows(self, case):
        inst, _, _ = case
        m = F.build_saa(inst, big_m=123.5)
        z_idx = set(m.block_indices("z"))
        row = m.constraints[m.rows_labeled("scenario_saa")[0]]
        zc = [coef for j, coef in row.coefs if j in z_idx]
        assert zc == [123.5]


class TestLpRelaxationOrdering:
    def lp_bound(self, model):
        prob, sign = model_to_lp(model)
        sol = solve_lp(prob)
        assert sol.status == "optimal"
        return sign * sol.objective

    def test_strengthening_chain(self):
        # The LP relaxations tighten along basic -> knapsack -> reduced ->
        # compact on every seeded instance.
        for seed in range(12):
            inst = box_instance(seed=seed, n=10, dim=3, rows=2, epsilon=0.25, theta=0.03)
            bm = F.compute_big_m(inst)
            quant = F.compute_quantiles(inst)
            vals = {
                kind: self.lp_bound(F.build_formulation(inst, kind, big_m=bm, quant=quant))
                for kind in ("basic", "knapsack", "reduced", "compact")
            }
            assert vals["knapsack"] >= vals["basic"] - 1e-9
            assert vals["reduced"] >= vals["knapsack"] - 1e-9
            assert vals["compact"] >= vals["reduced"] - 1e-9


class TestThetaMax:
    def test_hand_case(self):
        # One decision x in [0, 1], margins x - xi, samples 0.1..0.5, eps 0.2.
        # At x = 1 distances are (0.5..0.9); the radius budget maximum is
        # eps * t - mean((t - d)^+), flat at 0.1 for t in [0.5, 0.6].
        inst = line_instance([0.1, 0.2, 0.3, 0.4, 0.5], epsilon=0.2, theta=0.01,
                             lo=0.0, hi=1.0)
        val = F.theta_max(inst)
        assert val == pytest.approx(0.1, abs=1e-9)

    def test_matrices_agree(self):
        inst = line_instance([0.1, 0.2, 0.3, 0.4, 0.5], epsilon=0.2, theta=0.01,
                             lo=0.0, hi=1.0)
        vals = [F.theta_max(inst, matrix=mx) for mx in ("basic", "knapsack", "compact")]
        assert max(vals) - min(vals) <= 1e-9

    def test_transport_matrices_agree(self):
        tp, inst = small_transport(seed=11)
        a = F.theta_max(inst, matrix="compact")
        b = F.theta_max(inst, matrix="basic")
        assert a == pytest.approx(b, rel=1e-7)

    def test_unsupported_matrix(self):
        inst = line_instance([0.1], epsilon=0.5, theta=0.01)
        with pytest.raises(ValueError, match="matrix"):
            F.build_theta_variant(inst, matrix="reduced")

    def test_objective_is_theta_maximization(self):
        inst = line_instance([0.1, 0.2], epsilon=0.5, theta=0.01)
        m = F.build_theta_variant(inst, matrix="compact")
        assert m.obj_sense == "max"
        (j, coef), = m.objective
        assert j == m.block_indices("theta")[0] and coef == 1.0

    def test_grid_shape(self):
        grid = F.theta_grid(1.0)
        assert len(grid) == 10
        assert grid[0] == 0.001
        np.testing.assert_allclose(grid[1:], [j / 10.0 for j in range(1, 10)])
        assert all(b > a for a, b in zip(grid, grid[1:]))
