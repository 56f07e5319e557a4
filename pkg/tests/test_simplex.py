"""LP solver: agreement with an independent solver, duality, certificates,
anti-cycling, determinism, warm starts and the MPS fixture reader."""
import math

import numpy as np
import pytest
from scipy.optimize import linprog

from drccp.simplex import (
    ST_BASIC,
    LpProblem,
    SimplexSolver,
    SimplexStall,
    read_mps,
    solve_lp,
)

TOL = 1e-7


def random_problem(rng, allow_equalities=True):
    n = rng.integers(2, 9)
    m = rng.integers(1, 13)
    A = np.round(rng.normal(size=(m, n)) * 3.0, 3)
    c = np.round(rng.normal(size=n) * 2.0, 3)
    kinds = ["<=", ">="] + (["=="] if allow_equalities else [])
    senses = [kinds[rng.integers(len(kinds))] for _ in range(m)]
    # Pick a reference point inside the box so most instances are feasible,
    # then set each rhs on the feasible side of it (equalities exactly).
    lb = np.where(rng.random(n) < 0.8, np.round(rng.uniform(-3, 0, n), 3), -math.inf)
    ub = np.where(rng.random(n) < 0.8, np.round(rng.uniform(0.5, 4, n), 3), math.inf)
    ref = np.where(np.isfinite(lb), lb, -1.0) * 0.3 + np.where(np.isfinite(ub), ub, 2.0) * 0.3
    b = A @ ref
    for i, s in enumerate(senses):
        if s == "<=":
            b[i] += abs(rng.normal()) * 0.5
        elif s == ">=":
            b[i] -= abs(rng.normal()) * 0.5
    return LpProblem(c=c, A=A, senses=senses, b=np.round(b, 3), lb=lb, ub=ub)


def scipy_solve(p):
    rows_ub, rhs_ub, rows_eq, rhs_eq = [], [], [], []
    for row, s, bi in zip(p.A, p.senses, p.b):
        if s == "<=":
            rows_ub.append(row)
            rhs_ub.append(bi)
        elif s == ">=":
            rows_ub.append(-row)
            rhs_ub.append(-bi)
        else:
            rows_eq.append(row)
            rhs_eq.append(bi)
    return linprog(
        p.c,
        A_ub=np.array(rows_ub) if rows_ub else None,
        b_ub=np.array(rhs_ub) if rhs_ub else None,
        A_eq=np.array(rows_eq) if rows_eq else None,
        b_eq=np.array(rhs_eq) if rhs_eq else None,
        bounds=list(zip(p.lb, p.ub)),
        method="highs",
    )


class TestAgainstReference:
    def test_random_lps_match_reference(self):
        rng = np.random.default_rng(20240814)
        statuses = {"optimal": 0, "infeasible": 0, "unbounded": 0}
        for _ in range(120):
            prob = random_problem(rng)
            ours = solve_lp(prob)
            ref = scipy_solve(prob)
            statuses[ours.status] += 1
            if ref.status == 0:
                assert ours.status == "optimal"
                scale = max(1.0, abs(ref.fun))
                assert abs(ours.objective - ref.fun) <= 1e-7 * scale
                np.testing.assert_allclose(prob.c @ ours.x, ours.objective, atol=1e-9)
            elif ref.status == 2:
                assert ours.status == "infeasible"
            elif ref.status == 3:
                assert ours.status == "unbounded"
        # The generator must actually exercise every outcome.
        assert statuses["optimal"] > 60
        assert statuses["infeasible"] > 0
        assert statuses["unbounded"] > 0

    def test_solution_feasibility(self):
        rng = np.random.default_rng(77)
        for _ in range(40):
            prob = random_problem(rng)
            sol = solve_lp(prob)
            if sol.status != "optimal":
                continue
            x = sol.x
            assert np.all(x >= prob.lb - 1e-7) and np.all(x <= prob.ub + 1e-7)
            act = prob.A @ x
            for i, s in enumerate(prob.senses):
                if s == "<=":
                    assert act[i] <= prob.b[i] + 1e-7
                elif s == ">=":
                    assert act[i] >= prob.b[i] - 1e-7
                else:
                    assert abs(act[i] - prob.b[i]) <= 1e-7


class TestDuality:
    def test_reduced_costs_and_sign_conditions(self):
        rng = np.random.default_rng(5150)
        checked = 0
        for _ in range(60):
            prob = random_problem(rng)
            sol = solve_lp(prob)
            if sol.status != "optimal":
                continue
            checked += 1
            d = prob.c - prob.A.T @ sol.duals
            np.testing.assert_allclose(sol.reduced_costs, d, atol=1e-7)
            basic_structurals = set(j for j in sol.basis if j < prob.num_cols)
            for j in range(prob.num_cols):
                if j in basic_structurals:
                    assert abs(d[j]) <= 1e-6
                elif abs(sol.x[j] - prob.lb[j]) <= 1e-7:
                    assert d[j] >= -1e-6  # raising from lower cannot improve a min
                elif abs(sol.x[j] - prob.ub[j]) <= 1e-7:
                    assert d[j] <= 1e-6
        assert checked > 30

    def test_strong_duality_identity(self):
        # c@x = y@b + d@x holds at optimality for the bounded-variable form.
        rng = np.random.default_rng(88)
        checked = 0
        for _ in range(40):
            prob = random_problem(rng)
            sol = solve_lp(prob)
            if sol.status != "optimal":
                continue
            checked += 1
            d = sol.reduced_costs
            lhs = prob.c @ sol.x
            rhs = sol.duals @ (prob.A @ sol.x) + d @ sol.x
            assert abs(lhs - rhs) <= 1e-6 * max(1.0, abs(lhs))
        assert checked > 20


def certificate_refutes(prob, y):
    """True if y proves infeasibility: the aggregated row cannot be met by
    any point of the box.  Tries both sign orientations."""
    for sign in (1.0, -1.0):
        yy = sign * y
        ok = True
        for yi, s in zip(yy, prob.senses):
            if s == "<=" and yi > 1e-9:
                ok = False
            if s == ">=" and yi < -1e-9:
                ok = False
        if not ok:
            continue
        u = prob.A.T @ yy
        drop = 1e-9 * max(1.0, float(np.abs(yy).sum() * np.abs(prob.A).max()))
        u[np.abs(u) <= drop] = 0.0
        best = 0.0
        for j in range(prob.num_cols):
            if u[j] > 0:
                best += u[j] * prob.ub[j]
            elif u[j] < 0:
                best += u[j] * prob.lb[j]
            if not math.isfinite(best):
                break
        if math.isfinite(best) and yy @ prob.b - best > 1e-9:
            return True
    return False


class TestCertificates:
    def test_farkas_on_random_infeasible(self):
        rng = np.random.default_rng(321)
        seen = 0
        for _ in range(400):
            prob = random_problem(rng)
            sol = solve_lp(prob)
            if sol.status != "infeasible":
                continue
            seen += 1
            assert sol.farkas is not None
            assert certificate_refutes(prob, sol.farkas)
            if seen >= 10:
                break
        assert seen >= 10

    def test_farkas_hand_case(self):
        # x <= 1 (box) but row demands x >= 2.
        prob = LpProblem(c=[1.0], A=[[1.0]], senses=[">="], b=[2.0], lb=[0.0], ub=[1.0])
        sol = solve_lp(prob)
        assert sol.status == "infeasible"
        assert certificate_refutes(prob, sol.farkas)

    def test_unbounded_ray(self):
        prob = LpProblem(
            c=[-1.0, 0.0],
            A=[[1.0, -1.0]],
            senses=["<="],
            b=[0.0],
            lb=[0.0, 0.0],
            ub=[math.inf, math.inf],
        )
        sol = solve_lp(prob)
        assert sol.status == "unbounded"
        ray = sol.ray
        assert prob.c @ ray < -1e-9
        act = prob.A @ ray
        assert act[0] <= 1e-9
        assert np.all(ray >= -1e-9)


class TestAntiCycling:
    def test_beale_example(self):
        # Classic degenerate LP on which naive Dantzig pricing cycles.
        prob = LpProblem(
            c=[-0.75, 150.0, -0.02, 6.0],
            A=[
                [0.25, -60.0, -1.0 / 25.0, 9.0],
                [0.5, -90.0, -1.0 / 50.0, 3.0],
                [0.0, 0.0, 1.0, 0.0],
            ],
            senses=["<=", "<=", "<="],
            b=[0.0, 0.0, 1.0],
            lb=np.zeros(4),
            ub=np.full(4, math.inf),
        )
        sol = solve_lp(prob)
        assert sol.status == "optimal"
        assert abs(sol.objective - (-0.05)) <= 1e-9
        np.testing.assert_allclose(sol.x, [1.0 / 25.0, 0.0, 1.0, 0.0], atol=1e-9)

    def test_iteration_cap_raises(self):
        rng = np.random.default_rng(9)
        prob = random_problem(rng)
        solver = SimplexSolver(prob)
        with pytest.raises(SimplexStall):
            solver.solve(max_iter=1)


class TestDeterminism:
    def test_pivot_replay_identical(self):
        rng = np.random.default_rng(1234)
        for _ in range(10):
            prob = random_problem(rng)
            s1 = solve_lp(prob, record_pivots=True)
            s2 = solve_lp(prob, record_pivots=True)
            assert s1.status == s2.status
            assert s1.pivots == s2.pivots
            if s1.status == "optimal":
                assert s1.objective == s2.objective
                np.testing.assert_array_equal(s1.x, s2.x)


class TestWarmStart:
    def test_add_row_warm_equals_cold(self):
        rng = np.random.default_rng(42)
        hits = 0
        for _ in range(30):
            prob = random_problem(rng, allow_equalities=False)
            solver = SimplexSolver(prob)
            first = solver.solve()
            if first.status != "optimal":
                continue
            # Cut off the current optimum with a fresh row.
            row = np.round(rng.normal(size=prob.num_cols), 3)
            rhs = row @ first.x - 0.25
            solver.add_row(row, "<=", rhs)
            warm = solver.solve()
            cold = solve_lp(
                LpProblem(
                    c=prob.c,
                    A=np.vstack([prob.A, row]),
                    senses=prob.senses + ["<="],
                    b=np.append(prob.b, rhs),
                    lb=prob.lb,
                    ub=prob.ub,
                )
            )
            assert warm.status == cold.status
            if warm.status == "optimal":
                hits += 1
                assert abs(warm.objective - cold.objective) <= 1e-7 * max(1.0, abs(cold.objective))
        assert hits > 10

    def test_set_bound_and_state_reload(self):
        rng = np.random.default_rng(4242)
        prob = random_problem(rng, allow_equalities=False)
        solver = SimplexSolver(prob)
        base = solver.solve()
        assert base.status == "optimal"
        state = solver.get_state()
        # Fix the first structural to its upper bound and re-solve warm.
        solver.set_bound(0, prob.ub[0] if math.isfinite(prob.ub[0]) else 1.0,
                         prob.ub[0] if math.isfinite(prob.ub[0]) else 1.0)
        fixed_warm = solver.solve()
        lb2, ub2 = prob.lb.copy(), prob.ub.copy()
        lb2[0] = ub2[0] = prob.ub[0] if math.isfinite(prob.ub[0]) else 1.0
        fixed_cold = solve_lp(LpProblem(c=prob.c, A=prob.A, senses=prob.senses,
                                        b=prob.b, lb=lb2, ub=ub2))
        assert fixed_warm.status == fixed_cold.status
        if fixed_warm.status == "optimal":
            assert abs(fixed_warm.objective - fixed_cold.objective) <= 1e-7
        # Restore the original bound and basis: the original optimum returns.
        solver.set_bound(0, prob.lb[0], prob.ub[0])
        solver.load_state(*state)
        again = solver.solve()
        assert again.status == "optimal"
        assert abs(again.objective - base.objective) <= 1e-9 * max(1.0, abs(base.objective))

    def test_load_state_pads_after_add_row(self):
        prob = LpProblem(
            c=[1.0, 2.0],
            A=[[1.0, 1.0]],
            senses=[">="],
            b=[1.0],
            lb=[0.0, 0.0],
            ub=[5.0, 5.0],
        )
        solver = SimplexSolver(prob)
        first = solver.solve()
        assert first.status == "optimal"
        state = solver.get_state()
        solver.add_row([0.0, 1.0], ">=", 0.25)
        solver.load_state(*state)  # captured before the row existed
        sol = solver.solve()
        assert sol.status == "optimal"
        assert abs(sol.objective - 1.25) <= 1e-9  # x = (0.75, 0.25)

    def test_load_state_shape_mismatch_rejected(self):
        prob = LpProblem(c=[1.0], A=[[1.0]], senses=["<="], b=[1.0], lb=[0.0], ub=[2.0])
        solver = SimplexSolver(prob)
        solver.solve()
        basis, stat = solver.get_state()
        with pytest.raises(ValueError, match="basis"):
            solver.load_state(basis[:0], stat)

    def test_set_bound_rejects_slack_index(self):
        prob = LpProblem(c=[1.0], A=[[1.0]], senses=["<="], b=[1.0], lb=[0.0], ub=[2.0])
        solver = SimplexSolver(prob)
        with pytest.raises(IndexError):
            solver.set_bound(1, 0.0, 0.0)


MPS_TEXT = """NAME          TOYLP
ROWS
 N  COST
 L  LIM1
 G  LIM2
 E  EQ1
COLUMNS
    X1  COST  1.0  LIM1  1.0
    X1  LIM2  1.0
    X2  COST  2.0  LIM1  1.0
    X2  EQ1   1.0
    X3  COST  -1.0  EQ1  1.0
RHS
    RHS  LIM1  4.0  LIM2  1.0
    RHS  EQ1   7.0
BOUNDS
 UP BND  X1  4.0
 LO BND  X2  -1.0
 UP BND  X2  10.0
 UP BND  X3  8.0
ENDATA
"""


class TestMpsReader:
    def test_round_trip_solve(self, tmp_path):
        path = tmp_path / "toy.mps"
        path.write_text(MPS_TEXT)
        prob = read_mps(path)
        assert prob.num_cols == 3 and prob.num_rows == 3
        assert prob.senses == ["<=", ">=", "=="]
        sol = solve_lp(prob)
        assert sol.status == "optimal"
        # min x1 + 2 x2 - x3 with x1+x2<=4, x1>=1, x2+x3=7, x2 in [-1,10],
        # x3 in [0,8]: take x1=1, x3=8, x2=-1 => objective 1 - 2 - 8 = -9.
        assert abs(sol.objective - (-9.0)) <= 1e-9
        np.testing.assert_allclose(sol.x, [1.0, -1.0, 8.0], atol=1e-9)

    def test_free_and_fixed_bounds(self, tmp_path):
        text = MPS_TEXT.replace(" UP BND  X3  8.0", " FX BND  X3  5.0")
        path = tmp_path / "toy2.mps"
        path.write_text(text)
        prob = read_mps(path)
        assert prob.lb[2] == 5.0 and prob.ub[2] == 5.0
