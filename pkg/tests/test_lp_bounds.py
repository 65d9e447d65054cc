import io
import math

import numpy as np
import pytest

from fountain_lab import (
    BoundRow,
    LpProblem,
    dual_outer_bound,
    dual_outer_bound_details,
    max_useful_degree,
    outer_bound_curve,
    primal_min_r,
    simplex_solve,
    truncated_soliton,
)
from fountain_lab.lp_bounds import (
    STATUS_INFEASIBLE,
    STATUS_ITERATION_LIMIT,
    STATUS_OPTIMAL,
    STATUS_UNBOUNDED,
    build_outer_bound_problem,
)


def known_region_rate(z):
    return -math.log1p(-z) / (2.0 * z) if z > 0.5 else -math.log1p(-z)


# --- simplex ---

def test_simplex_box():
    p = LpProblem(objective=np.array([1.0]),
                  constraint_matrix=np.array([[1.0]]),
                  constraint_rhs=np.array([1.0]))
    sol = simplex_solve(p)
    assert sol.status == STATUS_OPTIMAL
    assert sol.objective_value == pytest.approx(1.0, abs=1e-12)


def test_simplex_two_variable_vertex():
    p = LpProblem(objective=np.array([1.0, 1.0]),
                  constraint_matrix=np.array([[1.0, 2.0], [3.0, 1.0]]),
                  constraint_rhs=np.array([4.0, 6.0]))
    sol = simplex_solve(p)
    assert sol.status == STATUS_OPTIMAL
    # optimum at the constraint intersection (1.6, 1.2)
    assert sol.variable_values == pytest.approx([1.6, 1.2], abs=1e-9)
    assert sol.objective_value == pytest.approx(2.8, abs=1e-9)


def test_simplex_infeasible():
    p = LpProblem(objective=np.array([1.0]),
                  constraint_matrix=np.array([[-1.0], [1.0]]),
                  constraint_rhs=np.array([-1.0, 0.0]))
    assert simplex_solve(p).status == STATUS_INFEASIBLE


def test_simplex_unbounded():
    p = LpProblem(objective=np.array([1.0]),
                  constraint_matrix=np.array([[-1.0]]),
                  constraint_rhs=np.array([1.0]))
    assert simplex_solve(p).status == STATUS_UNBOUNDED


def test_simplex_iteration_limit():
    p = LpProblem(objective=np.array([1.0, 1.0]),
                  constraint_matrix=np.array([[1.0, 2.0], [3.0, 1.0]]),
                  constraint_rhs=np.array([4.0, 6.0]))
    assert simplex_solve(p, max_iterations=1).status == STATUS_ITERATION_LIMIT


def test_simplex_minimize_with_mixed_rows():
    # min x + y  s.t.  x + y >= 2, x <= 5, y = 1  ->  (1, 1), value 2
    p = LpProblem(objective=np.array([1.0, 1.0]),
                  constraint_matrix=np.array([[1.0, 1.0], [1.0, 0.0], [0.0, 1.0]]),
                  constraint_rhs=np.array([2.0, 5.0, 1.0]),
                  sense="minimize",
                  row_relations=(">=", "<=", "="))
    sol = simplex_solve(p)
    assert sol.status == STATUS_OPTIMAL
    assert sol.objective_value == pytest.approx(2.0, abs=1e-9)
    assert sol.variable_values == pytest.approx([1.0, 1.0], abs=1e-9)


def test_simplex_against_scipy_oracle():
    scipy_opt = pytest.importorskip("scipy.optimize")
    rng = np.random.default_rng(1234)
    agreements = 0
    for _ in range(60):
        n = int(rng.integers(1, 7))
        m = int(rng.integers(1, 7))
        A = rng.normal(size=(m, n)).round(3)
        b = rng.normal(scale=2.0, size=m).round(3)
        c = rng.normal(size=n).round(3)
        relations = tuple(rng.choice(["<=", ">=", "="], p=[0.6, 0.3, 0.1]) for _ in range(m))
        problem = LpProblem(objective=c, constraint_matrix=A, constraint_rhs=b,
                            sense="maximize", row_relations=relations)
        ours = simplex_solve(problem)

        A_ub, b_ub, A_eq, b_eq = [], [], [], []
        for i, rel in enumerate(relations):
            if rel == "<=":
                A_ub.append(A[i]); b_ub.append(b[i])
            elif rel == ">=":
                A_ub.append(-A[i]); b_ub.append(-b[i])
            else:
                A_eq.append(A[i]); b_eq.append(b[i])
        ref = scipy_opt.linprog(
            -c,
            A_ub=np.array(A_ub) if A_ub else None,
            b_ub=np.array(b_ub) if b_ub else None,
            A_eq=np.array(A_eq) if A_eq else None,
            b_eq=np.array(b_eq) if b_eq else None,
            bounds=(0, None), method="highs")

        if ref.status == 0:
            assert ours.status == STATUS_OPTIMAL, (A, b, c, relations)
            assert ours.objective_value == pytest.approx(-ref.fun, abs=1e-7)
            agreements += 1
        elif ref.status == 2:
            assert ours.status == STATUS_INFEASIBLE
        elif ref.status == 3:
            assert ours.status == STATUS_UNBOUNDED
    assert agreements >= 10  # the sample must contain real optima


def test_simplex_dual_values_certify_optimum():
    # duals of max c.x s.t. Ax <= b: nonnegative, dual-feasible, zero gap
    rng = np.random.default_rng(77)
    for _ in range(20):
        n, m = int(rng.integers(2, 6)), int(rng.integers(2, 6))
        A = np.abs(rng.normal(size=(m, n))) + 0.1
        b = np.abs(rng.normal(size=m)) + 0.5
        c = np.abs(rng.normal(size=n))
        sol = simplex_solve(LpProblem(objective=c, constraint_matrix=A, constraint_rhs=b))
        assert sol.status == STATUS_OPTIMAL
        duals = sol.dual_values
        assert (duals >= -1e-9).all()
        assert (A.T @ duals >= c - 1e-8).all()
        assert float(duals @ b) == pytest.approx(sol.objective_value, abs=1e-8)


# --- outer bound (moment LP) ---

def test_dual_outer_bound_small_targets():
    assert dual_outer_bound(0.3) == pytest.approx(-math.log1p(-0.3), abs=1e-9)
    assert dual_outer_bound(0.5) == pytest.approx(math.log(2.0), abs=1e-9)


def test_dual_outer_bound_known_region():
    value = dual_outer_bound(0.6)
    assert 0.7625 <= value <= 0.763576 + 1e-9
    assert value == pytest.approx(known_region_rate(0.6), abs=1e-9)
    value = dual_outer_bound(2.0 / 3.0)
    assert 0.8229 <= value <= 0.823960
    assert value == pytest.approx(0.75 * math.log(3.0), abs=2e-3)


def test_dual_outer_bound_validates():
    with pytest.raises(ValueError):
        dual_outer_bound(1.0)
    with pytest.raises(ValueError):
        dual_outer_bound(0.5, grid_step=0.5)


def test_dual_solution_support_is_inspectable():
    value, xs, masses = dual_outer_bound_details(0.75)
    assert value == pytest.approx(dual_outer_bound(0.75), abs=1e-12)
    assert xs[-1] == pytest.approx(0.75, abs=1e-15)
    support = xs[masses > 1e-9]
    assert support.size >= 2  # mass spreads beyond a single point here


def test_moment_constraints_certified_by_explicit_point():
    # the two-point distribution with mass 1/(2z) at z is feasible for the
    # moment LP and achieves -log(1-z)/(2z) exactly on z in [1/2, 2/3]
    for z in np.linspace(0.5, 2.0 / 3.0, 7):
        problem, xs = build_outer_bound_problem(float(z))
        f = np.zeros_like(xs)
        f[0] = 1.0 - 1.0 / (2.0 * z)
        f[-1] = 1.0 / (2.0 * z)
        residual = problem.constraint_matrix @ f - problem.constraint_rhs
        assert (residual <= 1e-12).all()
        assert float(problem.objective @ f) == pytest.approx(
            known_region_rate(float(z)), abs=1e-12)
        assert dual_outer_bound(float(z)) >= float(problem.objective @ f) - 1e-9


# --- primal (cheapest distribution) ---

def test_primal_min_r_examples():
    dist, r = primal_min_r(0.3)
    assert dist.as_dict() == {1: 1.0}
    assert r == pytest.approx(0.356675, abs=5e-4)
    dist, r = primal_min_r(0.6)
    assert dist.as_dict() == {2: 1.0}
    assert r == pytest.approx(0.763576, abs=2e-3)
    dist, r = primal_min_r(0.75)
    assert dual_outer_bound(0.75) - 1e-9 <= r <= 0.877065


def test_primal_min_r_validates():
    with pytest.raises(ValueError):
        primal_min_r(0.0)
    with pytest.raises(ValueError):
        primal_min_r(1.0)


def test_weak_duality_everywhere():
    for z in (0.1, 0.25, 0.4, 0.5, 0.6, 2.0 / 3.0, 0.7, 0.8, 0.9, 0.95):
        _, upper = primal_min_r(z)
        assert dual_outer_bound(z) <= upper + 1e-6


def test_zero_gap_on_known_region():
    # exact rate is -log(1-z) up to z = 1/2 and -log(1-z)/(2z) beyond
    for z in (0.50, 0.55, 0.60, 0.65, 2.0 / 3.0):
        target = known_region_rate(z)
        _, upper = primal_min_r(z)
        assert abs(upper - target) <= 2e-3
        assert abs(dual_outer_bound(z) - target) <= 2e-3


def test_support_cap_holds_with_headroom():
    # granting degrees above the useful cap must leave them unused
    for z in (0.3, 0.5, 0.55, 0.6, 2.0 / 3.0, 0.75, 0.9):
        m = max_useful_degree(z)
        dist, r = primal_min_r(z, support_limit=m + 3)
        for degree in range(m + 1, m + 4):
            assert dist.mass(degree) * r <= 1e-9, (z, degree)


def test_inner_design_sits_between_bounds():
    for z in (0.70, 0.75, 0.80, 0.85, 0.90):
        design = truncated_soliton(z)
        lower = dual_outer_bound(z)
        assert lower <= design.a
        assert design.a - lower < 0.05


# --- curve assembly ---

def test_bound_curve_empty():
    curve = outer_bound_curve([])
    assert curve.rows == ()


def test_bound_curve_boundary_row():
    curve = outer_bound_curve([0.5])
    row = curve.rows[0]
    assert row.m == 1
    assert row.r_lower_dual == pytest.approx(math.log(2.0), abs=2e-3)
    assert row.r_upper_primal == pytest.approx(math.log(2.0), abs=2e-3)


def test_bound_curve_monotone_rows():
    curve = outer_bound_curve([2.0 / 3.0, 0.75, 0.9])
    lowers = [row.r_lower_dual for row in curve.rows]
    uppers = [row.r_upper_primal for row in curve.rows]
    assert lowers == sorted(lowers) and len(set(lowers)) == 3
    assert uppers == sorted(uppers) and len(set(uppers)) == 3


def test_bound_row_validates_m_and_gap():
    with pytest.raises(ValueError):
        BoundRow(z=0.75, r_lower_dual=1.0, r_upper_primal=0.9, m=3)
    with pytest.raises(ValueError):
        BoundRow(z=0.75, r_lower_dual=0.8, r_upper_primal=0.9, m=5)


def test_bound_curve_csv_round_trip():
    curve = outer_bound_curve([0.4, 0.75])
    buf = io.StringIO()
    curve.write_csv(buf)
    lines = buf.getvalue().strip().splitlines()
    assert lines[0] == "z,r_lower,r_upper,m"
    for line, row in zip(lines[1:], curve.rows):
        z, lo, hi, m = line.split(",")
        assert float(z) == pytest.approx(row.z, rel=1e-9)
        assert float(lo) == pytest.approx(row.r_lower_dual, rel=1e-8)
        assert float(hi) == pytest.approx(row.r_upper_primal, rel=1e-8)
        assert int(m) == row.m
        # nine significant digits round-trip
        assert f"{float(lo):.9g}" == lo
