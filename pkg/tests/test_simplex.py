import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy.optimize import linprog

from conftest import tiny_instance
from vnerab.model import Column, MilpModel, ModelConfig, Row, build_model
from vnerab.solver import solve_lp
from vnerab.solver.simplex import INFEASIBLE, NUMERICAL, OPTIMAL, UNBOUNDED, LpParams


def lp(c, rows, ub, lb=None, sense="max"):
    n = len(c)
    lb = [0.0] * n if lb is None else lb
    cols = tuple(Column(f"c{j}", "continuous", float(lb[j]), float(ub[j])) for j in range(n))
    rws = tuple(Row(f"r{k}", tuple((j, float(a)) for j, a in enumerate(coefs) if a), s, float(b))
                for k, (coefs, s, b) in enumerate(rows))
    return MilpModel(cols, rws, tuple((j, float(v)) for j, v in enumerate(c)), sense)


def reference(model):
    """Same LP through HiGHS, as (status, objective)."""
    A = model.matrix.toarray()
    b = model.rhs
    ub_rows = [k for k, s in enumerate(model.senses) if s != "="]
    eq_rows = [k for k, s in enumerate(model.senses) if s == "="]
    flip = np.array([1.0 if model.senses[k] == "<=" else -1.0 for k in ub_rows])
    sign = -1.0 if model.sense == "max" else 1.0
    res = linprog(sign * model.cost,
                  A_ub=A[ub_rows] * flip[:, None] if ub_rows else None,
                  b_ub=b[ub_rows] * flip if ub_rows else None,
                  A_eq=A[eq_rows] if eq_rows else None, b_eq=b[eq_rows] if eq_rows else None,
                  bounds=[(lo, None if math.isinf(hi) else hi) for lo, hi in zip(model.lower, model.upper)],
                  method="highs")
    status = {0: OPTIMAL, 2: INFEASIBLE, 3: UNBOUNDED}[res.status]
    return status, (sign * res.fun if res.status == 0 else math.nan)


def test_single_bound_row():
    sol = solve_lp(lp([1.0], [([1.0], "<=", 3.0)], [10.0]))
    assert sol.status == OPTIMAL and sol.objective == pytest.approx(3.0)
    assert sol.x[0] == pytest.approx(3.0)


def test_contradictory_rows_infeasible():
    sol = solve_lp(lp([1.0], [([1.0], "<=", 1.0), ([1.0], ">=", 2.0)], [10.0]))
    assert sol.status == INFEASIBLE


def test_unbounded_direction():
    sol = solve_lp(lp([1.0, 1.0], [([1.0, -1.0], "<=", 1.0)], [math.inf, math.inf]))
    assert sol.status == UNBOUNDED


def test_minimization_and_negative_lower_bounds():
    # y at its floor -3 forces x >= 2
    model = lp([1.0, 2.0], [([1.0, 1.0], ">=", -1.0)], [4.0, 4.0], lb=[-3.0, -3.0], sense="min")
    sol = solve_lp(model)
    assert sol.status == OPTIMAL and sol.objective == pytest.approx(2.0 - 6.0)
    assert reference(model) == (OPTIMAL, pytest.approx(-4.0))


def test_bound_override():
    model = lp([1.0, 1.0], [([1.0, 1.0], "<=", 5.0)], [4.0, 4.0])
    sol = solve_lp(model, lower=np.array([0.0, 0.0]), upper=np.array([1.0, 1.0]))
    assert sol.objective == pytest.approx(2.0)
    assert solve_lp(model, upper=np.array([-1.0, 1.0])).status == INFEASIBLE


def test_equalities_and_degenerate_vertex():
    rows = [([1, 1, 1], "=", 1), ([1, -1, 0], "<=", 0), ([0, 1, -1], "<=", 0), ([1, 0, -1], "<=", 0)]
    sol = solve_lp(lp([3, 2, 1], rows, [1, 1, 1]))
    assert sol.status == OPTIMAL and sol.objective == pytest.approx(2.0)


@st.composite
def random_lps(draw):
    m = draw(st.integers(1, 8))
    n = draw(st.integers(1, 10))
    entry = st.integers(-3, 3)
    rows = []
    for _ in range(m):
        coefs = draw(st.lists(entry, min_size=n, max_size=n))
        rows.append((coefs, draw(st.sampled_from(["<=", "<=", "=", ">="])), draw(st.integers(-5, 9))))
    c = draw(st.lists(st.integers(-5, 5), min_size=n, max_size=n))
    ub = draw(st.lists(st.one_of(st.integers(1, 5), st.just(math.inf)), min_size=n, max_size=n))
    return lp(c, rows, ub)


@settings(max_examples=300, deadline=None)
@given(random_lps())
def test_matches_reference_solver(model):
    sol = solve_lp(model)
    status, value = reference(model)
    assert sol.status == status
    if status == OPTIMAL:
        assert sol.objective == pytest.approx(value, abs=1e-6)
        assert model.row_violation(sol.x) <= 1e-6
        assert model.objective_value(sol.x) == pytest.approx(sol.objective, abs=1e-6)


def test_toy_relaxation_matches_reference(toy):
    for routing in ("single-path", "splittable"):
        model, _ = build_model(toy, ModelConfig(routing))
        sol = solve_lp(model)
        status, value = reference(model)
        assert sol.status == status == OPTIMAL
        assert sol.objective == pytest.approx(value, abs=1e-6)


@settings(max_examples=30, deadline=None)
@given(st.integers(0, 1000))
def test_generated_relaxations_match_reference(seed):
    model, _ = build_model(tiny_instance(seed))
    sol = solve_lp(model)
    status, value = reference(model)
    assert sol.status == status == OPTIMAL
    assert sol.objective == pytest.approx(value, abs=1e-6)
    assert model.row_violation(sol.x) <= 1e-6


def test_iteration_cap_reports_breakdown():
    model, _ = build_model(tiny_instance(3))
    assert solve_lp(model).iterations > 2
    sol = solve_lp(model, LpParams(max_iterations=1))
    assert sol.status == NUMERICAL and sol.x is None
