import io
import math
import re

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy.optimize import Bounds, LinearConstraint, milp

from conftest import DEFAULT_BULKS, make_request, tiny_instance, toy_substrate
from vnerab.embed import solve_embedding
from vnerab.generator import PRESETS, GeneratorConfig, generate_instance
from vnerab.instance import BulkCatalog, Instance
from vnerab.model import Column, MilpModel, ModelConfig, Row
from vnerab.solver.bnb import (STATUS_GAP, STATUS_INFEASIBLE, STATUS_NODES, STATUS_OPTIMAL, SolveParams,
                               relative_gap, solve_milp)


def milp_model(c, rows, ub, integer, offset=0.0):
    """Maximization MILP; ``offset`` adds a column fixed at 1 with that profit."""
    cols = tuple(Column(f"c{j}", "integer" if integer[j] else "continuous", 0.0, float(ub[j]))
                 for j in range(len(c)))
    rws = tuple(Row(f"r{k}", tuple((j, float(a)) for j, a in enumerate(coefs) if a), s, float(b))
                for k, (coefs, s, b) in enumerate(rows))
    obj = tuple((j, float(v)) for j, v in enumerate(c))
    if offset:
        cols += (Column("one", "continuous", 1.0, 1.0),)
        obj += ((len(c), float(offset)),)
    return MilpModel(cols, rws, obj)


def reference(model):
    A = model.matrix.toarray()
    lo = np.array([-np.inf if s == "<=" else b for s, b in zip(model.senses, model.rhs)])
    hi = np.array([np.inf if s == ">=" else b for s, b in zip(model.senses, model.rhs)])
    cons = [LinearConstraint(A, lo, hi)] if model.n_rows else []
    res = milp(-model.cost, constraints=cons, integrality=model.integer_mask.astype(int),
               bounds=Bounds(model.lower, model.upper),
               # HiGHS presolve misreports optima on some tiny mixed models, e.g. max x0 s.t. 2 x0 + 2 x2 <= 1
               options={"mip_rel_gap": 0.0, "presolve": False})
    return (-res.fun if res.status == 0 else None), res.status


@st.composite
def random_milps(draw):
    m = draw(st.integers(1, 6))
    n = draw(st.integers(1, 7))
    rows = [(draw(st.lists(st.integers(-4, 4), min_size=n, max_size=n)),
             draw(st.sampled_from(["<=", "<=", "=", ">="])), draw(st.integers(-4, 12))) for _ in range(m)]
    c = draw(st.lists(st.integers(-6, 9), min_size=n, max_size=n))
    ub = draw(st.lists(st.integers(1, 6), min_size=n, max_size=n))
    integer = draw(st.lists(st.booleans(), min_size=n, max_size=n))
    # the offset keeps optima positive, where the relative gap is meaningful
    return milp_model(c, rows, ub, integer, offset=1000.0)


@settings(max_examples=200, deadline=None)
@given(random_milps())
def test_matches_reference_milp(model):
    res = solve_milp(model, SolveParams(gap=0.0))
    value, status = reference(model)
    if value is None:
        assert status == 2 and res.status == STATUS_INFEASIBLE and res.x is None
        return
    assert res.status == STATUS_OPTIMAL
    assert res.objective == pytest.approx(value, abs=1e-6)
    assert model.row_violation(res.x) <= 1e-6
    frac = np.abs(res.x - np.round(res.x))[model.integer_mask]
    assert np.all(frac <= 1e-6)
    assert res.bound >= res.objective - 1e-9


def test_nonpositive_incumbent_convention():
    # optimum -2; with incumbent and bound both <= 0 the gap counts as closed
    model = milp_model([0, -2], [([0, 2], ">=", 1)], [1, 1], [False, True])
    res = solve_milp(model, SolveParams(gap=0.0))
    assert res.objective == pytest.approx(-2.0) and res.gap == 0.0


def test_relative_gap_rules():
    assert relative_gap(110.0, 100.0) == pytest.approx(0.1)
    assert relative_gap(5.0, None) == math.inf
    assert relative_gap(0.0, 0.0) == 0.0
    assert relative_gap(3.0, 0.0) == math.inf
    assert relative_gap(99.0, 100.0) == 0.0


def test_zero_requests_is_zero():
    inst = Instance(toy_substrate(), BulkCatalog.build(DEFAULT_BULKS))
    res = solve_embedding(inst)
    assert res.milp.status == STATUS_OPTIMAL and res.milp.objective == 0
    assert np.all(res.milp.x == 0)


def test_empty_locality_rejects_request():
    sub = toy_substrate()
    req = make_request(0, [1.0, 1.0], [(0, 1, 2.0)], locality=[set(), set()])
    res = solve_embedding(Instance(sub, BulkCatalog.build(DEFAULT_BULKS), (req,)), params=SolveParams(gap=0))
    assert res.milp.status == STATUS_OPTIMAL and res.milp.objective == 0
    assert res.solution.accepted == {0: False}


def test_gap_target_is_honoured():
    inst = generate_instance(PRESETS["ts10"], GeneratorConfig(seed=1, num_requests=4, max_vnodes=4))
    for gap in (0.0, 0.01, 0.2):
        res = solve_embedding(inst, params=SolveParams(gap=gap))
        assert res.milp.status in (STATUS_OPTIMAL, STATUS_GAP)
        assert res.milp.gap <= gap + 1e-9
        assert res.milp.bound >= res.milp.objective - 1e-9


def test_node_limit_stops_early():
    inst = generate_instance(PRESETS["ts10"], GeneratorConfig(seed=2, num_requests=6, max_vnodes=5))
    res = solve_embedding(inst, params=SolveParams(gap=0.0, node_limit=2))
    assert res.milp.nodes <= 2
    if res.milp.status == STATUS_NODES:
        assert res.milp.has_incumbent and res.milp.bound >= res.milp.objective


def test_params_validation():
    for bad in ({"gap": -1}, {"time_limit": 0}, {"node_limit": 0}, {"heuristic_every": 0}):
        with pytest.raises(ValueError):
            SolveParams(**bad)


def test_bound_is_monotone_in_trace():
    inst = tiny_instance(11)
    out = io.StringIO()
    res = solve_embedding(inst, ModelConfig("single-path"), SolveParams(gap=0.0), trace=out)
    bounds = [float(b) for b in re.findall(r" bound=(\S+)", out.getvalue())]
    assert bounds and len(bounds) == res.milp.nodes
    assert all(b2 <= b1 + 1e-9 for b1, b2 in zip(bounds, bounds[1:]))
    assert res.milp.bound <= bounds[-1] + 1e-9


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 2000))
def test_optimum_nonnegative_and_dominance(seed):
    inst = tiny_instance(seed)
    val = {}
    for routing in ("splittable", "single-path"):
        for rab in ("integral", "relaxed"):
            res = solve_embedding(inst, ModelConfig(routing, rab), SolveParams(gap=0.0))
            assert res.milp.status == STATUS_OPTIMAL
            assert res.milp.objective >= -1e-9
            val[routing, rab] = res.milp.objective
    for rab in ("integral", "relaxed"):
        assert val["splittable", rab] >= val["single-path", rab] - 1e-6
    for routing in ("splittable", "single-path"):
        assert val[routing, "relaxed"] >= val[routing, "integral"] - 1e-6
