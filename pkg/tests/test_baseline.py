import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import DEFAULT_BULKS, make_request, tiny_instance, toy_substrate
from vnerab.baseline import run_baseline
from vnerab.embed import solve_embedding
from vnerab.instance import BulkCatalog, Instance, SubstrateNetwork
from vnerab.model import ModelConfig
from vnerab.solver.bnb import STATUS_OPTIMAL, SolveParams
from vnerab.verify import check_solution

EXACT = SolveParams(gap=0.0)


def test_zero_requests():
    res = run_baseline(Instance(toy_substrate(), BulkCatalog.build(DEFAULT_BULKS)))
    assert res.profit == 0 and res.feasible


def eleven_unit_instance():
    sub = SubstrateNetwork.build([10.0, 10.0], {(0, 1): 50.0, (1, 0): 50.0})
    req = make_request(0, [1.0, 1.0], [(0, 1, 11.0)], locality=[{0}, {1}])
    return Instance(sub, BulkCatalog.build(DEFAULT_BULKS), (req,))


def test_eleven_units_priced_at_six():
    inst = eleven_unit_instance()
    res = run_baseline(inst, "single-path", EXACT)
    cov = res.arc_coverings[(0, 1)]
    assert res.solution.arc_usage[(0, 1)] == pytest.approx(11.0)
    assert cov.cost == 6 and cov.counts == (1, 1, 0)
    assert res.arc_coverings[(1, 0)].cost == 0
    assert res.profit == pytest.approx(500 - 6 - 1 - 1)
    assert check_solution(inst, res.solution, "single-path").ok


def test_capacity_violations_are_flagged():
    # bulks of size 2 and 4 cannot cover 3.5 units within a capacity of 3.5
    sub = SubstrateNetwork.build([3.5], {})
    req = make_request(0, [3.5], substrate=sub)
    inst = Instance(sub, BulkCatalog.build([(2.0, 2.0), (4.0, 3.0)]), (req,))
    res = run_baseline(inst, "single-path", EXACT)
    assert not res.feasible
    assert res.infeasible_resources == [("node", 0)]
    assert res.node_coverings[0].counts == (0, 1)


@settings(max_examples=30, deadline=None)
@given(st.integers(0, 3000), st.sampled_from(["single-path", "splittable"]))
def test_exact_dominates_baseline(seed, routing):
    inst = tiny_instance(seed)
    exact = solve_embedding(inst, ModelConfig(routing, "integral"), EXACT)
    base = run_baseline(inst, routing, EXACT)
    assert exact.milp.status == STATUS_OPTIMAL
    if base.feasible:
        assert exact.milp.objective >= base.profit - 1e-6
        assert check_solution(inst, base.solution, routing).ok
