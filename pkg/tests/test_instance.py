import copy

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import DEFAULT_BULKS, make_request, toy_substrate
from vnerab.instance import (Arc, BulkCatalog, Instance, InvalidInstanceError, Node, SubstrateNetwork,
                             commodities, require_valid, validate)


def test_wellformed_instance_is_valid(toy):
    assert validate(toy) == []


def test_rising_unit_cost_is_one_violation():
    inst = Instance(toy_substrate(), BulkCatalog.build([(1, 1), (10, 20)], DEFAULT_BULKS))
    out = validate(inst)
    assert len(out) == 1
    assert "unit cost increases with size" in out[0]


def test_link_catalog_checked_by_symmetric_rule():
    inst = Instance(toy_substrate(), BulkCatalog.build(DEFAULT_BULKS, [(1, 1), (10, 20)]))
    out = validate(inst)
    assert len(out) == 1 and out[0].startswith("link_bulks")


def test_locality_naming_unknown_node():
    sub = toy_substrate()
    req = make_request(7, [1.0], locality=[{0, 9}])
    out = validate(Instance(sub, BulkCatalog.build(DEFAULT_BULKS), (req,)))
    assert len(out) == 1
    assert "request 7" in out[0] and "9" in out[0]


def test_empty_locality_is_legal():
    req = make_request(0, [1.0], locality=[set()])
    assert validate(Instance(toy_substrate(), BulkCatalog.build(DEFAULT_BULKS), (req,))) == []


@pytest.mark.parametrize("sub, fragment", [
    (SubstrateNetwork((Node(0, 1.0), Node(1, 1.0)), (Arc(0, 0, 1.0),)), "self-loop"),
    (SubstrateNetwork((Node(0, 1.0), Node(1, 1.0)), (Arc(0, 1, 1.0), Arc(0, 1, 2.0))), "parallel arc"),
    (SubstrateNetwork((Node(0, -1.0),), ()), "negative capacity"),
    (SubstrateNetwork((Node(0, 1.0),), (Arc(0, 4, 1.0),)), "unknown endpoint"),
])
def test_substrate_violations(sub, fragment):
    out = validate(Instance(sub, BulkCatalog.build(DEFAULT_BULKS)))
    assert any(fragment in s for s in out)


def test_antiparallel_arcs_allowed():
    sub = SubstrateNetwork.build([1.0, 1.0], {(0, 1): 5.0, (1, 0): 7.0})
    assert validate(Instance(sub, BulkCatalog.build(DEFAULT_BULKS))) == []
    assert sub.out_arcs[0] == ((0, 1),) and sub.in_arcs[0] == ((1, 0),)


def test_catalog_violations():
    empty = Instance(toy_substrate(), BulkCatalog((), BulkCatalog.build(DEFAULT_BULKS).link_bulks))
    assert any("empty" in s for s in validate(empty))
    unsorted = Instance(toy_substrate(), BulkCatalog.build([(10, 5), (1, 1)], DEFAULT_BULKS))
    assert any("strictly increasing" in s for s in validate(unsorted))


def test_nonzero_diagonal_demand():
    sub = toy_substrate()
    req = make_request(0, [1.0, 1.0], [(0, 0, 3.0)], substrate=sub)
    assert any("diagonal" in s for s in validate(Instance(sub, BulkCatalog.build(DEFAULT_BULKS), (req,))))


def test_require_valid_carries_violations():
    inst = Instance(toy_substrate(), BulkCatalog.build([(1, 1), (10, 20)], DEFAULT_BULKS))
    with pytest.raises(InvalidInstanceError) as err:
        require_valid(inst)
    assert err.value.violations == validate(inst)


def test_commodities_examples():
    assert commodities(make_request(0, [1, 1])) == []
    assert commodities(make_request(0, [1, 1], [(0, 1, 2), (1, 0, 0)])) == [(0, 1, 2.0)]
    dense = [(v, w, 1 + v + w) for v in (2, 0, 1) for w in (1, 2, 0) if v != w]
    out = commodities(make_request(0, [1, 1, 1], dense))
    assert [(v, w) for v, w, _ in out] == [(0, 1), (0, 2), (1, 0), (1, 2), (2, 0), (2, 1)]


demand_lists = st.lists(st.tuples(st.integers(0, 3), st.integers(0, 3),
                                  st.sampled_from([0.0, 0.5, 2.0, 7.0])), max_size=12,
                        unique_by=lambda t: (t[0], t[1]))


@given(demand_lists)
def test_commodity_count_matches_positive_offdiagonal(demands):
    demands = [(v, w, 0.0 if v == w else d) for v, w, d in demands]
    req = make_request(0, [1, 1, 1, 1], demands)
    expected = sum(1 for v, w, d in demands if v != w and d > 0)
    out = commodities(req)
    assert len(out) == expected
    assert out == sorted(out)


@settings(max_examples=50)
@given(st.integers(0, 10_000))
def test_validate_idempotent_and_pure(seed):
    from conftest import tiny_instance
    inst = tiny_instance(seed % 200)
    snapshot = copy.deepcopy(inst)
    first = validate(inst)
    assert validate(inst) == first == []
    assert inst == snapshot
