import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import tiny_instance
from vnerab.experiment import ALL_CONFIGS, Cell, ExperimentPlan, plan_from_dict, run_experiment
from vnerab.heuristic import RoundingHeuristic
from vnerab.io import write_results
from vnerab.model import ModelConfig, build_model, decode
from vnerab.solver import solve_lp
from vnerab.solver.bnb import SolveParams
from vnerab.verify import check_solution

QUICK = SolveParams(gap=0.01, node_limit=20)


def test_zero_cells_give_no_records():
    assert run_experiment(ExperimentPlan(cells=())) == []


def test_one_cell_four_records_share_baseline():
    plan = ExperimentPlan(cells=(Cell("ts10", 1, 3, 0.4),), params=QUICK, generator={"max_vnodes": 3})
    recs = run_experiment(plan)
    assert len(recs) == 4
    assert [(r.routing, r.rab) for r in recs] == list(ALL_CONFIGS)
    assert len({r.baseline for r in recs}) == 1
    for r in recs:
        if r.baseline != 0:
            assert r.impr == pytest.approx(100 * (r.profit - r.baseline) / abs(r.baseline))


def test_replications_shift_seed_and_rerun_is_identical():
    plan = ExperimentPlan(cells=(Cell("ts10", 5, 2, 0.3),), replications=2, params=QUICK,
                          generator={"max_vnodes": 3}, configurations=(("single-path", "integral"),))
    first = run_experiment(plan)
    assert [r.seed for r in first] == [5, 6]
    assert write_results(run_experiment(plan), timing=False) == write_results(first, timing=False)


def test_plan_validation():
    with pytest.raises(ValueError):
        ExperimentPlan(cells=(), replications=0)
    with pytest.raises(ValueError):
        ExperimentPlan(cells=(), configurations=(), baseline=False)
    with pytest.raises(ValueError):
        ExperimentPlan(cells=(), configurations=(("zigzag", "integral"),))
    with pytest.raises(ValueError):
        ExperimentPlan(cells=(), generator={"seed": 3})


def test_plan_from_grid():
    plan = plan_from_dict({"grid": {"topology": ["ts10"], "seeds": [0, 1], "req": [4, 6], "scal": [0.4]},
                           "cells": [{"topology": "ts13", "seed": 9, "req": 2, "scal": 0.5}],
                           "params": {"gap": 0.02}})
    assert len(plan.cells) == 5 and plan.cells[0] == Cell("ts13", 9, 2, 0.5)
    assert plan.params.gap == 0.02


def test_unknown_topology():
    with pytest.raises(ValueError, match="unknown topology"):
        run_experiment(ExperimentPlan(cells=(Cell("nowhere.txt", 0, 1, 0.4),)))


@settings(max_examples=30, deadline=None)
@given(st.integers(0, 3000), st.sampled_from(ALL_CONFIGS))
def test_heuristic_points_are_feasible(seed, config):
    inst = tiny_instance(seed)
    cfg = ModelConfig(*config)
    model, vm = build_model(inst, cfg)
    lp = solve_lp(model)
    point = RoundingHeuristic(inst, vm, cfg)(lp.x)
    assert point is not None
    assert model.row_violation(point) <= 1e-9
    assert check_solution(inst, decode(inst, vm, point), cfg.routing, rab=cfg.rab).ok
    assert model.objective_value(point) >= 0
