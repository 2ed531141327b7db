"""Experiment plans: generate instances, solve every configuration, compare to the baseline."""

from __future__ import annotations

import dataclasses
import itertools
import json
import time
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable

from .baseline import run_baseline
from .embed import solve_embedding
from .generator import PRESETS, GeneratorConfig, generate_instance
from .io import ExperimentRecord, improvement, read_edge_list
from .model import RAB_MODES, ROUTINGS, ModelConfig
from .solver.bnb import SolveParams
from .verify import check_solution

ALL_CONFIGS: tuple[tuple[str, str], ...] = tuple(itertools.product(ROUTINGS, RAB_MODES))


class ExperimentError(RuntimeError):
    """An emitted solution failed the independent feasibility check."""


@dataclass(frozen=True)
class Cell:
    topology: str  # preset name or path to an edge-list file
    seed: int
    req: int
    scal: float


@dataclass(frozen=True)
class ExperimentPlan:
    cells: tuple[Cell, ...]
    replications: int = 1
    configurations: tuple[tuple[str, str], ...] = ALL_CONFIGS
    baseline: bool = True
    baseline_routing: str = "single-path"
    params: SolveParams = SolveParams()
    generator: dict = field(default_factory=dict)  # GeneratorConfig overrides
    base_dir: Path | None = None  # resolves relative edge-list paths

    def __post_init__(self):
        if self.replications < 1:
            raise ValueError("replications must be at least 1")
        if not self.configurations and not self.baseline:
            raise ValueError("plan runs no configuration")
        for cfg in self.configurations:
            ModelConfig(*cfg)
        ModelConfig(self.baseline_routing, "relaxed")
        known = {f.name for f in dataclasses.fields(GeneratorConfig)}
        bad = set(self.generator) - known - {"num_requests", "scale", "seed"}
        if bad:
            raise ValueError(f"unknown generator overrides: {sorted(bad)}")
        if set(self.generator) & {"num_requests", "scale", "seed"}:
            raise ValueError("seed, Req and Scal come from the cells, not the generator overrides")


def plan_from_dict(doc: dict, base_dir: Path | None = None) -> ExperimentPlan:
    """Plan document: explicit ``cells`` and/or a ``grid`` of topology x seed x req x scal."""
    cells = [Cell(c["topology"], int(c["seed"]), int(c["req"]), float(c["scal"]))
             for c in doc.get("cells", [])]
    grid = doc.get("grid")
    if grid:
        for topo, seed, req, scal in itertools.product(grid["topology"], grid["seeds"],
                                                        grid["req"], grid["scal"]):
            cells.append(Cell(topo, int(seed), int(req), float(scal)))
    configs = doc.get("configurations")
    gen = dict(doc.get("generator", {}))
    for k in ("capacity_values", "capacity_probs", "gamma_range"):
        if k in gen:
            gen[k] = tuple(gen[k])
    for k in ("node_bulks", "link_bulks"):
        if k in gen:
            gen[k] = tuple(tuple(b) for b in gen[k])
    return ExperimentPlan(
        cells=tuple(cells),
        replications=int(doc.get("replications", 1)),
        configurations=ALL_CONFIGS if configs is None else tuple(tuple(c) for c in configs),
        baseline=bool(doc.get("baseline", True)),
        baseline_routing=doc.get("baseline_routing", "single-path"),
        params=SolveParams(**doc.get("params", {})),
        generator=gen,
        base_dir=base_dir)


def load_plan(path: str | Path) -> ExperimentPlan:
    path = Path(path)
    return plan_from_dict(json.loads(path.read_text()), base_dir=path.parent)


def _topology(name: str, base_dir: Path | None):
    if name in PRESETS:
        return PRESETS[name], "data-center"
    p = Path(name)
    if base_dir is not None and not p.is_absolute():
        p = base_dir / p
    if not p.exists():
        raise ValueError(f"unknown topology {name!r} (not a preset, no such edge-list file)")
    return read_edge_list(p.read_text()), "long-haul"


def _verify(inst, sol, routing, rab, where):
    report = check_solution(inst, sol, routing, rab=rab)
    if not report.ok:
        raise ExperimentError(f"{where}: checker rejected the solution\n{report}")


def run_experiment(plan: ExperimentPlan,
                   progress: Callable[[str], None] | None = None) -> list[ExperimentRecord]:
    records: list[ExperimentRecord] = []
    for cell in plan.cells:
        spec, kind = _topology(cell.topology, plan.base_dir)
        for rep in range(plan.replications):
            seed = cell.seed + rep
            cfg = GeneratorConfig(seed=seed, num_requests=cell.req, scale=cell.scal, **plan.generator)
            inst = generate_instance(spec, cfg)
            name = f"{Path(cell.topology).stem}-req{cell.req}-scal{cell.scal:g}-seed{seed}"

            base_profit, base_ok = float("nan"), False
            if plan.baseline:
                b = run_baseline(inst, plan.baseline_routing, plan.params)
                if b.solution is not None:
                    report = check_solution(inst, b.solution, plan.baseline_routing, rab="integral")
                    # coverings above capacity are flagged by design; anything else is a bug
                    unexpected = [v for v in report.violations
                                  if v.family not in ("node-capacity", "link-capacity")]
                    if unexpected or (b.feasible and not report.ok):
                        raise ExperimentError(f"{name} baseline: checker rejected the solution\n{report}")
                    base_profit, base_ok = b.profit, b.feasible
            for routing, rab in plan.configurations:
                t0 = time.perf_counter()
                res = solve_embedding(inst, ModelConfig(routing, rab), plan.params)
                seconds = time.perf_counter() - t0
                if res.solution is not None:
                    _verify(inst, res.solution, routing, rab, f"{name} {routing}/{rab}")
                profit = res.milp.objective
                records.append(ExperimentRecord(
                    instance=name, substrate=kind, req=cell.req, scal=cell.scal, seed=seed,
                    routing=routing, rab=rab, profit=profit, status=res.milp.status,
                    seconds=seconds, gap=res.milp.gap, nodes=res.milp.nodes,
                    baseline=base_profit, baseline_feasible=base_ok,
                    impr=improvement(profit, base_profit) if plan.baseline else None))
                if progress is not None:
                    progress(f"{name} {routing}/{rab}: {res.milp.status} profit={profit:g} "
                             f"gap={res.milp.gap:.4g} {seconds:.1f}s")
    return canonical_order(records)


def canonical_order(records) -> list[ExperimentRecord]:
    order = {c: k for k, c in enumerate(ALL_CONFIGS)}
    return sorted(records, key=lambda r: (r.substrate, r.scal, r.req, r.seed, r.instance,
                                          order.get((r.routing, r.rab), 99), r.routing, r.rab))
