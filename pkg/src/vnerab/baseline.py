"""Rent-oblivious comparison method: solve without bulk rentals, price afterwards.

The embedding is optimized with continuous rentals (cost of capacity equal
to the cheapest unit price); the usage it produces on every node and arc is
then covered by the cheapest integer bulk multiset.
"""

from __future__ import annotations

from dataclasses import dataclass

from .covering import CoveringResult, min_bulk_covering
from .embed import solve_embedding
from .instance import Instance
from .model import ModelConfig
from .solver.bnb import MilpResult, SolveParams
from .verify import EmbeddingSolution

__all__ = ["BaselineResult", "CoveringResult", "min_bulk_covering", "run_baseline"]


@dataclass
class BaselineResult:
    solution: EmbeddingSolution | None  # rentals replaced by the coverings
    profit: float
    node_coverings: dict[int, CoveringResult]
    arc_coverings: dict[tuple[int, int], CoveringResult]
    milp: MilpResult

    @property
    def feasible(self) -> bool:
        """True when every covering fits within the physical capacity."""
        return all(c.feasible for c in self.node_coverings.values()) and \
            all(c.feasible for c in self.arc_coverings.values())

    @property
    def infeasible_resources(self) -> list:
        return [("node", i) for i, c in self.node_coverings.items() if not c.feasible] + \
            [("arc", a) for a, c in self.arc_coverings.items() if not c.feasible]


def run_baseline(inst: Instance, routing: str = "single-path",
                 params: SolveParams = SolveParams()) -> BaselineResult:
    res = solve_embedding(inst, ModelConfig(routing, "relaxed"), params)
    sol = res.solution
    if sol is None:
        return BaselineResult(None, 0.0, {}, {}, res.milp)
    sub, cat = inst.substrate, inst.catalog
    nodes = {i: min_bulk_covering(sol.node_usage.get(i, 0.0), cat.node_bulks, sub.node_capacity[i])
             for i in sub.node_ids}
    arcs = {a: min_bulk_covering(sol.arc_usage.get(a, 0.0), cat.link_bulks, sub.arc_capacity[a])
            for a in sub.arc_keys}
    priced = EmbeddingSolution(
        accepted=dict(sol.accepted), mapping=sol.mapping, flows=sol.flows,
        node_rentals={i: tuple(float(c) for c in cov.counts) for i, cov in nodes.items()},
        arc_rentals={a: tuple(float(c) for c in cov.counts) for a, cov in arcs.items()},
        node_usage=dict(sol.node_usage), arc_usage=dict(sol.arc_usage))
    gain = sum(r.profit for r in inst.requests if sol.accepted.get(r.id))
    cost = sum(c.cost for c in nodes.values()) + sum(c.cost for c in arcs.values())
    return BaselineResult(priced, gain - cost, nodes, arcs, res.milp)
