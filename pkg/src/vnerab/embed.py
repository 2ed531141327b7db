"""Build, solve and decode in one call."""

from __future__ import annotations

from dataclasses import dataclass
from typing import TextIO

from .heuristic import RoundingHeuristic
from .instance import Instance
from .model import ModelConfig, MilpModel, VarMap, build_model, decode, implied_bounds
from .solver.bnb import MilpResult, SolveParams, solve_milp
from .verify import EmbeddingSolution


@dataclass
class EmbeddingResult:
    config: ModelConfig
    model: MilpModel
    varmap: VarMap
    milp: MilpResult
    solution: EmbeddingSolution | None

    @property
    def profit(self) -> float:
        return self.milp.objective


def solve_embedding(inst: Instance, cfg: ModelConfig = ModelConfig(),
                    params: SolveParams = SolveParams(), trace: TextIO | None = None,
                    use_heuristic: bool = True) -> EmbeddingResult:
    model, vm = build_model(inst, cfg)
    heur = RoundingHeuristic(inst, vm, cfg) if use_heuristic else None
    lo, hi = implied_bounds(inst, vm, cfg, model)
    res = solve_milp(model, params, heuristic=heur, trace=trace, lower=lo, upper=hi)
    sol = decode(inst, vm, res.x) if res.x is not None else None
    return EmbeddingResult(cfg, model, vm, res, sol)
