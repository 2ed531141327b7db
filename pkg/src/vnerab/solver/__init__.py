"""LP simplex and LP-based branch-and-bound."""

from .bnb import (STATUS_GAP, STATUS_INFEASIBLE, STATUS_NODES, STATUS_OPTIMAL, STATUS_TIME,
                  MilpResult, SolveParams, SolverError, relative_gap, solve_milp)
from .simplex import LpParams, LpSolution, StandardForm, solve_lp

__all__ = ["LpParams", "LpSolution", "MilpResult", "STATUS_GAP", "STATUS_INFEASIBLE",
           "STATUS_NODES", "STATUS_OPTIMAL", "STATUS_TIME", "SolveParams", "SolverError",
           "StandardForm", "relative_gap", "solve_lp", "solve_milp"]
