"""Best-bound branch-and-bound over the LP relaxation (maximization)."""

from __future__ import annotations

import heapq
import itertools
import math
import time
from dataclasses import dataclass
from typing import Callable, TextIO

import numpy as np

from .simplex import INFEASIBLE, NUMERICAL, UNBOUNDED, LpParams, StandardForm, solve_lp

STATUS_OPTIMAL = "optimal"
STATUS_GAP = "gap-reached"
STATUS_TIME = "time-limit"
STATUS_NODES = "node-limit"
STATUS_INFEASIBLE = "infeasible"

_GAP_EPS = 1e-9

Heuristic = Callable[[np.ndarray], "np.ndarray | None"]


class SolverError(RuntimeError):
    pass


@dataclass(frozen=True)
class SolveParams:
    gap: float = 0.01
    time_limit: float = 3600.0
    tol: float = 1e-7
    int_tol: float = 1e-6
    heuristic_every: int = 10  # run the primal heuristic every k nodes (root always)
    node_limit: int | None = None  # deterministic work budget, unlike the wall clock

    def __post_init__(self):
        if self.gap < 0:
            raise ValueError("gap target must be nonnegative")
        if not self.time_limit > 0 or not self.tol > 0 or not self.int_tol > 0:
            raise ValueError("limits and tolerances must be positive")
        if self.heuristic_every < 1 or (self.node_limit is not None and self.node_limit < 1):
            raise ValueError("heuristic interval and node limit must be at least 1")


@dataclass
class MilpResult:
    status: str
    x: np.ndarray | None
    objective: float
    bound: float
    gap: float
    seconds: float
    nodes: int
    lp_iterations: int = 0
    max_lp_seconds: float = 0.0
    max_node_seconds: float = 0.0  # one node: LP solve plus any heuristic call

    @property
    def has_incumbent(self) -> bool:
        return self.x is not None


def relative_gap(bound: float, incumbent: float | None) -> float:
    if incumbent is None or math.isinf(bound):
        return math.inf
    if incumbent <= 0:
        return 0.0 if bound <= max(incumbent, 0.0) + _GAP_EPS else math.inf
    return max(bound - incumbent, 0.0) / max(abs(incumbent), _GAP_EPS)


def _integral_objective(model) -> bool:
    """True when every integer point has an integer objective value."""
    for j, v in model.objective:
        if v != 0 and (not model.integer_mask[j] or not float(v).is_integer()):
            return False
    return True


def _branch_column(x, mask, prio, int_tol) -> int:
    frac = np.abs(x - np.round(x))
    cand = np.flatnonzero(mask & (frac > int_tol))
    if cand.size == 0:
        return -1
    tier = prio[cand].min()
    cand = cand[prio[cand] == tier]
    # most fractional, lowest index on ties
    dist = np.abs(x[cand] - np.floor(x[cand]) - 0.5)
    return int(cand[np.argmin(dist)])


def solve_milp(model, params: SolveParams = SolveParams(), heuristic: Heuristic | None = None,
               trace: TextIO | None = None, lower=None, upper=None) -> MilpResult:
    """Branch-and-bound on ``model``.

    ``lower``/``upper`` optionally replace the root column bounds (they must
    not cut off any feasible point; the caller vouches for that). The
    heuristic maps an LP point to a candidate integer point or None;
    candidates are checked against the model before being accepted.
    """
    t0 = time.perf_counter()
    form = StandardForm(model)
    lp_params = LpParams(tol=params.tol)
    mask = model.integer_mask
    prio = model.priorities
    integral_obj = _integral_objective(model)
    feas_tol = max(1e-6, 10 * params.tol) * form.scale

    inc_x: np.ndarray | None = None
    inc_obj = -math.inf
    bound = math.inf
    nodes = 0
    lp_iters = 0
    max_lp = 0.0
    max_node = 0.0

    def elapsed():
        return time.perf_counter() - t0

    def offer(point) -> bool:
        nonlocal inc_x, inc_obj
        if point is None:
            return False
        p = np.asarray(point, dtype=float).copy()
        p[mask] = np.round(p[mask])
        if model.row_violation(p) > feas_tol:
            return False
        val = model.objective_value(p)
        if val > inc_obj + 1e-9:
            inc_x, inc_obj = p, val
            return True
        return False

    def incumbent():
        return inc_obj if inc_x is not None else None

    def result(status):
        b = bound
        if inc_x is not None:
            b = max(b, inc_obj)
        gap = relative_gap(b, incumbent()) if status != STATUS_OPTIMAL else 0.0
        return MilpResult(status, inc_x, inc_obj if inc_x is not None else math.nan, b, gap,
                          elapsed(), nodes, lp_iters, max_lp, max_node)

    counter = itertools.count()
    root_lo = form.lower.copy() if lower is None else np.asarray(lower, dtype=float).copy()
    root_hi = form.upper.copy() if upper is None else np.asarray(upper, dtype=float).copy()
    heap: list = [(-math.inf, next(counter), 0, root_lo, root_hi)]
    while heap:
        top = -heap[0][0]
        bound = min(bound, max(top, inc_obj))
        if inc_x is not None and top <= inc_obj + 1e-9:
            bound = inc_obj
            heap.clear()
            break
        if nodes and relative_gap(bound, incumbent()) <= params.gap + _GAP_EPS:
            return result(STATUS_GAP)
        if elapsed() >= params.time_limit:
            return result(STATUS_TIME)
        if params.node_limit is not None and nodes >= params.node_limit:
            return result(STATUS_NODES)

        _, _, depth, lo, hi = heapq.heappop(heap)
        nodes += 1
        t_node = time.perf_counter()
        lp = solve_lp(form, lp_params, lo, hi)
        lp_iters += lp.iterations
        max_lp = max(max_lp, lp.seconds)
        if lp.status == NUMERICAL:
            raise SolverError(f"numerical breakdown in LP at node {nodes}")
        if lp.status == UNBOUNDED:
            raise SolverError("unbounded LP relaxation")
        if lp.status == INFEASIBLE:
            max_node = max(max_node, time.perf_counter() - t_node)
            _trace(trace, depth, "infeasible", inc_obj, bound)
            continue
        node_bound = lp.objective
        if integral_obj:
            node_bound = math.floor(node_bound + 1e-6 * max(1.0, abs(node_bound)))
        x = lp.x
        col = _branch_column(x, mask, prio, params.int_tol)
        if col < 0:
            offer(x)
        elif heuristic is not None and (nodes == 1 or nodes % params.heuristic_every == 0):
            # always at the root so a time-limited solve still has an incumbent
            if nodes == 1 or elapsed() < params.time_limit:
                offer(heuristic(x))
        max_node = max(max_node, time.perf_counter() - t_node)
        _trace(trace, depth, node_bound, inc_obj, bound)
        if col < 0 or (inc_x is not None and node_bound <= inc_obj + 1e-9):
            continue
        v = x[col]
        down_hi = hi.copy()
        down_hi[col] = math.floor(v)
        up_lo = lo.copy()
        up_lo[col] = math.ceil(v)
        heapq.heappush(heap, (-node_bound, next(counter), depth + 1, up_lo, hi))
        heapq.heappush(heap, (-node_bound, next(counter), depth + 1, lo, down_hi))

    if inc_x is None:
        bound = -math.inf
        return MilpResult(STATUS_INFEASIBLE, None, math.nan, bound, math.inf, elapsed(), nodes,
                          lp_iters, max_lp, max_node)
    bound = inc_obj
    return result(STATUS_OPTIMAL)


def _trace(out, depth, node_bound, inc, bound):
    if out is None:
        return
    out.write(f"depth={depth} node_bound={node_bound} incumbent={inc} "
              f"bound={bound} gap={relative_gap(bound, inc if math.isfinite(inc) else None):.6g}\n")
