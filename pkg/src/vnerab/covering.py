"""Minimum-cost covering of a capacity usage by rented bulks."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .instance import Bulk

_TOL = 1e-7
# brute-force fallback guard for non-integral bulk sizes
_MAX_ENUM = 2_000_000


@dataclass(frozen=True)
class CoveringResult:
    counts: tuple[int, ...]  # aligned with the bulk list
    cost: float
    covered: float
    feasible: bool  # False when no covering fits under the capacity

    def as_dict(self, bulks: Sequence[Bulk]) -> dict[float, int]:
        return {b.size: c for b, c in zip(bulks, self.counts) if c}


def _as_bulks(bulks) -> tuple[Bulk, ...]:
    return tuple(b if isinstance(b, Bulk) else Bulk(float(b[0]), float(b[1])) for b in bulks)


class _ExactSumTable:
    """Unbounded knapsack over integer sizes: cheapest multiset per exact total."""

    def __init__(self, sizes: tuple[int, ...], costs: tuple[float, ...]):
        self.sizes = sizes
        self.costs = costs
        self.cost = np.zeros(1)
        self.last = np.full(1, -1, dtype=np.int64)

    def extend(self, limit: int) -> None:
        n = len(self.cost)
        if limit < n:
            return
        cost = np.concatenate([self.cost, np.full(limit + 1 - n, np.inf)])
        last = np.concatenate([self.last, np.full(limit + 1 - n, -1, dtype=np.int64)])
        for s in range(n, limit + 1):
            best, arg = math.inf, -1
            for k, size in enumerate(self.sizes):
                if size <= s:
                    c = cost[s - size] + self.costs[k]
                    if c < best:
                        best, arg = c, k
            cost[s], last[s] = best, arg
        self.cost, self.last = cost, last

    def counts(self, total: int) -> tuple[int, ...]:
        out = [0] * len(self.sizes)
        while total > 0:
            k = int(self.last[total])
            out[k] += 1
            total -= self.sizes[k]
        return tuple(out)


_tables: dict[tuple, _ExactSumTable] = {}


def _integer_covering(bulks, usage, capacity, tol):
    sizes = tuple(int(round(b.size)) for b in bulks)
    costs = tuple(b.cost for b in bulks)
    key = (sizes, costs)
    table = _tables.get(key)
    if table is None:
        table = _tables[key] = _ExactSumTable(sizes, costs)
    need = max(0, math.ceil(usage - tol * max(1.0, usage)))
    # an optimal covering never exceeds need + max_size - 1
    span_hi = need + max(sizes) - 1
    cap = math.floor(capacity + tol * max(1.0, capacity)) if math.isfinite(capacity) else span_hi
    feasible = need <= cap
    if feasible:
        hi = min(cap, span_hi)
        table.extend(hi)
        window = table.cost[need:hi + 1]
        feasible = bool(np.isfinite(window).any())
    if not feasible:
        hi = span_hi
        table.extend(hi)
        window = table.cost[need:hi + 1]
    total = need + int(np.argmin(window))
    return table.counts(total), float(table.cost[total]), feasible


def _enumerate_covering(bulks, usage, capacity, tol):
    """Exhaustive search for real-valued sizes, bounded by the smallest size."""
    need = usage - tol * max(1.0, usage)
    top = max(b.size for b in bulks)
    feasible_cap = capacity + tol * max(1.0, capacity)
    best_in, best_out = None, None
    hi_out = usage + top
    n_states = 1
    for b in bulks:
        n_states *= int(max(feasible_cap, hi_out) // b.size) + 2
    if n_states > _MAX_ENUM:
        raise ValueError("bulk covering enumeration too large for non-integral sizes")

    def rec(k, counts, total, cost):
        nonlocal best_in, best_out
        if k == len(bulks):
            if total >= need:
                if total <= feasible_cap and (best_in is None or cost < best_in[0]):
                    best_in = (cost, tuple(counts), total)
                if best_out is None or cost < best_out[0]:
                    best_out = (cost, tuple(counts), total)
            return
        b = bulks[k]
        limit = max(feasible_cap, hi_out)
        c = 0
        while total + c * b.size <= limit + tol:
            counts.append(c)
            rec(k + 1, counts, total + c * b.size, cost + c * b.cost)
            counts.pop()
            c += 1

    rec(0, [], 0.0, 0.0)
    if best_in is not None:
        return best_in[1], best_in[0], True
    return best_out[1], best_out[0], False


def min_bulk_covering(usage: float, bulks: Sequence[Bulk] | Sequence[tuple[float, float]],
                      capacity: float = math.inf, tol: float = _TOL) -> CoveringResult:
    """Cheapest integer bulk multiset whose total size lies in [usage, capacity].

    If no multiset fits under ``capacity`` the unconstrained cheapest covering
    is returned with ``feasible=False``.
    """
    bulks = _as_bulks(bulks)
    if not bulks:
        raise ValueError("bulk list is empty")
    if any(not b.size > 0 for b in bulks):
        raise ValueError("bulk sizes must be positive")
    if usage < 0:
        raise ValueError(f"negative usage {usage}")
    if usage <= tol:
        return CoveringResult(tuple(0 for _ in bulks), 0.0, 0.0, capacity >= -tol)
    if all(float(b.size).is_integer() for b in bulks):
        counts, cost, feasible = _integer_covering(bulks, usage, capacity, tol)
    else:
        counts, cost, feasible = _enumerate_covering(bulks, usage, capacity, tol)
    covered = float(sum(c * b.size for c, b in zip(counts, bulks)))
    return CoveringResult(tuple(counts), float(cost), covered, feasible)


def cheapest_unit_bulk(bulks: Sequence[Bulk]) -> int:
    """Index of the bulk with the lowest cost per unit (largest on ties)."""
    best = 0
    for k, b in enumerate(bulks):
        if b.unit_cost <= bulks[best].unit_cost:
            best = k
    return best


def fractional_covering_cost(usage: float, bulks: Sequence[Bulk]) -> float:
    """Cost of covering ``usage`` when bulk counts may be fractional."""
    return usage * bulks[cheapest_unit_bulk(bulks)].unit_cost
