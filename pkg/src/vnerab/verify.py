"""Independent feasibility checks and exhaustive optima for tiny instances.

Nothing here touches the MILP model or the branch-and-bound solver: every
sum is recomputed from the instance and the decoded decisions.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import Bounds, LinearConstraint, linprog, milp

from .covering import fractional_covering_cost, min_bulk_covering
from .instance import Instance, commodities


@dataclass
class EmbeddingSolution:
    accepted: dict[int, bool]
    mapping: dict[int, dict[int, int]]
    flows: dict[tuple[int, int, int], dict[tuple[int, int], float]]
    node_rentals: dict[int, tuple[float, ...]]
    arc_rentals: dict[tuple[int, int], tuple[float, ...]]
    node_usage: dict[int, float] = field(default_factory=dict)
    arc_usage: dict[tuple[int, int], float] = field(default_factory=dict)

    def profit(self, inst: Instance) -> float:
        cat = inst.catalog
        gain = sum(r.profit for r in inst.requests if self.accepted.get(r.id))
        cost = sum(c * b.cost for counts in self.node_rentals.values()
                   for c, b in zip(counts, cat.node_bulks))
        cost += sum(c * b.cost for counts in self.arc_rentals.values()
                    for c, b in zip(counts, cat.link_bulks))
        return gain - cost


# constraint families reported by the checker
FAMILIES = (
    "mapping",        # every virtual node of an accepted request placed once, inside its locality set
    "node-usage",     # node usage within rented node capacity
    "link-usage",     # arc usage within rented arc capacity
    "node-capacity",  # rented node capacity within physical capacity
    "link-capacity",  # rented arc capacity within physical capacity
    "flow-balance",   # unit flow from the source to the sink node of each commodity
    "domain",         # variable domains: flows in [0,1], rentals nonnegative and integral
)


@dataclass(frozen=True)
class Violation:
    family: str  # see FAMILIES
    where: tuple
    magnitude: float
    message: str


@dataclass
class ViolationReport:
    violations: list[Violation] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not self.violations

    @property
    def max_violation(self) -> float:
        return max((v.magnitude for v in self.violations), default=0.0)

    def __len__(self) -> int:
        return len(self.violations)

    def __str__(self) -> str:
        if self.ok:
            return "feasible"
        return "\n".join(f"[{v.family}] {v.where}: {v.message} ({v.magnitude:.3g})"
                         for v in self.violations)


def check_solution(inst: Instance, sol: EmbeddingSolution, routing: str = "single-path",
                   tol: float = 1e-6, rab: str = "integral") -> ViolationReport:
    sub, cat = inst.substrate, inst.catalog
    out: list[Violation] = []

    def bad(family, where, mag, msg):
        out.append(Violation(family, where, float(mag), msg))

    # mapping completeness and locality
    x: dict[tuple[int, int, int], float] = {}
    for r in inst.requests:
        acc = bool(sol.accepted.get(r.id, False))
        m = sol.mapping.get(r.id, {})
        if not acc and m:
            bad("mapping", (r.id,), 1.0, "rejected request has mapped nodes")
            continue
        for v in r.nodes:
            if not acc:
                continue
            if v.id not in m:
                bad("mapping", (r.id, v.id), 1.0, "accepted request leaves a virtual node unmapped")
                continue
            i = m[v.id]
            if i not in v.locality:
                bad("mapping", (r.id, v.id, i), 1.0, "mapped outside its locality set")
            x[(r.id, v.id, i)] = 1.0
        for v in m:
            if v not in r.node:
                bad("mapping", (r.id, v), 1.0, "mapping names an unknown virtual node")

    # node usage vs rented, rented vs physical
    usage = {i: 0.0 for i in sub.node_ids}
    for (rid, v, i), val in x.items():
        req = next(r for r in inst.requests if r.id == rid)
        if i in usage:
            usage[i] += req.node[v].requirement * val
    for i in sub.node_ids:
        counts = sol.node_rentals.get(i, (0.0,) * len(cat.node_bulks))
        rented = sum(c * b.size for c, b in zip(counts, cat.node_bulks))
        if usage[i] > rented + tol:
            bad("node-usage", (i,), usage[i] - rented, f"node usage {usage[i]:g} exceeds rented {rented:g}")
        if rented > sub.node_capacity[i] + tol:
            bad("node-capacity", (i,), rented - sub.node_capacity[i],
                f"rented {rented:g} exceeds node capacity {sub.node_capacity[i]:g}")
        for k, c in enumerate(counts):
            if c < -tol:
                bad("domain", (i, k), -c, "negative node rental")
            elif rab == "integral" and abs(c - round(c)) > tol:
                bad("domain", (i, k), abs(c - round(c)), "fractional node rental")

    # arc usage from flows
    arc_set = set(sub.arc_keys)
    comm = {(r.id, v, w): d for r in inst.requests for v, w, d in commodities(r)}
    load = {a: 0.0 for a in sub.arc_keys}
    for key, fl in sol.flows.items():
        if key not in comm:
            if any(abs(val) > tol for val in fl.values()):
                bad("flow-balance", key, max(abs(v) for v in fl.values()), "flow on a non-commodity pair")
            continue
        for a, val in fl.items():
            if a not in arc_set:
                bad("flow-balance", key + a, abs(val), "flow on a nonexistent arc")
                continue
            load[a] += comm[key] * val
            if val < -tol or val > 1 + tol:
                bad("domain", key + a, max(-val, val - 1), "flow fraction outside [0,1]")
            elif routing == "single-path" and min(abs(val), abs(1 - val)) > tol:
                bad("domain", key + a, min(abs(val), abs(1 - val)), "fractional flow under single-path routing")
    for a in sub.arc_keys:
        counts = sol.arc_rentals.get(a, (0.0,) * len(cat.link_bulks))
        rented = sum(c * b.size for c, b in zip(counts, cat.link_bulks))
        if load[a] > rented + tol:
            bad("link-usage", a, load[a] - rented, f"arc usage {load[a]:g} exceeds rented {rented:g}")
        if rented > sub.arc_capacity[a] + tol:
            bad("link-capacity", a, rented - sub.arc_capacity[a],
                f"rented {rented:g} exceeds arc capacity {sub.arc_capacity[a]:g}")
        for k, c in enumerate(counts):
            if c < -tol:
                bad("domain", a + (k,), -c, "negative arc rental")
            elif rab == "integral" and abs(c - round(c)) > tol:
                bad("domain", a + (k,), abs(c - round(c)), "fractional arc rental")

    # flow balance: out - in = x_vi - x_wi at every node
    for (rid, v, w) in sorted(comm):
        fl = sol.flows.get((rid, v, w), {})
        for i in sub.node_ids:
            net = sum(fl.get(a, 0.0) for a in sub.out_arcs[i]) - sum(fl.get(a, 0.0) for a in sub.in_arcs[i])
            rhs = x.get((rid, v, i), 0.0) - x.get((rid, w, i), 0.0)
            if abs(net - rhs) > tol:
                bad("flow-balance", (rid, v, w, i), abs(net - rhs),
                    f"flow balance {net:g} != {rhs:g}")
    return ViolationReport(out)


# ---------------------------------------------------------------------------
# exhaustive optimum for tiny instances
# ---------------------------------------------------------------------------

class OracleRefused(ValueError):
    pass


def _simple_paths(sub, s, t):
    paths = []

    def dfs(node, seen, arcs):
        if node == t:
            paths.append(tuple(arcs))
            return
        for a in sub.out_arcs[node]:
            if a[1] not in seen:
                seen.add(a[1])
                arcs.append(a)
                dfs(a[1], seen, arcs)
                arcs.pop()
                seen.discard(a[1])

    dfs(s, {s}, [])
    return paths


class _RoutingOracle:
    """Cheapest link rental for a fixed set of (source, sink, demand) triples."""

    def __init__(self, inst: Instance, routing: str, rab: str):
        self.sub = inst.substrate
        self.bulks = inst.catalog.link_bulks
        self.routing, self.rab = routing, rab
        self.cache: dict = {}
        self.paths: dict = {}

    def arc_cost(self, a, load):
        cap = self.sub.arc_capacity[a]
        if self.rab == "integral":
            res = min_bulk_covering(load, self.bulks, cap)
            return res.cost if res.feasible else None
        return fractional_covering_cost(load, self.bulks) if load <= cap + 1e-9 else None

    def __call__(self, triples):
        key = tuple(sorted(triples))
        if key not in self.cache:
            if self.routing == "single-path":
                self.cache[key] = self._single_path(key)
            elif self.rab == "relaxed":
                self.cache[key] = self._splittable_lp(key)
            else:
                self.cache[key] = self._splittable_milp(key)
        return self.cache[key]

    def _single_path(self, triples):
        options = []
        for s, t, d in triples:
            if (s, t) not in self.paths:
                self.paths[(s, t)] = _simple_paths(self.sub, s, t)
            options.append(self.paths[(s, t)])
            if not options[-1]:
                return None
        best = [math.inf]
        load: dict = {}

        def rec(k, partial):
            if partial >= best[0]:
                return
            if k == len(triples):
                best[0] = partial
                return
            d = triples[k][2]
            for path in options[k]:
                delta, ok = 0.0, True
                for a in path:
                    before = load.get(a, 0.0)
                    c0 = self.arc_cost(a, before) if before else 0.0
                    c1 = self.arc_cost(a, before + d)
                    if c1 is None:
                        ok = False
                        break
                    delta += c1 - c0
                if not ok:
                    continue
                for a in path:
                    load[a] = load.get(a, 0.0) + d
                rec(k + 1, partial + delta)
                for a in path:
                    load[a] -= d

        rec(0, 0.0)
        return None if math.isinf(best[0]) else best[0]

    def _flow_system(self, triples, extra_cols):
        nodes, arcs = self.sub.node_ids, self.sub.arc_keys
        nk, na = len(triples), len(arcs)
        nf = nk * na
        ncols = nf + extra_cols
        a_eq = np.zeros((nk * len(nodes), ncols))
        b_eq = np.zeros(nk * len(nodes))
        row = 0
        for k, (s, t, _) in enumerate(triples):
            for i in nodes:
                for ai, (u, v) in enumerate(arcs):
                    if u == i:
                        a_eq[row, k * na + ai] += 1
                    if v == i:
                        a_eq[row, k * na + ai] -= 1
                b_eq[row] = (i == s) - (i == t)
                row += 1
        load = np.zeros((na, ncols))
        for k, (_, _, d) in enumerate(triples):
            for ai in range(na):
                load[ai, k * na + ai] = d
        return a_eq, b_eq, load, nf

    def _splittable_lp(self, triples):
        arcs = self.sub.arc_keys
        a_eq, b_eq, load, nf = self._flow_system(triples, 0)
        unit = fractional_covering_cost(1.0, self.bulks)
        c = unit * load.sum(axis=0)
        caps = np.array([self.sub.arc_capacity[a] for a in arcs])
        res = linprog(c, A_ub=load, b_ub=caps, A_eq=a_eq, b_eq=b_eq, bounds=(0, 1), method="highs")
        return float(res.fun) if res.status == 0 else None

    def _splittable_milp(self, triples):
        arcs = self.sub.arc_keys
        nq = len(self.bulks)
        a_eq, b_eq, load, nf = self._flow_system(triples, len(arcs) * nq)
        rent = np.zeros_like(load)
        for ai in range(len(arcs)):
            for q, b in enumerate(self.bulks):
                rent[ai, nf + ai * nq + q] = b.size
        caps = np.array([self.sub.arc_capacity[a] for a in arcs])
        c = np.zeros(a_eq.shape[1])
        for ai in range(len(arcs)):
            for q, b in enumerate(self.bulks):
                c[nf + ai * nq + q] = b.cost
        integrality = np.r_[np.zeros(nf), np.ones(len(arcs) * nq)]
        ub = np.r_[np.ones(nf), np.full(len(arcs) * nq, np.inf)]
        cons = [LinearConstraint(a_eq, b_eq, b_eq),
                LinearConstraint(load - rent, -np.inf, 0.0),
                LinearConstraint(rent, -np.inf, caps)]
        # presolve off: HiGHS presolve can misreport optima of small mixed models
        res = milp(c, constraints=cons, integrality=integrality, bounds=Bounds(0, ub),
                   options={"mip_rel_gap": 0.0, "presolve": False})
        return float(res.fun) if res.status == 0 else None


def enumeration_size(inst: Instance) -> int:
    total = 1
    for r in inst.requests:
        total *= 1 + math.prod(len(v.locality) for v in r.nodes)
    return total


def brute_force_optimum(inst: Instance, routing: str = "single-path", rab: str = "integral",
                        limit: int = 10**7) -> float:
    """Best profit over every acceptance subset and every node mapping.

    Rentals are priced per resource given usage. Link costs come from path
    enumeration (single-path), an LP (splittable, fractional rentals) or a
    small exact MILP (splittable, integral rentals).
    """
    size = enumeration_size(inst)
    if size > limit:
        raise OracleRefused(f"enumeration size {size} exceeds the oracle guard {limit}")
    sub, cat = inst.substrate, inst.catalog
    reqs = list(inst.requests)
    options = []
    for r in reqs:
        vs = list(r.nodes)
        maps = [None] + [dict(zip((v.id for v in vs), combo))
                         for combo in itertools.product(*(sorted(v.locality) for v in vs))]
        options.append(maps)

    node_cost_cache: dict = {}

    def node_cost(i, u):
        key = (i, round(u, 12))
        if key not in node_cost_cache:
            cap = sub.node_capacity[i]
            if rab == "integral":
                res = min_bulk_covering(u, cat.node_bulks, cap)
                node_cost_cache[key] = res.cost if res.feasible else None
            else:
                node_cost_cache[key] = fractional_covering_cost(u, cat.node_bulks) if u <= cap + 1e-9 else None
        return node_cost_cache[key]

    candidates = []
    for combo in itertools.product(*options):
        usage: dict[int, float] = {}
        gain = 0.0
        triples = []
        for r, m in zip(reqs, combo):
            if m is None:
                continue
            gain += r.profit
            for v in r.nodes:
                usage[m[v.id]] = usage.get(m[v.id], 0.0) + v.requirement
            for v, w, d in commodities(r):
                if m[v] != m[w]:
                    triples.append((m[v], m[w], d))
        cost = 0.0
        for i, u in usage.items():
            c = node_cost(i, u) if u > 0 else 0.0
            if c is None:
                break
            cost += c
        else:
            candidates.append((gain - cost, len(candidates), triples))

    routing_cost = _RoutingOracle(inst, routing, rab)
    best = 0.0
    candidates.sort(key=lambda t: (-t[0], t[1]))
    for bound, _, triples in candidates:
        if bound <= best + 1e-9:
            break
        link = routing_cost(triples) if triples else 0.0
        if link is not None:
            best = max(best, bound - link)
    return best
