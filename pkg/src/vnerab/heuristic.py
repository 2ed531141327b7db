"""Greedy rounding of an LP point into a feasible embedding.

Requests are embedded one at a time. Each virtual node goes to a locality
node that still has room and, preferably, from which its traffic to already
placed neighbours can be routed (colocation counts as free) and whose arcs
can still carry its traffic to neighbours not yet placed. Commodities follow
a shortest path over arcs with residual capacity, and the request is kept
only if its profit pays for the extra rentals. When a placement cannot be
routed or does not pay, earlier host choices are revisited depth-first
within a fixed budget. Rentals are priced by optimal bulk covering
(integral) or by the cheapest unit price (relaxed).

Several greedy passes are run and the most profitable point is returned:
requests ordered by LP acceptance value or by size, and placement/routing
guided either by the LP values or by the marginal rental price. Price-guided
passes are run under both the integral and the fractional price curves;
the two pack requests differently, and the final point is always rented and
scored in the model's own mode.
"""

from __future__ import annotations

import heapq
import math

import numpy as np

from .covering import cheapest_unit_bulk, min_bulk_covering
from .instance import Instance, VnRequest, commodities
from .model import ModelConfig, VarMap

_EPS = 1e-9
_HOP = 1e-3  # tie-breaker favouring short paths
_PLACE_BUDGET = 64  # host assignments tried per request before giving up


class RoundingHeuristic:
    def __init__(self, inst: Instance, vm: VarMap, cfg: ModelConfig):
        self.inst, self.vm, self.cfg = inst, vm, cfg
        self.sub = inst.substrate
        self.reqs = sorted(inst.requests, key=lambda r: r.id)
        profit = {r.id: r.profit for r in self.reqs}
        cat = inst.catalog
        self._cost = np.zeros(len(vm))
        for k, tag in enumerate(vm.tags):
            if tag[0] == "y":
                self._cost[k] = profit[tag[1]]
            elif tag[0] == "g":
                self._cost[k] = -cat.node_bulks[tag[2]].cost
            elif tag[0] == "h":
                self._cost[k] = -cat.link_bulks[tag[3]].cost
        self._size = {r.id: sum(v.requirement for v in r.nodes) + sum(d for _, _, d in commodities(r))
                      for r in self.reqs}
        self._pricing = cfg.rab  # price curve guiding the current pass

    # rental price of carrying `load` on a resource, None if impossible
    def _price(self, load, bulks, cap):
        if load <= _EPS:
            return 0.0
        if self._pricing == "integral":
            res = min_bulk_covering(load, bulks, cap)
            return res.cost if res.feasible else None
        if load > cap + _EPS:
            return None
        k = cheapest_unit_bulk(bulks)
        return load * bulks[k].unit_cost

    def _marginal(self, load, extra, bulks, cap):
        new = self._price(load + extra, bulks, cap)
        if new is None:
            return None
        return new - self._price(load, bulks, cap)

    def _route(self, s, t, d, arc_load, weight):
        dist = {s: 0.0}
        prev = {}
        heap = [(0.0, s)]
        while heap:
            du, u = heapq.heappop(heap)
            if u == t:
                break
            if du > dist.get(u, math.inf):
                continue
            for a in self.sub.out_arcs[u]:
                if arc_load[a] + d > self.sub.arc_capacity[a] + _EPS:
                    continue
                w = weight(a)
                if w is None:
                    continue
                nd = du + w
                if nd < dist.get(a[1], math.inf) - 1e-12:
                    dist[a[1]] = nd
                    prev[a[1]] = a
                    heapq.heappush(heap, (nd, a[1]))
        if t not in prev:
            return None
        path, node = [], t
        while node != s:
            a = prev[node]
            path.append(a)
            node = a[0]
        return path[::-1]

    def _hops(self, s, d, arc_load, cache):
        """Hop distances from ``s`` over arcs with at least ``d`` residual capacity."""
        key = (s, d)
        if key not in cache:
            dist = {s: 0}
            frontier = [s]
            while frontier:
                nxt = []
                for u in frontier:
                    for a in self.sub.out_arcs[u]:
                        if a[1] not in dist and arc_load[a] + d <= self.sub.arc_capacity[a] + _EPS:
                            dist[a[1]] = dist[u] + 1
                            nxt.append(a[1])
                frontier = nxt
            cache[key] = dist
        return cache[key]

    def _place(self, r: VnRequest, node_load, arc_load, val, by_cost):
        """Yield placements of ``r`` depth-first, best host first, within a search budget."""
        sub, cat = self.sub, self.inst.catalog
        demand = {(v, w): d for v, w, d in commodities(r)}
        traffic = {v.id: 0.0 for v in r.nodes}
        for (v, w), d in demand.items():
            traffic[v] += d
            traffic[w] += d
        link_unit = cat.link_bulks[cheapest_unit_bulk(cat.link_bulks)].unit_cost
        order = sorted(r.nodes, key=lambda v: (-(v.requirement + traffic[v.id]), v.id))
        trial = dict(node_load)
        cache: dict = {}
        m = {}
        budget = [_PLACE_BUDGET]

        def hosts(v):
            keyed = []
            for i in sorted(v.locality):
                cap = sub.node_capacity[i]
                if trial[i] + v.requirement > cap + _EPS:
                    continue
                # traffic to already placed neighbours must be routable; cost is volume x hops
                hop_cost = 0.0
                blocked = False
                for u, j in m.items():
                    if j == i:
                        continue
                    for s_, t_, d in ((i, j, demand.get((v.id, u), 0.0)), (j, i, demand.get((u, v.id), 0.0))):
                        if d > 0:
                            h = self._hops(s_, d, arc_load, cache).get(t_)
                            blocked |= h is None
                            hop_cost += 0.0 if h is None else d * h
                # unplaced neighbours that can neither share i nor reach it over a roomy arc
                for u in r.nodes:
                    if u.id in m or u.id == v.id or i in u.locality:
                        continue
                    for d, arcs in ((demand.get((v.id, u.id), 0.0), sub.out_arcs[i]),
                                    (demand.get((u.id, v.id), 0.0), sub.in_arcs[i])):
                        if d > 0 and all(arc_load[a] + d > sub.arc_capacity[a] + _EPS for a in arcs):
                            blocked = True
                if blocked:
                    continue
                lp = val(("x", r.id, v.id, i))
                if by_cost:
                    extra = self._marginal(trial[i], v.requirement, cat.node_bulks, cap)
                    if extra is None:
                        continue
                    keyed.append(((extra + link_unit * hop_cost, -lp, i), i))
                else:
                    keyed.append(((-lp, hop_cost, -(cap - trial[i]), i), i))
            return [i for _, i in sorted(keyed)]

        def search(k):
            if k == len(order):
                yield dict(m), dict(trial)
                return
            v = order[k]
            for i in hosts(v):
                if budget[0] <= 0:
                    return
                budget[0] -= 1
                m[v.id] = i
                trial[i] += v.requirement
                yield from search(k + 1)
                trial[i] -= v.requirement
                del m[v.id]

        yield from search(0)

    def _embed(self, r, node_load, arc_load, val, by_cost):
        """Try to embed ``r`` on top of the given loads; returns the new state or None."""
        for m, trial_nodes in self._place(r, node_load, arc_load, val, by_cost):
            got = self._commit(r, m, trial_nodes, node_load, arc_load, val, by_cost)
            if got is not None:
                return got
        return None

    def _commit(self, r, m, trial_nodes, node_load, arc_load, val, by_cost):
        """Route and price one placement; returns the new state or None."""
        sub, cat = self.sub, self.inst.catalog
        trial_arcs = dict(arc_load)
        routes = {}
        for v, w, d in commodities(r):
            if m[v] == m[w]:
                continue
            if by_cost:
                def weight(a, d=d):
                    extra = self._marginal(trial_arcs[a], d, cat.link_bulks, sub.arc_capacity[a])
                    return None if extra is None else extra + _HOP
            else:
                def weight(a, v=v, w=w):
                    return 1.0 + _HOP * (1.0 - val(("f", r.id, v, w, *a)))
            path = self._route(m[v], m[w], d, trial_arcs, weight)
            if path is None:
                return None
            for a in path:
                trial_arcs[a] += d
            routes[(v, w)] = path
        delta = r.profit
        for i in sub.node_ids:
            if trial_nodes[i] != node_load[i]:
                extra = self._marginal(node_load[i], trial_nodes[i] - node_load[i],
                                       cat.node_bulks, sub.node_capacity[i])
                if extra is None:
                    return None
                delta -= extra
        for a in sub.arc_keys:
            if trial_arcs[a] != arc_load[a]:
                extra = self._marginal(arc_load[a], trial_arcs[a] - arc_load[a],
                                       cat.link_bulks, sub.arc_capacity[a])
                if extra is None:
                    return None
                delta -= extra
        if delta <= _EPS:
            return None
        return m, routes, trial_nodes, trial_arcs

    def _greedy(self, order, val, by_cost):
        node_load = {i: 0.0 for i in self.sub.node_ids}
        arc_load = {a: 0.0 for a in self.sub.arc_keys}
        chosen = {}
        for _ in range(2):  # second pass retries requests rejected early
            for r in order:
                if r.id in chosen:
                    continue
                got = self._embed(r, node_load, arc_load, val, by_cost)
                if got is not None:
                    m, routes, node_load, arc_load = got
                    chosen[r.id] = (m, routes)
        return chosen, node_load, arc_load

    def __call__(self, lp_x: np.ndarray) -> np.ndarray | None:
        vm = self.vm
        val = lambda tag: float(lp_x[vm[tag]]) if tag in vm.index else 0.0
        by_lp = sorted(self.reqs, key=lambda r: (-val(("y", r.id)), r.id))
        by_size = sorted(self.reqs, key=lambda r: (self._size[r.id], r.id))
        other = "relaxed" if self.cfg.rab == "integral" else "integral"
        passes = [(False, self.cfg.rab), (True, self.cfg.rab), (True, other)]
        best, best_obj = None, -math.inf
        for order in (by_lp, by_size):
            for by_cost, pricing in passes:
                self._pricing = pricing
                x = self._point(*self._greedy(order, val, by_cost))
                obj = float(self._cost @ x)
                if obj > best_obj + _EPS:
                    best, best_obj = x, obj
        self._pricing = self.cfg.rab
        return best

    def _point(self, chosen, node_load, arc_load) -> np.ndarray:
        vm = self.vm
        x = np.zeros(len(vm))
        for rid, (m, routes) in chosen.items():
            x[vm[("y", rid)]] = 1.0
            for v, i in m.items():
                x[vm[("x", rid, v, i)]] = 1.0
            for (v, w), path in routes.items():
                for a in path:
                    x[vm[("f", rid, v, w, *a)]] = 1.0
        self._rent(x, node_load, arc_load)
        return x

    def _rent(self, x, node_load, arc_load):
        vm, sub, cat = self.vm, self.sub, self.inst.catalog
        for i, load in node_load.items():
            for k, c in enumerate(self._counts(load, cat.node_bulks, sub.node_capacity[i])):
                x[vm[("g", i, k)]] = c
        for a, load in arc_load.items():
            for k, c in enumerate(self._counts(load, cat.link_bulks, sub.arc_capacity[a])):
                x[vm[("h", *a, k)]] = c

    def _counts(self, load, bulks, cap):
        if load <= _EPS:
            return [0.0] * len(bulks)
        if self.cfg.rab == "integral":
            return list(min_bulk_covering(load, bulks, cap).counts)
        out = [0.0] * len(bulks)
        k = cheapest_unit_bulk(bulks)
        out[k] = load / bulks[k].size
        return out
