"""Problem data: substrate network, rent-at-bulk catalog and VN requests."""

from __future__ import annotations

from collections import defaultdict
from dataclasses import dataclass, field
from functools import cached_property
from typing import Iterable

# relative slack allowed when comparing unit costs of bulks
_UNIT_COST_TOL = 1e-12


@dataclass(frozen=True)
class Node:
    id: int
    capacity: float


@dataclass(frozen=True)
class Arc:
    tail: int
    head: int
    capacity: float

    @property
    def key(self) -> tuple[int, int]:
        return (self.tail, self.head)


@dataclass(frozen=True)
class SubstrateNetwork:
    """Directed physical network with node capacities B_i and arc capacities K_ij."""

    nodes: tuple[Node, ...]
    arcs: tuple[Arc, ...]

    @classmethod
    def build(cls, node_caps: dict[int, float] | Iterable[float],
              arc_caps: dict[tuple[int, int], float]) -> "SubstrateNetwork":
        if not isinstance(node_caps, dict):
            node_caps = dict(enumerate(node_caps))
        nodes = tuple(Node(i, float(c)) for i, c in sorted(node_caps.items()))
        arcs = tuple(Arc(i, j, float(k)) for (i, j), k in sorted(arc_caps.items()))
        return cls(nodes, arcs)

    @cached_property
    def node_ids(self) -> tuple[int, ...]:
        return tuple(n.id for n in self.nodes)

    @cached_property
    def arc_keys(self) -> tuple[tuple[int, int], ...]:
        return tuple(a.key for a in self.arcs)

    @cached_property
    def node_capacity(self) -> dict[int, float]:
        return {n.id: n.capacity for n in self.nodes}

    @cached_property
    def arc_capacity(self) -> dict[tuple[int, int], float]:
        return {a.key: a.capacity for a in self.arcs}

    @cached_property
    def out_arcs(self) -> dict[int, tuple[tuple[int, int], ...]]:
        """delta^+(i): arcs leaving each node, in arc order."""
        out: dict[int, list] = {i: [] for i in self.node_ids}
        for a in self.arcs:
            out.setdefault(a.tail, []).append(a.key)
        return {i: tuple(v) for i, v in out.items()}

    @cached_property
    def in_arcs(self) -> dict[int, tuple[tuple[int, int], ...]]:
        """delta^-(i): arcs entering each node, in arc order."""
        inc: dict[int, list] = {i: [] for i in self.node_ids}
        for a in self.arcs:
            inc.setdefault(a.head, []).append(a.key)
        return {i: tuple(v) for i, v in inc.items()}


@dataclass(frozen=True)
class Bulk:
    size: float
    cost: float

    @property
    def unit_cost(self) -> float:
        return self.cost / self.size


@dataclass(frozen=True)
class BulkCatalog:
    node_bulks: tuple[Bulk, ...]
    link_bulks: tuple[Bulk, ...]

    @classmethod
    def build(cls, node_bulks: Iterable[tuple[float, float]],
              link_bulks: Iterable[tuple[float, float]] | None = None) -> "BulkCatalog":
        nb = tuple(Bulk(float(s), float(c)) for s, c in node_bulks)
        lb = nb if link_bulks is None else tuple(Bulk(float(s), float(c)) for s, c in link_bulks)
        return cls(nb, lb)


@dataclass(frozen=True)
class VirtualNode:
    id: int
    requirement: float
    locality: frozenset[int]


@dataclass(frozen=True)
class Demand:
    v: int
    w: int
    amount: float


@dataclass(frozen=True)
class VnRequest:
    """One virtual network: nodes with requirements t_v and locality sets, a
    sparse traffic matrix and the profit earned when embedded."""

    id: int
    nodes: tuple[VirtualNode, ...]
    demands: tuple[Demand, ...]
    profit: float

    @cached_property
    def node_ids(self) -> tuple[int, ...]:
        return tuple(v.id for v in self.nodes)

    @cached_property
    def node(self) -> dict[int, VirtualNode]:
        return {v.id: v for v in self.nodes}

    def demand(self, v: int, w: int) -> float:
        return sum(d.amount for d in self.demands if d.v == v and d.w == w)


@dataclass(frozen=True)
class Instance:
    substrate: SubstrateNetwork
    catalog: BulkCatalog
    requests: tuple[VnRequest, ...] = field(default_factory=tuple)


def commodities(req: VnRequest) -> list[tuple[int, int, float]]:
    """Ordered pairs (v, w, d_vw) with strictly positive demand, sorted by (v, w)."""
    return sorted((d.v, d.w, d.amount) for d in req.demands if d.amount > 0 and d.v != d.w)


def _check_catalog(bulks: tuple[Bulk, ...], label: str) -> list[str]:
    out = []
    if not bulks:
        return [f"{label}: catalog is empty"]
    for k, b in enumerate(bulks):
        if not b.size > 0:
            out.append(f"{label}[{k}]: bulk size {b.size} must be positive")
        if b.cost < 0:
            out.append(f"{label}[{k}]: bulk cost {b.cost} is negative")
    for k in range(1, len(bulks)):
        if not bulks[k].size > bulks[k - 1].size:
            out.append(f"{label}[{k}]: sizes not strictly increasing "
                       f"({bulks[k - 1].size} then {bulks[k].size})")
    if out:
        return out
    for a in range(len(bulks)):
        for b in range(a + 1, len(bulks)):
            ua, ub = bulks[a].unit_cost, bulks[b].unit_cost
            if ub > ua * (1 + _UNIT_COST_TOL) + _UNIT_COST_TOL:
                out.append(f"{label}: unit cost increases with size "
                           f"(size {bulks[a].size} at {ua:g}/unit, size {bulks[b].size} at {ub:g}/unit)")
    return out


def validate(inst: Instance) -> list[str]:
    """Return one message per violated invariant; an empty list means valid."""
    out: list[str] = []
    sub = inst.substrate
    ids = [n.id for n in sub.nodes]
    if len(set(ids)) != len(ids):
        out.append("substrate: duplicate node ids")
    known = set(ids)
    for n in sub.nodes:
        if not n.capacity >= 0:
            out.append(f"substrate node {n.id}: negative capacity {n.capacity}")
    seen: set[tuple[int, int]] = set()
    for a in sub.arcs:
        if a.tail == a.head:
            out.append(f"substrate arc ({a.tail},{a.head}): self-loop")
        if a.tail not in known or a.head not in known:
            out.append(f"substrate arc ({a.tail},{a.head}): unknown endpoint")
        if a.key in seen:
            out.append(f"substrate arc ({a.tail},{a.head}): parallel arc")
        seen.add(a.key)
        if not a.capacity >= 0:
            out.append(f"substrate arc ({a.tail},{a.head}): negative capacity {a.capacity}")

    out += _check_catalog(inst.catalog.node_bulks, "node_bulks")
    out += _check_catalog(inst.catalog.link_bulks, "link_bulks")

    rids = [r.id for r in inst.requests]
    if len(set(rids)) != len(rids):
        out.append("requests: duplicate request ids")
    for r in inst.requests:
        tag = f"request {r.id}"
        if not r.nodes:
            out.append(f"{tag}: no virtual nodes")
        vids = [v.id for v in r.nodes]
        if len(set(vids)) != len(vids):
            out.append(f"{tag}: duplicate virtual node ids")
        if not r.profit >= 0:
            out.append(f"{tag}: negative profit {r.profit}")
        for v in r.nodes:
            if not v.requirement >= 0:
                out.append(f"{tag} node {v.id}: negative requirement {v.requirement}")
            bad = sorted(set(v.locality) - known)
            if bad:
                out.append(f"{tag} node {v.id}: locality set names nonexistent substrate nodes {bad}")
        pairs: defaultdict[tuple[int, int], int] = defaultdict(int)
        for d in r.demands:
            pairs[(d.v, d.w)] += 1
            if d.v not in vids or d.w not in vids:
                out.append(f"{tag} demand ({d.v},{d.w}): unknown virtual node")
            if not d.amount >= 0:
                out.append(f"{tag} demand ({d.v},{d.w}): negative amount {d.amount}")
            if d.v == d.w and d.amount != 0:
                out.append(f"{tag} demand ({d.v},{d.w}): nonzero diagonal entry")
        for p, cnt in sorted(pairs.items()):
            if cnt > 1:
                out.append(f"{tag} demand {p}: listed {cnt} times")
    return out


class InvalidInstanceError(ValueError):
    def __init__(self, violations: list[str]):
        self.violations = list(violations)
        super().__init__("invalid instance: " + "; ".join(self.violations))


def require_valid(inst: Instance) -> None:
    violations = validate(inst)
    if violations:
        raise InvalidInstanceError(violations)
