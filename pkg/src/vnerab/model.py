"""MILP for offline VNE with rent-at-bulk rental, in a solver-neutral form.

Column blocks, in order: y(r), x(r,v,i), f(r,v,w,i,j), g(i,u), h(i,j,q).
Row families, in order: mapping, node capacity, link capacity, node bulk,
link bulk, flow balance.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import cached_property
from typing import Literal

import numpy as np
import scipy.sparse as sp

from .instance import Instance, commodities, require_valid
from .verify import EmbeddingSolution

Routing = Literal["splittable", "single-path"]
RabMode = Literal["integral", "relaxed"]
ROUTINGS: tuple[str, ...] = ("splittable", "single-path")
RAB_MODES: tuple[str, ...] = ("integral", "relaxed")

BINARY, INTEGER, CONTINUOUS = "binary", "integer", "continuous"

# branching tiers: acceptance, mapping, routing, rentals
PRIORITY = {"y": 0, "x": 1, "f": 2, "g": 3, "h": 3}


@dataclass(frozen=True)
class Column:
    name: str
    kind: str
    lb: float
    ub: float
    priority: int = 0


@dataclass(frozen=True)
class Row:
    name: str
    coefs: tuple[tuple[int, float], ...]
    sense: str  # "<=", "=", ">="
    rhs: float


@dataclass(frozen=True)
class MilpModel:
    """Maximization MILP: max c.x subject to rows and column bounds."""

    columns: tuple[Column, ...]
    rows: tuple[Row, ...]
    objective: tuple[tuple[int, float], ...]
    sense: str = "max"

    @property
    def n_cols(self) -> int:
        return len(self.columns)

    @property
    def n_rows(self) -> int:
        return len(self.rows)

    @cached_property
    def matrix(self) -> sp.csr_matrix:
        data, ri, ci = [], [], []
        for r, row in enumerate(self.rows):
            for c, v in row.coefs:
                ri.append(r)
                ci.append(c)
                data.append(v)
        return sp.csr_matrix((data, (ri, ci)), shape=(self.n_rows, self.n_cols), dtype=float)

    @cached_property
    def rhs(self) -> np.ndarray:
        return np.array([row.rhs for row in self.rows], dtype=float)

    @cached_property
    def senses(self) -> tuple[str, ...]:
        return tuple(row.sense for row in self.rows)

    @cached_property
    def cost(self) -> np.ndarray:
        c = np.zeros(self.n_cols)
        for j, v in self.objective:
            c[j] += v
        return c

    @cached_property
    def lower(self) -> np.ndarray:
        return np.array([col.lb for col in self.columns], dtype=float)

    @cached_property
    def upper(self) -> np.ndarray:
        return np.array([col.ub for col in self.columns], dtype=float)

    @cached_property
    def integer_mask(self) -> np.ndarray:
        return np.array([col.kind != CONTINUOUS for col in self.columns], dtype=bool)

    @cached_property
    def priorities(self) -> np.ndarray:
        return np.array([col.priority for col in self.columns], dtype=np.int64)

    def objective_value(self, point) -> float:
        return float(self.cost @ np.asarray(point, dtype=float))

    def row_violation(self, point) -> float:
        """Largest absolute violation of any row or column bound at ``point``."""
        x = np.asarray(point, dtype=float)
        worst = float(max(np.max(self.lower - x, initial=0.0), np.max(x - self.upper, initial=0.0)))
        if self.n_rows:
            lhs = self.matrix @ x
            for k, s in enumerate(self.senses):
                d = lhs[k] - self.rhs[k]
                v = d if s == "<=" else -d if s == ">=" else abs(d)
                worst = max(worst, v)
        return worst


@dataclass(frozen=True)
class ModelConfig:
    routing: Routing = "single-path"
    rab: RabMode = "integral"

    def __post_init__(self):
        if self.routing not in ROUTINGS:
            raise ValueError(f"unknown routing {self.routing!r}")
        if self.rab not in RAB_MODES:
            raise ValueError(f"unknown rab mode {self.rab!r}")


@dataclass(frozen=True)
class VarMap:
    """Bijection between column indices and symbol tags.

    Tags are tuples led by the symbol letter: ("y", r), ("x", r, v, i),
    ("f", r, v, w, i, j), ("g", i, k), ("h", i, j, k) where k indexes the
    bulk in the catalog.
    """

    tags: tuple[tuple, ...]
    index: dict = field(compare=False, repr=False)

    @classmethod
    def from_tags(cls, tags) -> "VarMap":
        tags = tuple(tags)
        index = {t: k for k, t in enumerate(tags)}
        if len(index) != len(tags):
            raise ValueError("duplicate column tags")
        return cls(tags, index)

    def __len__(self) -> int:
        return len(self.tags)

    def __getitem__(self, tag: tuple) -> int:
        return self.index[tag]

    def get(self, tag: tuple, default=None):
        return self.index.get(tag, default)

    def block(self, letter: str) -> list[int]:
        return [k for k, t in enumerate(self.tags) if t[0] == letter]


def _num(v: float) -> str:
    v = float(v)
    return str(int(v)) if v.is_integer() else repr(v)


def column_name(tag: tuple, inst: Instance) -> str:
    """LP-file identifier for a column tag, e.g. ``x_0_1_3`` or ``g_2_10``."""
    letter = tag[0]
    if letter == "g":
        return f"g_{tag[1]}_{_num(inst.catalog.node_bulks[tag[2]].size)}"
    if letter == "h":
        return f"h_{tag[1]}_{tag[2]}_{_num(inst.catalog.link_bulks[tag[3]].size)}"
    return "_".join([letter, *(str(t) for t in tag[1:])])


def build_model(inst: Instance, cfg: ModelConfig = ModelConfig()) -> tuple[MilpModel, VarMap]:
    require_valid(inst)
    sub, cat = inst.substrate, inst.catalog
    f_kind = BINARY if cfg.routing == "single-path" else CONTINUOUS
    rent_kind = INTEGER if cfg.rab == "integral" else CONTINUOUS

    tags: list[tuple] = []
    cols: list[Column] = []

    def add(tag, kind, lb, ub):
        tags.append(tag)
        cols.append(Column(column_name(tag, inst), kind, float(lb), float(ub), PRIORITY[tag[0]]))
        return len(tags) - 1

    reqs = sorted(inst.requests, key=lambda r: r.id)
    for r in reqs:
        add(("y", r.id), BINARY, 0, 1)
    for r in reqs:
        for v in sorted(r.nodes, key=lambda v: v.id):
            for i in sorted(v.locality):
                add(("x", r.id, v.id, i), BINARY, 0, 1)
    comms = [(r, v, w, d) for r in reqs for v, w, d in commodities(r)]
    for r, v, w, _ in comms:
        for (i, j) in sub.arc_keys:
            add(("f", r.id, v, w, i, j), f_kind, 0, 1)
    for i in sub.node_ids:
        for k, b in enumerate(cat.node_bulks):
            add(("g", i, k), rent_kind, 0, math.ceil(sub.node_capacity[i] / b.size))
    for (i, j) in sub.arc_keys:
        for k, b in enumerate(cat.link_bulks):
            add(("h", i, j, k), rent_kind, 0, math.ceil(sub.arc_capacity[(i, j)] / b.size))

    vm = VarMap.from_tags(tags)
    rows: list[Row] = []

    # each accepted request maps every virtual node exactly once
    for r in reqs:
        for v in sorted(r.nodes, key=lambda v: v.id):
            coefs = [(vm[("x", r.id, v.id, i)], 1.0) for i in sorted(v.locality)]
            coefs.append((vm[("y", r.id)], -1.0))
            rows.append(Row(f"map_{r.id}_{v.id}", tuple(coefs), "=", 0.0))

    # node usage within rented node capacity
    placed: dict[int, list] = {i: [] for i in sub.node_ids}
    for r in reqs:
        for v in sorted(r.nodes, key=lambda v: v.id):
            for i in sorted(v.locality):
                if v.requirement != 0:
                    placed[i].append((vm[("x", r.id, v.id, i)], float(v.requirement)))
    for i in sub.node_ids:
        coefs = placed[i] + [(vm[("g", i, k)], -b.size) for k, b in enumerate(cat.node_bulks)]
        rows.append(Row(f"nodecap_{i}", tuple(coefs), "<=", 0.0))

    # link usage within rented link capacity
    for (i, j) in sub.arc_keys:
        coefs = [(vm[("f", r.id, v, w, i, j)], float(d)) for r, v, w, d in comms]
        coefs += [(vm[("h", i, j, k)], -b.size) for k, b in enumerate(cat.link_bulks)]
        rows.append(Row(f"linkcap_{i}_{j}", tuple(coefs), "<=", 0.0))

    # no more rented than physically available
    for i in sub.node_ids:
        coefs = [(vm[("g", i, k)], b.size) for k, b in enumerate(cat.node_bulks)]
        rows.append(Row(f"nodebulk_{i}", tuple(coefs), "<=", sub.node_capacity[i]))
    for (i, j) in sub.arc_keys:
        coefs = [(vm[("h", i, j, k)], b.size) for k, b in enumerate(cat.link_bulks)]
        rows.append(Row(f"linkbulk_{i}_{j}", tuple(coefs), "<=", sub.arc_capacity[(i, j)]))

    # flow balance with right-hand side x_vi - x_wi, moved to the left
    for r, v, w, _ in comms:
        for i in sub.node_ids:
            coefs = [(vm[("f", r.id, v, w, *a)], 1.0) for a in sub.out_arcs[i]]
            coefs += [(vm[("f", r.id, v, w, *a)], -1.0) for a in sub.in_arcs[i]]
            xv = vm.get(("x", r.id, v, i))
            xw = vm.get(("x", r.id, w, i))
            if xv is not None:
                coefs.append((xv, -1.0))
            if xw is not None:
                coefs.append((xw, 1.0))
            rows.append(Row(f"flow_{r.id}_{v}_{w}_{i}", tuple(coefs), "=", 0.0))

    obj = [(vm[("y", r.id)], float(r.profit)) for r in reqs if r.profit != 0]
    obj += [(vm[("g", i, k)], -b.cost) for i in sub.node_ids
            for k, b in enumerate(cat.node_bulks) if b.cost != 0]
    obj += [(vm[("h", i, j, k)], -b.cost) for (i, j) in sub.arc_keys
            for k, b in enumerate(cat.link_bulks) if b.cost != 0]
    return MilpModel(tuple(cols), tuple(rows), tuple(obj)), vm


def implied_bounds(inst: Instance, vm: VarMap, cfg: ModelConfig,
                   model: MilpModel) -> tuple[np.ndarray, np.ndarray]:
    """Column bounds implied by capacity rows; no feasible point is cut off.

    A virtual node cannot sit on a node smaller than its requirement, a
    demand cannot cross an arc smaller than itself (single-path) or use more
    than K/d of it (splittable), a request with an unplaceable node is
    rejected, and no single bulk size can be rented beyond the physical
    capacity (floored for integer rentals).
    """
    lo, hi = model.lower.copy(), model.upper.copy()
    sub, cat = inst.substrate, inst.catalog
    tol = 1e-9
    dead: set[int] = set()
    for r in inst.requests:
        for v in r.nodes:
            alive = 0
            for i in v.locality:
                if v.requirement > sub.node_capacity[i] + tol:
                    hi[vm[("x", r.id, v.id, i)]] = 0.0
                else:
                    alive += 1
            if not alive:
                dead.add(r.id)
    for r in inst.requests:
        for v, w, d in commodities(r):
            for a in sub.arc_keys:
                k = vm[("f", r.id, v, w, *a)]
                cap = sub.arc_capacity[a] / d
                if r.id in dead:
                    hi[k] = 0.0
                elif cfg.routing == "single-path":
                    hi[k] = 0.0 if cap < 1 - tol else 1.0
                else:
                    hi[k] = min(1.0, cap)
        if r.id in dead:
            hi[vm[("y", r.id)]] = 0.0
            for v in r.nodes:
                for i in v.locality:
                    hi[vm[("x", r.id, v.id, i)]] = 0.0
    integral = cfg.rab == "integral"
    for i in sub.node_ids:
        for k, b in enumerate(cat.node_bulks):
            q = sub.node_capacity[i] / b.size
            hi[vm[("g", i, k)]] = math.floor(q + tol) if integral else q
    for a in sub.arc_keys:
        for k, b in enumerate(cat.link_bulks):
            q = sub.arc_capacity[a] / b.size
            hi[vm[("h", *a, k)]] = math.floor(q + tol) if integral else q
    return lo, hi


def decode(inst: Instance, vm: VarMap, point) -> EmbeddingSolution:
    """Read acceptance, mapping, flows and rentals back from a column vector."""
    x = np.asarray(point, dtype=float)
    if x.shape != (len(vm),):
        raise ValueError(f"point has {x.size} entries, model has {len(vm)} columns")
    sub, cat = inst.substrate, inst.catalog
    accepted, mapping, flows = {}, {}, {}
    node_usage = {i: 0.0 for i in sub.node_ids}
    arc_usage = {a: 0.0 for a in sub.arc_keys}
    node_rent = {i: [0.0] * len(cat.node_bulks) for i in sub.node_ids}
    arc_rent = {a: [0.0] * len(cat.link_bulks) for a in sub.arc_keys}
    reqs = {r.id: r for r in inst.requests}
    demand = {(r.id, v, w): d for r in inst.requests for v, w, d in commodities(r)}

    for k, tag in enumerate(vm.tags):
        val = float(x[k])
        letter = tag[0]
        if letter == "y":
            accepted[tag[1]] = val > 0.5
        elif letter == "x":
            _, r, v, i = tag
            if val > 0.5:
                mapping.setdefault(r, {})[v] = i
            node_usage[i] += reqs[r].node[v].requirement * val
        elif letter == "f":
            _, r, v, w, i, j = tag
            if val != 0.0:
                flows.setdefault((r, v, w), {})[(i, j)] = val
                arc_usage[(i, j)] += demand[(r, v, w)] * val
        elif letter == "g":
            node_rent[tag[1]][tag[2]] = val
        elif letter == "h":
            arc_rent[(tag[1], tag[2])][tag[3]] = val
    for r in reqs:
        accepted.setdefault(r, False)
    return EmbeddingSolution(
        accepted=accepted,
        mapping={r: m for r, m in mapping.items()},
        flows=flows,
        node_rentals={i: tuple(v) for i, v in node_rent.items()},
        arc_rentals={a: tuple(v) for a, v in arc_rent.items()},
        node_usage=node_usage,
        arc_usage=arc_usage,
    )


def encode(inst: Instance, vm: VarMap, sol: EmbeddingSolution) -> np.ndarray:
    """Inverse of :func:`decode` for the columns present in ``vm``."""
    x = np.zeros(len(vm))
    for r, ok in sol.accepted.items():
        if ok:
            x[vm[("y", r)]] = 1.0
    for r, m in sol.mapping.items():
        for v, i in m.items():
            x[vm[("x", r, v, i)]] = 1.0
    for (r, v, w), fl in sol.flows.items():
        for (i, j), val in fl.items():
            x[vm[("f", r, v, w, i, j)]] = val
    for i, counts in sol.node_rentals.items():
        for k, c in enumerate(counts):
            x[vm[("g", i, k)]] = c
    for (i, j), counts in sol.arc_rentals.items():
        for k, c in enumerate(counts):
            x[vm[("h", i, j, k)]] = c
    return x
