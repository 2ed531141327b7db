"""Seeded random instances: transit-stub or imported substrates, VN requests, locality.

Randomness comes from numpy's PCG64 ``Generator``. An instance is derived
from one integer seed through ``SeedSequence`` children: one stream for the
topology, one for capacities and one per request. Request ``k`` therefore
depends only on (seed, k), so an instance with more requests extends an
instance with fewer under the same seed.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .instance import (BulkCatalog, Demand, Instance, SubstrateNetwork, VirtualNode,
                       VnRequest, validate)

DEFAULT_CAPACITIES = (5.0, 10.0, 50.0, 500.0)
DEFAULT_PROBABILITIES = (0.1, 0.4, 0.4, 0.1)
DEFAULT_BULKS = ((1.0, 1.0), (10.0, 5.0), (100.0, 25.0))


class DegenerateTopology(ValueError):
    def __init__(self, why: str):
        super().__init__(f"degenerate topology: {why}")


@dataclass(frozen=True)
class GeneratorConfig:
    seed: int = 0
    capacity_values: tuple[float, ...] = DEFAULT_CAPACITIES
    capacity_probs: tuple[float, ...] = DEFAULT_PROBABILITIES
    node_bulks: tuple[tuple[float, float], ...] = DEFAULT_BULKS
    link_bulks: tuple[tuple[float, float], ...] = DEFAULT_BULKS
    num_requests: int = 10
    scale: float = 0.4
    profit: float = 500.0
    min_vnodes: int = 2
    max_vnodes: int = 10
    density: float = 0.5
    gamma_range: tuple[float, float] = (0.5, 1.0)

    def __post_init__(self):
        if len(self.capacity_values) != len(self.capacity_probs) or not self.capacity_values:
            raise ValueError("capacity values and probabilities must be nonempty and aligned")
        if abs(sum(self.capacity_probs) - 1.0) > 1e-9:
            raise ValueError("capacity probabilities must sum to 1")
        if not self.scale > 0:
            raise ValueError("scale must be positive")
        if not 1 <= self.min_vnodes <= self.max_vnodes:
            raise ValueError("virtual node-count range is empty")
        if self.num_requests < 0:
            raise ValueError("negative request count")
        if not 0 <= self.density <= 1:
            raise ValueError("density must lie in [0, 1]")
        lo, hi = self.gamma_range
        if not 0 <= lo <= hi <= 1:
            raise ValueError("gamma range must satisfy 0 <= lo <= hi <= 1")

    @property
    def catalog(self) -> BulkCatalog:
        return BulkCatalog.build(self.node_bulks, self.link_bulks)


@dataclass(frozen=True)
class TransitStub:
    """One transit ring with stub domains hanging off distinct transit nodes.

    Each stub is a random tree on ``stub_size`` nodes plus its attachment
    edge. If ``edges`` is set, random extra edges inside the domains (stubs
    first share the pool with the transit ring) are added until the
    undirected edge count reaches it.
    """

    transit: int
    stubs: int
    stub_size: tuple[int, int] = (3, 3)
    edges: int | None = None
    kind: str = field(default="transit-stub", init=False)

    def __post_init__(self):
        lo, hi = self.stub_size
        if self.transit < 1 or self.stubs < 0 or lo < 1 or hi < lo:
            raise DegenerateTopology(f"bad transit-stub sizes {self}")
        if self.stubs > self.transit:
            raise DegenerateTopology("more stub domains than transit nodes")


@dataclass(frozen=True)
class EdgeList:
    num_nodes: int
    edges: tuple[tuple[int, int], ...]
    kind: str = field(default="edge-list", init=False)


TopologySpec = TransitStub | EdgeList

# transit-stub settings matching the data-center sizes (|V|, |A|) of the experiments
PRESETS: dict[str, TransitStub] = {
    "ts10": TransitStub(4, 2, (3, 3), 12),
    "ts13": TransitStub(4, 3, (3, 3), 15),
    "ts14": TransitStub(4, 2, (5, 5), 24),
    "ts23": TransitStub(5, 3, (6, 6), 30),
    "ts31": TransitStub(7, 4, (6, 6), 48),
    "ts45": TransitStub(9, 6, (6, 6), 74),
}


def sample_capacity(rng: np.random.Generator, cfg: GeneratorConfig = GeneratorConfig()) -> float:
    k = rng.choice(len(cfg.capacity_values), p=cfg.capacity_probs)
    return float(cfg.capacity_values[k])


def _connected(n: int, edges: Sequence[tuple[int, int]]) -> bool:
    adj: dict[int, list[int]] = {i: [] for i in range(n)}
    for u, v in edges:
        adj[u].append(v)
        adj[v].append(u)
    seen, stack = {0}, [0]
    while stack:
        for nxt in adj[stack.pop()]:
            if nxt not in seen:
                seen.add(nxt)
                stack.append(nxt)
    return len(seen) == n


def topology_edges(spec: TopologySpec, rng: np.random.Generator) -> tuple[int, list[tuple[int, int]]]:
    """Undirected edge list (u < v, sorted) and node count for a topology spec."""
    if isinstance(spec, EdgeList):
        n = spec.num_nodes
        edges = sorted({(min(u, v), max(u, v)) for u, v in spec.edges})
        if n < 1:
            raise DegenerateTopology("no nodes")
        if any(u == v for u, v in spec.edges):
            raise DegenerateTopology("self-loop in edge list")
        if any(not 0 <= u < n or not 0 <= v < n for u, v in edges):
            raise DegenerateTopology("edge endpoint out of range")
        if not _connected(n, edges):
            raise DegenerateTopology("graph is disconnected")
        return n, edges

    t = spec.transit
    edges: set[tuple[int, int]] = set()
    if t == 2:
        edges.add((0, 1))
    elif t > 2:
        edges.update((min(k, (k + 1) % t), max(k, (k + 1) % t)) for k in range(t))
    domains = [list(range(t))]
    nxt = t
    lo, hi = spec.stub_size
    anchors = rng.permutation(t)[:spec.stubs]
    for s in range(spec.stubs):
        size = int(rng.integers(lo, hi + 1))
        members = list(range(nxt, nxt + size))
        nxt += size
        for k in range(1, size):
            parent = members[int(rng.integers(0, k))]
            edges.add((parent, members[k]))
        gate = members[int(rng.integers(0, size))]
        edges.add((int(anchors[s]), gate))
        domains.append(members)
    n = nxt
    if spec.edges is not None:
        pool = [(u, v) for dom in domains for a, u in enumerate(dom) for v in dom[a + 1:]
                if (u, v) not in edges]
        missing = spec.edges - len(edges)
        if missing < 0 or missing > len(pool):
            raise DegenerateTopology(f"cannot reach {spec.edges} edges from {len(edges)} "
                                     f"with {len(pool)} candidates")
        for k in rng.choice(len(pool), size=missing, replace=False):
            edges.add(pool[int(k)])
    edges_sorted = sorted(edges)
    if not _connected(n, edges_sorted):
        raise DegenerateTopology("graph is disconnected")
    return n, edges_sorted


def gen_substrate(spec: TopologySpec, cfg: GeneratorConfig, rng: np.random.Generator,
                  topo_rng: np.random.Generator | None = None) -> SubstrateNetwork:
    """Sample capacities for a topology; each undirected edge gives two antiparallel arcs."""
    n, edges = topology_edges(spec, topo_rng if topo_rng is not None else rng)
    node_caps = {i: sample_capacity(rng, cfg) for i in range(n)}
    arc_caps = {}
    for u, v in edges:
        arc_caps[(u, v)] = sample_capacity(rng, cfg)
        arc_caps[(v, u)] = sample_capacity(rng, cfg)
    return SubstrateNetwork.build(node_caps, arc_caps)


def gen_locality(num_vnodes: int, substrate: SubstrateNetwork, rng: np.random.Generator,
                 gamma_range: tuple[float, float] = (0.5, 1.0)) -> list[frozenset[int]]:
    """Draw gamma per virtual node, then keep each substrate node with probability gamma."""
    out = []
    ids = substrate.node_ids
    for _ in range(num_vnodes):
        gamma = rng.uniform(*gamma_range)
        keep = rng.random(len(ids)) < gamma
        out.append(frozenset(i for i, k in zip(ids, keep) if k))
    return out


def gen_request(rid: int, cfg: GeneratorConfig, substrate: SubstrateNetwork,
                rng: np.random.Generator) -> VnRequest:
    nv = int(rng.integers(cfg.min_vnodes, cfg.max_vnodes + 1))
    reqs = [cfg.scale * sample_capacity(rng, cfg) for _ in range(nv)]
    demands = []
    for v in range(nv):
        for w in range(nv):
            if v != w and rng.random() < cfg.density:
                demands.append(Demand(v, w, cfg.scale * sample_capacity(rng, cfg)))
    locality = gen_locality(nv, substrate, rng, cfg.gamma_range)
    nodes = tuple(VirtualNode(v, reqs[v], locality[v]) for v in range(nv))
    return VnRequest(rid, nodes, tuple(demands), float(cfg.profit))


def gen_requests(cfg: GeneratorConfig, substrate: SubstrateNetwork,
                 rng: np.random.Generator | np.random.SeedSequence) -> list[VnRequest]:
    """``cfg.num_requests`` requests, each from its own child stream of ``rng``."""
    seq = rng if isinstance(rng, np.random.SeedSequence) else rng.bit_generator.seed_seq
    children = [np.random.default_rng(s) for s in _children(seq, cfg.num_requests)]
    return [gen_request(k, cfg, substrate, children[k]) for k in range(cfg.num_requests)]


def _children(seq: np.random.SeedSequence, count: int) -> list[np.random.SeedSequence]:
    # spawn keys are position-indexed, independent of how many are requested
    return [np.random.SeedSequence(seq.entropy, spawn_key=seq.spawn_key + (k,)) for k in range(count)]


def generate_instance(spec: TopologySpec, cfg: GeneratorConfig) -> Instance:
    root = np.random.SeedSequence(cfg.seed)
    topo_seq, cap_seq, req_seq = _children(root, 3)
    substrate = gen_substrate(spec, cfg, np.random.default_rng(cap_seq),
                              topo_rng=np.random.default_rng(topo_seq))
    requests = gen_requests(cfg, substrate, req_seq)
    inst = Instance(substrate, cfg.catalog, tuple(requests))
    problems = validate(inst)
    if problems:
        raise AssertionError(f"generator produced an invalid instance: {problems}")
    return inst
