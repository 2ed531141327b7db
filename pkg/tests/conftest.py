import itertools

import numpy as np
import pytest

from vnerab.generator import EdgeList, GeneratorConfig, generate_instance
from vnerab.instance import BulkCatalog, Demand, Instance, SubstrateNetwork, VirtualNode, VnRequest

DEFAULT_BULKS = ((1.0, 1.0), (10.0, 5.0), (100.0, 25.0))


def make_request(rid, reqs, demands=(), locality=None, profit=500.0, substrate=None):
    """Request with requirements ``reqs`` and demand triples (v, w, d)."""
    everywhere = frozenset(substrate.node_ids) if substrate is not None else frozenset()
    nodes = tuple(VirtualNode(v, float(t), frozenset(locality[v]) if locality else everywhere)
                  for v, t in enumerate(reqs))
    return VnRequest(rid, nodes, tuple(Demand(v, w, float(d)) for v, w, d in demands), float(profit))


def toy_substrate(node_cap=50.0, arc_cap=50.0):
    # 3 nodes, 4 arcs: 0<->1 and 1<->2
    arcs = {(0, 1): arc_cap, (1, 0): arc_cap, (1, 2): arc_cap, (2, 1): arc_cap}
    return SubstrateNetwork.build([node_cap] * 3, arcs)


def toy_instance(demand=10.0, profit=500.0, reqs=(5.0, 5.0)):
    """3-node/4-arc substrate, one request with 2 virtual nodes and one demand."""
    sub = toy_substrate()
    req = make_request(0, reqs, [(0, 1, demand)], profit=profit, substrate=sub)
    return Instance(sub, BulkCatalog.build(DEFAULT_BULKS), (req,))


def tiny_instance(seed):
    """Ring of 3..5 nodes plus an optional chord, 1..2 requests with 2..3 virtual nodes."""
    rng = np.random.default_rng(seed)
    n = int(rng.integers(3, 6))
    edges = [(k, (k + 1) % n) for k in range(n)]
    chords = [e for e in itertools.combinations(range(n), 2)
              if e not in edges and (e[1], e[0]) not in edges]
    if chords and rng.random() < 0.5:
        edges.append(chords[int(rng.integers(len(chords)))])
    cfg = GeneratorConfig(seed=seed, num_requests=int(rng.integers(1, 3)), min_vnodes=2, max_vnodes=3,
                          scale=float(rng.choice([0.3, 0.4, 0.5])))
    return generate_instance(EdgeList(n, tuple(edges)), cfg)


@pytest.fixture
def toy():
    return toy_instance()


# one line per acceptance criterion, echoed in the terminal summary
ACCEPTANCE_LINES: list[str] = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
