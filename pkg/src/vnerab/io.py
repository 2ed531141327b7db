"""Instance and solution documents, LP-file export, results and plot CSV."""

from __future__ import annotations

import csv
import io as _io
import json
import math
from dataclasses import asdict, dataclass, fields
from statistics import fmean

import jsonschema

from .generator import EdgeList
from .instance import (Arc, BulkCatalog, Bulk, Demand, Instance, Node, SubstrateNetwork,
                       VirtualNode, VnRequest, require_valid)
from .model import BINARY, INTEGER, MilpModel
from .verify import EmbeddingSolution

# -- instance documents --------------------------------------------------------

_num = {"type": "number", "minimum": 0}
_id = {"type": "integer"}
_bulks = {"type": "array", "minItems": 1,
          "items": {"type": "object", "required": ["size", "cost"], "additionalProperties": False,
                    "properties": {"size": {"type": "number", "exclusiveMinimum": 0}, "cost": _num}}}

INSTANCE_SCHEMA = {
    "$schema": "https://json-schema.org/draft/2020-12/schema",
    "type": "object",
    "required": ["substrate", "catalog", "requests"],
    "properties": {
        "substrate": {
            "type": "object", "required": ["nodes", "arcs"], "additionalProperties": False,
            "properties": {
                "nodes": {"type": "array", "items": {
                    "type": "object", "required": ["id", "B"], "additionalProperties": False,
                    "properties": {"id": _id, "B": _num}}},
                "arcs": {"type": "array", "items": {
                    "type": "object", "required": ["i", "j", "K"], "additionalProperties": False,
                    "properties": {"i": _id, "j": _id, "K": _num}}},
            }},
        "catalog": {
            "type": "object", "required": ["node_bulks", "link_bulks"], "additionalProperties": False,
            "properties": {"node_bulks": _bulks, "link_bulks": _bulks}},
        "requests": {"type": "array", "items": {
            "type": "object", "required": ["id", "nodes", "demands", "profit"],
            "additionalProperties": False,
            "properties": {
                "id": _id,
                "profit": _num,
                "nodes": {"type": "array", "items": {
                    "type": "object", "required": ["id", "t", "locality"], "additionalProperties": False,
                    "properties": {"id": _id, "t": _num,
                                   "locality": {"type": "array", "items": _id, "uniqueItems": True}}}},
                "demands": {"type": "array", "items": {
                    "type": "object", "required": ["v", "w", "d"], "additionalProperties": False,
                    "properties": {"v": _id, "w": _id, "d": _num}}},
            }}},
    },
}


class DocumentError(ValueError):
    """Malformed document; ``path`` locates the offending field."""

    def __init__(self, path: str, message: str):
        self.path = path
        super().__init__(f"{path or '<document>'}: {message}")


def _check(doc, schema) -> None:
    validator = jsonschema.Draft202012Validator(schema)
    errors = sorted(validator.iter_errors(doc), key=lambda e: list(map(str, e.absolute_path)))
    if errors:
        err = errors[0]
        raise DocumentError("/".join(str(p) for p in err.absolute_path), err.message)


def _load(text: str):
    try:
        return json.loads(text)
    except json.JSONDecodeError as exc:
        raise DocumentError("", f"not valid JSON ({exc.msg} at line {exc.lineno})") from None


def instance_to_dict(inst: Instance) -> dict:
    sub, cat = inst.substrate, inst.catalog
    return {
        "substrate": {
            "nodes": [{"id": n.id, "B": n.capacity} for n in sub.nodes],
            "arcs": [{"i": a.tail, "j": a.head, "K": a.capacity} for a in sub.arcs],
        },
        "catalog": {
            "node_bulks": [{"size": b.size, "cost": b.cost} for b in cat.node_bulks],
            "link_bulks": [{"size": b.size, "cost": b.cost} for b in cat.link_bulks],
        },
        "requests": [{
            "id": r.id,
            "nodes": [{"id": v.id, "t": v.requirement, "locality": sorted(v.locality)} for v in r.nodes],
            "demands": [{"v": d.v, "w": d.w, "d": d.amount} for d in r.demands],
            "profit": r.profit,
        } for r in inst.requests],
    }


def instance_from_dict(doc) -> Instance:
    """Build and validate an instance; raises DocumentError or InvalidInstanceError."""
    _check(doc, INSTANCE_SCHEMA)
    s, c = doc["substrate"], doc["catalog"]
    inst = Instance(
        SubstrateNetwork(tuple(Node(n["id"], float(n["B"])) for n in s["nodes"]),
                         tuple(Arc(a["i"], a["j"], float(a["K"])) for a in s["arcs"])),
        BulkCatalog(tuple(Bulk(float(b["size"]), float(b["cost"])) for b in c["node_bulks"]),
                    tuple(Bulk(float(b["size"]), float(b["cost"])) for b in c["link_bulks"])),
        tuple(VnRequest(
            r["id"],
            tuple(VirtualNode(v["id"], float(v["t"]), frozenset(v["locality"])) for v in r["nodes"]),
            tuple(Demand(d["v"], d["w"], float(d["d"])) for d in r["demands"]),
            float(r["profit"])) for r in doc["requests"]))
    require_valid(inst)
    return inst


def write_instance(inst: Instance) -> str:
    # json writes floats with repr, which round-trips exactly
    return json.dumps(instance_to_dict(inst), indent=1) + "\n"


def read_instance(text: str) -> Instance:
    return instance_from_dict(_load(text))


# -- solutions -----------------------------------------------------------------

_SOLUTION_SCHEMA = {
    "$schema": "https://json-schema.org/draft/2020-12/schema",
    "type": "object",
    "required": ["accepted", "mapping", "flows", "node_rentals", "arc_rentals"],
    "properties": {
        "accepted": {"type": "array", "items": _id},
        "mapping": {"type": "array", "items": {
            "type": "object", "required": ["r", "v", "i"],
            "properties": {"r": _id, "v": _id, "i": _id}}},
        "flows": {"type": "array", "items": {
            "type": "object", "required": ["r", "v", "w", "i", "j", "f"],
            "properties": {"r": _id, "v": _id, "w": _id, "i": _id, "j": _id, "f": {"type": "number"}}}},
        "node_rentals": {"type": "array", "items": {
            "type": "object", "required": ["i", "counts"],
            "properties": {"i": _id, "counts": {"type": "array", "items": {"type": "number"}}}}},
        "arc_rentals": {"type": "array", "items": {
            "type": "object", "required": ["i", "j", "counts"],
            "properties": {"i": _id, "j": _id, "counts": {"type": "array", "items": {"type": "number"}}}}},
    },
}


def write_solution(sol: EmbeddingSolution, meta: dict | None = None) -> str:
    doc = {
        "accepted": sorted(r for r, ok in sol.accepted.items() if ok),
        "mapping": [{"r": r, "v": v, "i": i} for r in sorted(sol.mapping)
                    for v, i in sorted(sol.mapping[r].items())],
        "flows": [{"r": r, "v": v, "w": w, "i": a[0], "j": a[1], "f": f}
                  for (r, v, w) in sorted(sol.flows) for a, f in sorted(sol.flows[(r, v, w)].items())
                  if f != 0],
        "node_rentals": [{"i": i, "counts": list(c)} for i, c in sorted(sol.node_rentals.items())],
        "arc_rentals": [{"i": a[0], "j": a[1], "counts": list(c)} for a, c in sorted(sol.arc_rentals.items())],
        "node_usage": [{"i": i, "usage": u} for i, u in sorted(sol.node_usage.items())],
        "arc_usage": [{"i": a[0], "j": a[1], "usage": u} for a, u in sorted(sol.arc_usage.items())],
    }
    if meta:
        doc["meta"] = meta
    return json.dumps(doc, indent=1) + "\n"


def read_solution(text: str, inst: Instance | None = None) -> EmbeddingSolution:
    """Parse a solution document; with ``inst`` every request gets an accepted flag."""
    doc = _load(text)
    _check(doc, _SOLUTION_SCHEMA)
    accepted = {r: True for r in doc["accepted"]}
    if inst is not None:
        accepted = {r.id: r.id in accepted for r in inst.requests}
    mapping: dict[int, dict[int, int]] = {}
    for e in doc["mapping"]:
        mapping.setdefault(e["r"], {})[e["v"]] = e["i"]
    flows: dict = {}
    for e in doc["flows"]:
        flows.setdefault((e["r"], e["v"], e["w"]), {})[(e["i"], e["j"])] = float(e["f"])
    return EmbeddingSolution(
        accepted=accepted, mapping=mapping, flows=flows,
        node_rentals={e["i"]: tuple(float(c) for c in e["counts"]) for e in doc["node_rentals"]},
        arc_rentals={(e["i"], e["j"]): tuple(float(c) for c in e["counts"]) for e in doc["arc_rentals"]},
        node_usage={e["i"]: float(e["usage"]) for e in doc.get("node_usage", [])},
        arc_usage={(e["i"], e["j"]): float(e["usage"]) for e in doc.get("arc_usage", [])})


# -- topology ------------------------------------------------------------------

def read_edge_list(text: str) -> EdgeList:
    """Undirected topology: one ``u v`` pair of 0-based node ids per line.

    Blank lines and ``#`` comments are ignored. An optional ``nodes N`` line
    declares isolated trailing nodes; otherwise N is the largest id + 1.
    """
    edges: list[tuple[int, int]] = []
    declared = None
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        parts = line.split()
        try:
            if parts[0] == "nodes" and len(parts) == 2:
                declared = int(parts[1])
                continue
            if len(parts) != 2:
                raise ValueError
            u, v = int(parts[0]), int(parts[1])
        except ValueError:
            raise DocumentError(f"line {lineno}", f"expected 'u v', got {raw.strip()!r}") from None
        if u < 0 or v < 0:
            raise DocumentError(f"line {lineno}", "node ids must be nonnegative")
        edges.append((u, v))
    n = max((max(e) for e in edges), default=-1) + 1
    if declared is not None:
        if declared < n:
            raise DocumentError("nodes", f"declares {declared} nodes but ids reach {n - 1}")
        n = declared
    return EdgeList(n, tuple(edges))


# -- LP file -------------------------------------------------------------------

LP_LINE_WIDTH = 255


def _fmt(v: float) -> str:
    v = float(v)
    if v.is_integer() and abs(v) < 1e15:
        return str(int(v))
    return repr(v)


def _wrap(head: str, tokens: list[str]) -> list[str]:
    """Join tokens after ``head``, breaking lines before LP_LINE_WIDTH."""
    lines, cur = [], head
    for tok in tokens:
        if len(cur) + 1 + len(tok) > LP_LINE_WIDTH and cur.strip():
            lines.append(cur)
            cur = "  " + tok
        else:
            cur = f"{cur} {tok}" if cur else tok
    lines.append(cur)
    return lines


def _linear(coefs, names) -> list[str]:
    toks: list[str] = []
    for j, v in coefs:
        if v == 0 and len(coefs) > 1:
            continue
        if not toks:
            toks += [_fmt(v), names[j]]
        else:
            toks += ["-" if v < 0 else "+", _fmt(abs(v)), names[j]]
    return toks


def write_lp(model: MilpModel, vm=None) -> str:
    """CPLEX LP-format text of ``model``; columns are named from their tags."""
    names = [c.name for c in model.columns]
    if vm is not None and len(vm) != len(names):
        raise ValueError("variable map does not match the model")
    out = ["\\ generated by vnerab", "Maximize" if model.sense == "max" else "Minimize"]
    obj = [(j, v) for j, v in model.objective if v != 0]
    if not obj and names:
        obj = [(0, 0.0)]
    out += _wrap(" obj:", _linear(obj, names))
    out.append("Subject To")
    for row in model.rows:
        coefs = list(row.coefs) or ([(0, 0.0)] if names else [])
        toks = _linear(coefs, names) + [row.sense, _fmt(row.rhs)]
        out += _wrap(f" {row.name}:", toks)
    out.append("Bounds")
    for c in model.columns:
        if c.kind == BINARY:
            continue
        if math.isinf(c.ub):
            if c.lb != 0:
                out.append(f" {c.name} >= {_fmt(c.lb)}")
        else:
            out.append(f" {_fmt(c.lb)} <= {c.name} <= {_fmt(c.ub)}")
    generals = [c.name for c in model.columns if c.kind == INTEGER]
    binaries = [c.name for c in model.columns if c.kind == BINARY]
    if generals:
        out.append("Generals")
        out += _wrap("", generals)
    if binaries:
        out.append("Binaries")
        out += _wrap("", binaries)
    out.append("End")
    return "\n".join(out) + "\n"


# -- experiment records ----------------------------------------------------------

@dataclass(frozen=True)
class ExperimentRecord:
    instance: str
    substrate: str  # "long-haul" | "data-center"
    req: int
    scal: float
    seed: int
    routing: str
    rab: str
    profit: float
    status: str
    seconds: float
    gap: float
    nodes: int
    baseline: float
    baseline_feasible: bool
    impr: float | None  # percent; None when the baseline profit is 0


TIMING_COLUMNS = ("seconds",)
RESULT_COLUMNS = tuple(f.name for f in fields(ExperimentRecord))


def improvement(profit: float, baseline: float) -> float | None:
    if baseline == 0:
        return None
    return 100.0 * (profit - baseline) / abs(baseline)


def _cell(v) -> str:
    if v is None:
        return ""
    if isinstance(v, bool):
        return "1" if v else "0"
    if isinstance(v, float):
        return repr(v)
    return str(v)


def write_results(records, timing: bool = True) -> str:
    cols = [c for c in RESULT_COLUMNS if timing or c not in TIMING_COLUMNS]
    buf = _io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(cols)
    for rec in records:
        d = asdict(rec)
        w.writerow([_cell(d[c]) for c in cols])
    return buf.getvalue()


def read_results(text: str) -> list[ExperimentRecord]:
    types = {"req": int, "seed": int, "nodes": int, "scal": float, "profit": float,
             "seconds": float, "gap": float, "baseline": float}
    out = []
    for row in csv.DictReader(_io.StringIO(text)):
        kw = {}
        for c in RESULT_COLUMNS:
            raw = row.get(c, "")
            if c in types:
                kw[c] = types[c](raw) if raw != "" else (math.nan if types[c] is float else 0)
            elif c == "baseline_feasible":
                kw[c] = raw == "1"
            elif c == "impr":
                kw[c] = float(raw) if raw != "" else None
            else:
                kw[c] = raw
        out.append(ExperimentRecord(**kw))
    return out


PLOT_COLUMNS = ("substrate", "routing", "rab", "scal", "req", "count", "mean_profit",
                "mean_baseline", "mean_impr")


def write_plot_data(records) -> str:
    """Mean profit per (substrate, routing, rab, Scal, Req), one row per group."""
    groups: dict[tuple, list[ExperimentRecord]] = {}
    for rec in records:
        groups.setdefault((rec.substrate, rec.routing, rec.rab, rec.scal, rec.req), []).append(rec)
    buf = _io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(PLOT_COLUMNS)
    for key in sorted(groups):
        recs = groups[key]
        imprs = [r.impr for r in recs if r.impr is not None]
        w.writerow([*map(_cell, key), len(recs), _cell(fmean(r.profit for r in recs)),
                    _cell(fmean(r.baseline for r in recs)), _cell(fmean(imprs) if imprs else None)])
    return buf.getvalue()
