"""Command-line front end: ``vnerab <command> ...``."""

from __future__ import annotations

import argparse
import sys
import time
from pathlib import Path

from . import __version__
from .baseline import run_baseline
from .embed import solve_embedding
from .experiment import ExperimentError, load_plan, run_experiment
from .generator import PRESETS, GeneratorConfig, generate_instance
from .instance import InvalidInstanceError
from .io import (DocumentError, read_edge_list, read_instance, read_results, read_solution,
                 write_instance, write_lp, write_plot_data, write_results, write_solution)
from .model import RAB_MODES, ROUTINGS, ModelConfig, build_model
from .solver.bnb import SolveParams, SolverError
from .verify import check_solution


def _emit(text: str, path: str | None) -> None:
    if path in (None, "-"):
        sys.stdout.write(text)
    else:
        Path(path).write_text(text)


def _instance(path: str):
    return read_instance(Path(path).read_text())


def _params(args) -> SolveParams:
    return SolveParams(gap=args.gap, time_limit=args.time_limit, node_limit=args.node_limit)


def _add_solve_flags(p, rab=True):
    p.add_argument("--routing", choices=ROUTINGS, default="single-path")
    if rab:
        p.add_argument("--rab", choices=RAB_MODES, default="integral")
    p.add_argument("--gap", type=float, default=0.01, help="relative gap target (default 0.01)")
    p.add_argument("--time-limit", type=float, default=3600.0, help="seconds (default 3600)")
    p.add_argument("--node-limit", type=int, default=None, help="branch-and-bound node budget")


def cmd_generate(args) -> int:
    if args.edge_list:
        spec = read_edge_list(Path(args.edge_list).read_text())
    else:
        spec = PRESETS[args.topology]
    cfg = GeneratorConfig(seed=args.seed, num_requests=args.requests, scale=args.scale,
                          profit=args.profit, min_vnodes=args.min_vnodes, max_vnodes=args.max_vnodes,
                          density=args.density)
    _emit(write_instance(generate_instance(spec, cfg)), args.output)
    return 0


def cmd_solve(args) -> int:
    inst = _instance(args.instance)
    cfg = ModelConfig(args.routing, args.rab)
    trace = sys.stderr if args.trace else None
    t0 = time.perf_counter()
    res = solve_embedding(inst, cfg, _params(args), trace=trace)
    seconds = time.perf_counter() - t0
    m = res.milp
    print(f"status={m.status} profit={m.objective:.10g} bound={m.bound:.10g} gap={m.gap:.6g} "
          f"nodes={m.nodes} seconds={seconds:.3f}", file=sys.stderr)
    if res.solution is not None:
        meta = {"routing": args.routing, "rab": args.rab, "status": m.status,
                "profit": m.objective, "bound": m.bound, "gap": m.gap}
        _emit(write_solution(res.solution, meta), args.output)
    return 0


def cmd_baseline(args) -> int:
    inst = _instance(args.instance)
    b = run_baseline(inst, args.routing, _params(args))
    print(f"baseline profit={b.profit:.10g} status={b.milp.status} "
          f"capacity-feasible={'yes' if b.feasible else 'no'}", file=sys.stderr)
    for kind, where in b.infeasible_resources:
        print(f"  covering exceeds capacity on {kind} {where}", file=sys.stderr)
    if b.solution is not None:
        meta = {"routing": args.routing, "rab": "baseline", "profit": b.profit,
                "capacity_feasible": b.feasible}
        _emit(write_solution(b.solution, meta), args.output)
    return 0


def cmd_verify(args) -> int:
    inst = _instance(args.instance)
    sol = read_solution(Path(args.solution).read_text(), inst)
    report = check_solution(inst, sol, args.routing, tol=args.tol, rab=args.rab)
    print(report)
    if report.ok:
        print(f"profit={sol.profit(inst):.10g}")
    return 0 if report.ok else 1


def cmd_export_lp(args) -> int:
    inst = _instance(args.instance)
    model, vm = build_model(inst, ModelConfig(args.routing, args.rab))
    _emit(write_lp(model, vm), args.output)
    return 0


def cmd_experiment(args) -> int:
    plan = load_plan(args.plan)
    progress = (lambda s: print(s, file=sys.stderr)) if args.verbose else None
    records = run_experiment(plan, progress)
    _emit(write_results(records, timing=not args.no_timing), args.output)
    if args.plot:
        Path(args.plot).write_text(write_plot_data(records))
    return 0


def cmd_plot_data(args) -> int:
    _emit(write_plot_data(read_results(Path(args.results).read_text())), args.output)
    return 0


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="vnerab", description="Offline VN embedding with rent-at-bulk rentals.")
    ap.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("generate", help="write a random instance")
    src = p.add_mutually_exclusive_group()
    src.add_argument("--topology", choices=sorted(PRESETS), default="ts10")
    src.add_argument("--edge-list", help="undirected 'u v' topology file")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--requests", type=int, default=10, help="Req")
    p.add_argument("--scale", type=float, default=0.4, help="Scal")
    p.add_argument("--profit", type=float, default=500.0)
    p.add_argument("--min-vnodes", type=int, default=2)
    p.add_argument("--max-vnodes", type=int, default=10)
    p.add_argument("--density", type=float, default=0.5)
    p.add_argument("-o", "--output")
    p.set_defaults(func=cmd_generate)

    p = sub.add_parser("solve", help="solve one instance in one configuration")
    p.add_argument("instance")
    _add_solve_flags(p)
    p.add_argument("--trace", action="store_true", help="per-node log on stderr")
    p.add_argument("-o", "--output")
    p.set_defaults(func=cmd_solve)

    p = sub.add_parser("baseline", help="rent-oblivious solve priced afterwards")
    p.add_argument("instance")
    _add_solve_flags(p, rab=False)
    p.add_argument("-o", "--output")
    p.set_defaults(func=cmd_baseline)

    p = sub.add_parser("verify", help="check a solution file against an instance")
    p.add_argument("instance")
    p.add_argument("solution")
    p.add_argument("--routing", choices=ROUTINGS, default="single-path")
    p.add_argument("--rab", choices=RAB_MODES, default="integral")
    p.add_argument("--tol", type=float, default=1e-6)
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("export-lp", help="write the model in LP-file format")
    p.add_argument("instance")
    p.add_argument("--routing", choices=ROUTINGS, default="single-path")
    p.add_argument("--rab", choices=RAB_MODES, default="integral")
    p.add_argument("-o", "--output")
    p.set_defaults(func=cmd_export_lp)

    p = sub.add_parser("experiment", help="run a plan file, write results CSV")
    p.add_argument("plan")
    p.add_argument("-o", "--output")
    p.add_argument("--plot", help="also write plot data CSV here")
    p.add_argument("--no-timing", action="store_true", help="omit the seconds column")
    p.add_argument("-v", "--verbose", action="store_true")
    p.set_defaults(func=cmd_experiment)

    p = sub.add_parser("plot-data", help="aggregate a results CSV into mean-profit curves")
    p.add_argument("results")
    p.add_argument("-o", "--output")
    p.set_defaults(func=cmd_plot_data)
    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (DocumentError, InvalidInstanceError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except (ExperimentError, SolverError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
