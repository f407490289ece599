"""Command line front end.

Subcommands:
  reduce  shrink an instance, write the reduced file and the event log
  solve   prove an optimum and optionally write the solution file
  bounds  quick lower/upper bounds without branching
  check   validate a solution file against an instance
  bench   solve a directory of instances, one CSV row per file

Exit codes: 0 success, 1 usage error (bad flags or subcommand),
2 infeasible instance, unreadable input, or failed solution check.
"""

from __future__ import annotations

import argparse
import csv
import glob
import logging
import os
import sys
import time
from multiprocessing import Pool

from .bnb import exact_solve
from .events import serialize_events
from .model import InfeasibleError, ValidationError, evaluate_cost, tree_from_edges
from .reduce import reduce_loop
from .stpio import ParseError, parse_solution, parse_stp, write_solution, write_stp

log = logging.getLogger("steinred.cli")

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_BAD_INPUT = 2


def _setup_logging() -> None:
    level = os.environ.get("STEINRED_LOG_LEVEL", "WARNING").upper()
    logging.basicConfig(
        stream=sys.stderr,
        level=getattr(logging, level, logging.WARNING),
        format="%(levelname)s %(name)s: %(message)s",
    )


def _load(path: str):
    with open(path, "r", encoding="utf-8") as fh:
        return parse_stp(fh.read())


def _cmd_reduce(args) -> int:
    inst = _load(args.instance)
    nv0, ne0 = inst.n_alive_vertices(), inst.n_alive_edges()
    res = reduce_loop(
        inst, probes=args.probes, max_rounds=args.rounds, edge_budget=args.budget
    )
    out = res.instance
    print(f"vertices {nv0} -> {out.n_alive_vertices()}")
    print(f"edges {ne0} -> {out.n_alive_edges()}")
    print(f"offset {inst.offset:.6f} -> {out.offset:.6f}")
    print(f"LB {res.lower_bound:.6f}")
    print(f"UB {res.upper_bound:.6f}")
    print(f"events {len(res.events)}")
    if args.out:
        with open(args.out, "w", encoding="utf-8") as fh:
            fh.write(write_stp(out))
    if args.log:
        with open(args.log, "w", encoding="utf-8") as fh:
            fh.write(serialize_events(res.source_fingerprint, res.events))
    return EXIT_OK


def _cmd_solve(args) -> int:
    inst = _load(args.instance)
    t0 = time.perf_counter()
    res = exact_solve(
        inst, node_limit=args.node_limit, time_limit=args.time_limit
    )
    dt = time.perf_counter() - t0
    print(f"LB {res.stats.lower_bound:.6f}")
    print(f"UB {res.value:.6f}")
    print(f"nodes {res.stats.nodes}")
    print(f"optimal {'true' if res.stats.optimal else 'false'}")
    print(f"time {dt:.6f}")
    if args.sol:
        with open(args.sol, "w", encoding="utf-8") as fh:
            fh.write(write_solution(inst, res.tree))
    return EXIT_OK


def _cmd_bounds(args) -> int:
    inst = _load(args.instance)
    res = reduce_loop(inst, probes=0, max_rounds=1)
    print(f"LB {res.lower_bound:.6f}")
    print(f"UB {res.upper_bound:.6f}")
    return EXIT_OK


def _cmd_check(args) -> int:
    inst = _load(args.instance)
    with open(args.sol, "r", encoding="utf-8") as fh:
        declared, vertices, pairs = parse_solution(fh.read())
    edges = []
    for u, v in pairs:
        e = inst.find_edge(u, v)
        if e is None:
            print(f"invalid: no edge between vertices {u + 1} and {v + 1}")
            return EXIT_BAD_INPUT
        edges.append(e)
    try:
        tree = tree_from_edges(inst, edges, extra_vertices=sorted(vertices))
        value = evaluate_cost(inst, tree)
    except ValidationError as exc:
        print(f"invalid: {exc}")
        return EXIT_BAD_INPUT
    print(f"value {value:.6f}")
    if declared is not None and abs(value - declared) > 1e-6:
        print(
            f"invalid: declared value {declared:.6f} "
            f"does not match recomputed {value:.6f}"
        )
        return EXIT_BAD_INPUT
    print("valid")
    return EXIT_OK


def _bench_one(job):
    path, time_limit = job
    name = os.path.basename(path)
    try:
        with open(path, "r", encoding="utf-8") as fh:
            inst = parse_stp(fh.read())
        nv, ne = inst.n_alive_vertices(), inst.n_alive_edges()
        t0 = time.perf_counter()
        res = exact_solve(inst, time_limit=time_limit)
        dt = time.perf_counter() - t0
        return {
            "name": name,
            "vertices": nv,
            "edges": ne,
            "lb": f"{res.stats.lower_bound:.6f}",
            "ub": f"{res.value:.6f}",
            "time": f"{dt:.6f}",
            "nodes": res.stats.nodes,
            "reductions": sum(res.stats.reductions.values()),
        }
    except (ParseError, ValidationError, InfeasibleError, OSError) as exc:
        return {
            "name": name,
            "vertices": "",
            "edges": "",
            "lb": "",
            "ub": "",
            "time": "",
            "nodes": "",
            "reductions": f"error: {exc}",
        }


def _cmd_bench(args) -> int:
    paths = sorted(glob.glob(os.path.join(args.dir, "*.stp")))
    if not paths:
        raise OSError(f"no .stp files under {args.dir!r}")
    jobs = [(path, args.time_limit) for path in paths]
    if args.jobs > 1:
        with Pool(args.jobs) as pool:
            rows = pool.map(_bench_one, jobs)
    else:
        rows = [_bench_one(job) for job in jobs]
    fields = ["name", "vertices", "edges", "lb", "ub", "time", "nodes", "reductions"]
    sink = open(args.csv, "w", newline="", encoding="utf-8") if args.csv else sys.stdout
    try:
        writer = csv.DictWriter(sink, fieldnames=fields)
        writer.writeheader()
        writer.writerows(rows)
    finally:
        if args.csv:
            sink.close()
    return EXIT_OK


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="steinred",
        description="Reductions and exact solving for prize-collecting Steiner trees.",
        epilog="Exit codes: 0 ok, 1 usage error, 2 bad input or failed check.",
    )
    parser.add_argument(
        "--seed",
        type=int,
        default=None,
        help="reserved; the pipeline is deterministic and ignores it",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("reduce", help="shrink an instance")
    p.add_argument("--in", dest="instance", required=True, metavar="X.stp")
    p.add_argument("--out", help="write the reduced instance here")
    p.add_argument("--log", help="write the reduction event log here")
    p.add_argument(
        "--budget",
        type=int,
        default=None,
        help="relaxation budget per walk search (default 10x edge count)",
    )
    p.add_argument("--probes", type=int, default=10)
    p.add_argument("--rounds", type=int, default=50)
    p.set_defaults(func=_cmd_reduce)

    p = sub.add_parser("solve", help="prove an optimum")
    p.add_argument("--in", dest="instance", required=True, metavar="X.stp")
    p.add_argument("--sol", help="write the solution file here")
    p.add_argument("--time-limit", type=float, default=None, metavar="S")
    p.add_argument("--node-limit", type=int, default=None)
    p.set_defaults(func=_cmd_solve)

    p = sub.add_parser("bounds", help="quick bounds without branching")
    p.add_argument("--in", dest="instance", required=True, metavar="X.stp")
    p.set_defaults(func=_cmd_bounds)

    p = sub.add_parser("check", help="validate a solution file")
    p.add_argument("--in", dest="instance", required=True, metavar="X.stp")
    p.add_argument("--sol", required=True, metavar="S.sol")
    p.set_defaults(func=_cmd_check)

    p = sub.add_parser("bench", help="solve a directory of instances, emit CSV")
    p.add_argument("--dir", required=True, metavar="D")
    p.add_argument("--csv", help="write rows here instead of stdout")
    p.add_argument("--jobs", type=int, default=1)
    p.add_argument("--time-limit", type=float, default=None, metavar="S")
    p.set_defaults(func=_cmd_bench)
    return parser


def main(argv=None) -> int:
    _setup_logging()
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        # argparse exits 2 on usage problems and 0 for --help
        return EXIT_OK if exc.code == 0 else EXIT_USAGE
    try:
        return args.func(args)
    except (ParseError, OSError, InfeasibleError, ValidationError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_BAD_INPUT


if __name__ == "__main__":
    sys.exit(main())
