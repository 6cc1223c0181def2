"""Command-line interface: solve, normalize, dsg, and bench subcommands.

Exit codes for `solve`: 0 feasible, 2 infeasibility certified,
3 undetermined, 1 usage or I/O error.  Output is reproducible by default;
pass --timings to include wall-clock measurements (which breaks
byte-identity across runs).
"""

from __future__ import annotations

import argparse
import sys
import time

from .densest import DsgConfig, binary_search_density
from .errors import DomainError, ParseError, ShapeError
from .generate import random_instance
from .instance import normalize, validate
from .io import (column_map_document, load_graph, load_instance,
                 report_document, save_instance, to_canonical_json,
                 trace_csv_lines, format_float)
from .solver import SolveStatus, SolverConfig, solve

_STATUS_EXIT = {
    SolveStatus.FEASIBLE: 0,
    SolveStatus.INFEASIBLE_CERTIFIED: 2,
    SolveStatus.UNDETERMINED: 3,
}


def _fail(message: str) -> int:
    print(f"error: {message}", file=sys.stderr)
    return 1


def cmd_solve(args) -> int:
    try:
        inst = load_instance(args.input)
    except OSError as exc:
        return _fail(str(exc))
    except (ParseError, DomainError, ShapeError) as exc:
        return _fail(str(exc))
    try:
        cfg = SolverConfig(eps=args.eps, delta=args.delta,
                           max_iters=args.max_iters)
        report = solve(inst, cfg)
    except (DomainError, ShapeError) as exc:
        return _fail(str(exc))
    if args.trace:
        try:
            with open(args.trace, "w", encoding="utf-8") as fh:
                fh.write("\n".join(trace_csv_lines(report)) + "\n")
        except OSError as exc:
            return _fail(str(exc))
    if args.output == "json":
        print(to_canonical_json(report_document(report,
                                                include_timings=args.timings)),
              end="")
    else:
        print(f"status: {report.status.value}")
        print(f"iterations: {report.iterations} / budget {report.budget}")
        if report.gap_final is not None:
            print(f"final gap: {report.gap_final:.6g}")
        if report.reason:
            print(f"note: {report.reason}")
        if report.x is not None:
            print("x:", " ".join(format_float(v) for v in report.x))
        if report.certificate is not None:
            y, z = report.certificate
            print(f"certificate space: {report.certificate_space}")
            print("y:", " ".join(format_float(v) for v in y))
            print("z:", " ".join(format_float(v) for v in z))
        if args.timings:
            print(f"wall time: {report.wall_time:.3f}s")
    return _STATUS_EXIT[report.status]


def cmd_normalize(args) -> int:
    try:
        inst = load_instance(args.input)
    except (OSError, ParseError, DomainError, ShapeError) as exc:
        return _fail(str(exc))
    val = validate(inst)
    if not val.ok:
        # emit an empty instance plus a sidecar carrying the verdict
        doc = {"n_original": inst.n, "columns": [], "eliminated": {},
               "trivially_feasible": None, "trivially_infeasible": True,
               "reason": val.infeasible_reason, "box_packing_rows": [],
               "notes": val.notes}
        try:
            with open(args.output, "w", encoding="utf-8") as fh:
                fh.write("MPC 0 0 0 0 0\n")
            with open(args.map, "w", encoding="utf-8") as fh:
                fh.write(to_canonical_json(doc))
        except OSError as exc:
            return _fail(str(exc))
        print(f"instance is infeasible: {val.infeasible_reason}")
        return 0
    try:
        norm = normalize(val.instance)
    except (DomainError, ShapeError) as exc:
        return _fail(str(exc))
    trivial = norm.trivially_feasible is not None or norm.trivially_infeasible
    try:
        if trivial:
            with open(args.output, "w", encoding="utf-8") as fh:
                fh.write("MPC 0 0 0 0 0\n")
        else:
            save_instance(norm.instance, args.output)
        with open(args.map, "w", encoding="utf-8") as fh:
            fh.write(to_canonical_json(column_map_document(norm)))
    except OSError as exc:
        return _fail(str(exc))
    if norm.trivially_infeasible:
        print(f"instance is infeasible: {norm.infeasible_reason}")
    elif norm.trivially_feasible is not None:
        print("instance is feasible after preprocessing; solution in the map file")
    else:
        inner = norm.instance
        print(f"normalized: {inner.n} columns, {inner.num_packing} packing rows "
              f"({len(norm.box_packing_rows)} from the box), "
              f"{inner.num_covering} covering rows")
    return 0


def cmd_dsg(args) -> int:
    try:
        graph = load_graph(args.graph,
                           warn=lambda msg: print(f"warning: {msg}", file=sys.stderr))
    except (OSError, ParseError, DomainError) as exc:
        return _fail(str(exc))
    if graph.m == 0:
        return _fail("graph has no edges")
    try:
        result = binary_search_density(graph, args.eps, DsgConfig())
    except DomainError as exc:
        return _fail(str(exc))
    if args.output == "json":
        doc = {
            "density_low": result.density_low,
            "density_high": result.density_high,
            "eps": args.eps,
            "vertices": graph.vertex_count,
            "edges": graph.m,
            "probes": [
                {"d": pr.d, "status": pr.status, "iterations": pr.iterations,
                 "oracle_rounds": pr.oracle_rounds,
                 "matvec_calls": pr.matvec_calls,
                 **({"wall_time_s": pr.wall_time} if args.timings else {})}
                for pr in result.probes
            ],
            "note": result.note,
        }
        print(to_canonical_json(doc), end="")
    else:
        print(f"density in [{result.density_low:.6g}, {result.density_high:.6g}] "
              f"(ratio {result.density_high / result.density_low:.4f})")
        print(f"probes: {len(result.probes)}")
        for pr in result.probes:
            line = (f"  D={pr.d:.6g}: {pr.status} after {pr.iterations} iterations, "
                    f"{pr.matvec_calls} matvecs")
            if args.timings:
                line += f", {pr.wall_time:.3f}s"
            print(line)
        if result.note:
            print(f"note: {result.note}")
    return 0


def cmd_bench(args) -> int:
    if args.suite != "random":
        return _fail(f"unknown suite {args.suite!r}")
    try:
        sizes = [int(tok) for tok in args.n.split(",") if tok]
        eps_list = [float(tok) for tok in args.eps.split(",") if tok]
    except ValueError:
        return _fail("--n and --eps must be comma-separated numbers")
    if not sizes or not eps_list:
        return _fail("--n and --eps must be nonempty")
    rows = ["n,p,c,nnz,width,eps,iterations,oracle_rounds,matvec_count,wall_time"]
    for idx, n in enumerate(sizes):
        row_nnz = max(1, round(args.density * n))
        inst = random_instance(args.seed + idx, n, n, n, feasible=True,
                               row_nnz=row_nnz)
        for eps in eps_list:
            cfg = SolverConfig(eps=eps, early_exit=False, trace_every=0)
            t0 = time.perf_counter()
            report = solve(inst, cfg)
            wall = time.perf_counter() - t0
            rows.append(",".join([
                str(n), str(n), str(n), str(inst.nnz), str(inst.width()),
                format_float(eps), str(report.iterations),
                str(report.oracle_rounds), str(report.matvec_calls),
                format_float(wall if args.timings else 0.0),
            ]))
    try:
        with open(args.out, "w", encoding="utf-8") as fh:
            fh.write("\n".join(rows) + "\n")
    except OSError as exc:
        return _fail(str(exc))
    print(f"wrote {len(rows) - 1} rows to {args.out}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="packcover",
        description="Feasibility solver for mixed packing-covering LPs")
    sub = parser.add_subparsers(dest="command", required=True)

    sp = sub.add_parser("solve", help="decide eps-feasibility of an instance file")
    sp.add_argument("--input", required=True)
    sp.add_argument("--eps", type=float, required=True)
    sp.add_argument("--delta", type=float, default=None)
    sp.add_argument("--max-iters", type=int, default=None, dest="max_iters")
    sp.add_argument("--trace", default=None, help="write a t,gap,envelope CSV here")
    sp.add_argument("--output", choices=("json", "text"), default="json")
    sp.add_argument("--timings", action="store_true",
                    help="include wall-clock times (breaks reproducibility)")
    sp.set_defaults(func=cmd_solve)

    np_ = sub.add_parser("normalize", help="width-reduce an instance file")
    np_.add_argument("--input", required=True)
    np_.add_argument("--output", required=True)
    np_.add_argument("--map", default=None,
                     help="sidecar column-map JSON (default: <output>.map.json)")
    np_.set_defaults(func=cmd_normalize)

    dp = sub.add_parser("dsg", help="bracket the maximum subgraph density")
    dp.add_argument("--graph", required=True)
    dp.add_argument("--eps", type=float, required=True)
    dp.add_argument("--output", choices=("json", "text"), default="json")
    dp.add_argument("--timings", action="store_true")
    dp.set_defaults(func=cmd_dsg)

    bp = sub.add_parser("bench", help="run the seeded random suite, emit CSV")
    bp.add_argument("--suite", default="random")
    bp.add_argument("--n", required=True, help="comma-separated sizes")
    bp.add_argument("--density", type=float, default=0.5,
                    help="per-row nonzeros as a fraction of n")
    bp.add_argument("--eps", required=True, help="comma-separated tolerances")
    bp.add_argument("--seed", type=int, default=0)
    bp.add_argument("--out", required=True)
    bp.add_argument("--timings", action="store_true",
                    help="record real wall times (breaks reproducibility)")
    bp.set_defaults(func=cmd_bench)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return 1 if exc.code not in (0, None) else 0
    if getattr(args, "command", None) == "normalize" and args.map is None:
        args.map = args.output + ".map.json"
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
