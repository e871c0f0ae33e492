"""Command-line interface.

Subcommands: validate, distance, farthest, diameter, approx, fixture.
Reports are JSON on stdout (or --json FILE); human summaries go to stderr.
Exit codes: 0 success, 1 input/validation error, 2 numeric failure or
BudgetExceeded without --allow-partial.
"""

from __future__ import annotations

import argparse
import json
import os
import sys

from . import errors
from .geometry import dump_domain, load_domain, locate_point
from .engine import build_visibility_graph, corner_distances, point_distance, \
    enumerate_shortest_paths
from .farthest import farthest_point
from .solver import CaseLabel, SolverConfig, compute_diameter
from .approx import build_grid_oracle, grid_approx, oracle_diameter, two_approx
from .fixtures import make_fixture
from .svg import RenderSpec, render_svg


def _parse_point(text: str):
    x, y = text.split(",")
    return float(x), float(y)


def _emit(report: dict, json_path: str | None):
    text = json.dumps(report, indent=2, sort_keys=True)
    if json_path:
        with open(json_path, "w") as f:
            f.write(text + "\n")
    else:
        print(text)


def _threads() -> int:
    try:
        return int(os.environ.get("GEODIAM_THREADS", "0"))
    except ValueError:
        return 0


def run_cli(argv=None) -> int:
    parser = argparse.ArgumentParser(prog="geodiam",
                                     description="geodesic diameter of "
                                                 "polygonal domains")
    sub = parser.add_subparsers(dest="cmd", required=True)

    p = sub.add_parser("validate", help="validate a domain file")
    p.add_argument("file")

    p = sub.add_parser("distance", help="two-point geodesic distance")
    p.add_argument("file")
    p.add_argument("--s", required=True, type=_parse_point)
    p.add_argument("--t", required=True, type=_parse_point)
    p.add_argument("--paths", action="store_true",
                   help="enumerate all shortest paths")
    p.add_argument("--json", dest="json_path")

    p = sub.add_parser("farthest", help="farthest point from a source")
    p.add_argument("file")
    p.add_argument("--from", dest="source", required=True, type=_parse_point)
    p.add_argument("--json", dest="json_path")

    p = sub.add_parser("diameter", help="geodesic diameter")
    p.add_argument("file")
    p.add_argument("--cases", default="auto",
                   help="auto or comma-separated subset of vv,vb,vi,bb,bi,ii")
    p.add_argument("--budget", type=int, default=20000)
    p.add_argument("--verify-grid", type=int, default=0, metavar="RES")
    p.add_argument("--allow-partial", action="store_true")
    p.add_argument("--json", dest="json_path")
    p.add_argument("--svg", dest="svg_path")

    p = sub.add_parser("approx", help="approximate diameter")
    p.add_argument("file")
    p.add_argument("--eps", type=float, default=0.25)
    p.add_argument("--mode", choices=("two", "grid"), default="grid")
    p.add_argument("--json", dest="json_path")

    p = sub.add_parser("fixture", help="write a fixture domain file")
    p.add_argument("name")
    p.add_argument("params", nargs="*", help="key=value fixture parameters")
    p.add_argument("--out", required=True)

    args = parser.parse_args(argv)
    try:
        return _dispatch(args)
    except (errors.DegenerateChain, errors.SelfIntersectingChain,
            errors.HoleOutsideOuter, errors.HolesOverlap,
            errors.PointOutsideDomain, errors.UnknownFixture,
            errors.InfeasibleParams, errors.InvalidEps,
            FileNotFoundError, json.JSONDecodeError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except errors.GeodiamError as exc:
        print(f"numeric failure: {exc}", file=sys.stderr)
        return 2


def _dispatch(args) -> int:
    if args.cmd == "validate":
        dom = load_domain(args.file)
        _emit({"schema": "geodiam/1", "valid": True, "n": dom.n, "h": dom.h},
              None)
        print(f"valid domain: n={dom.n} h={dom.h}", file=sys.stderr)
        return 0

    if args.cmd == "fixture":
        params = {}
        for kv in args.params:
            k, _, v = kv.partition("=")
            params[k] = float(v) if "." in v else int(v)
        dom = make_fixture(args.name, params)
        with open(args.out, "w") as f:
            json.dump(dump_domain(dom), f)
        report = {"schema": "geodiam/1", "fixture": args.name,
                  "n": dom.n, "h": dom.h}
        report.update({k: v for k, v in dom.metadata.items()
                       if not k.startswith("_")})
        _emit(report, None)
        return 0

    dom = load_domain(args.file)
    graph = build_visibility_graph(dom)
    table = corner_distances(graph)

    if args.cmd == "distance":
        res = point_distance(dom, table, args.s, args.t)
        report = {"schema": "geodiam/1", "distance": res.distance,
                  "via_corners": list(res.path)}
        if args.paths:
            ps = enumerate_shortest_paths(dom, table, args.s, args.t)
            report["path_count"] = ps.count
            report["paths"] = [list(p) for p in ps.paths]
            report["ties_detected"] = ps.ties_detected
        _emit(report, args.json_path)
        print(f"d = {res.distance:.6f}", file=sys.stderr)
        return 0

    if args.cmd == "farthest":
        fr = farthest_point(dom, table, args.source)
        _emit({"schema": "geodiam/1", "distance": fr.distance,
               "point": [fr.point.x, fr.point.y], "kind": fr.kind},
              args.json_path)
        print(f"farthest {fr.distance:.6f} at ({fr.point.x:.6f}, "
              f"{fr.point.y:.6f})", file=sys.stderr)
        return 0

    if args.cmd == "diameter":
        cases = args.cases if args.cases == "auto" \
            else [c.strip() for c in args.cases.split(",") if c.strip()]
        config = SolverConfig(cases=cases, budget=args.budget,
                              threads=_threads())
        result = compute_diameter(dom, config, table=table)
        report = result.to_report()
        if args.verify_grid:
            oracle = build_grid_oracle(dom, args.verify_grid)
            value, bound = oracle_diameter(oracle)
            report["grid_oracle"] = {
                "resolution": args.verify_grid,
                "value": value,
                "error_bound": bound,
                "agrees": bool(abs(value - result.diameter) <= bound),
            }
        _emit(report, args.json_path)
        if args.svg_path:
            overlays = RenderSpec(layers=("domain", "holes", "paths", "pair"))
            if result.pairs:
                best = result.pairs[0]
                overlays.pair = ((best.s.x, best.s.y), (best.t.x, best.t.y))
                ps = enumerate_shortest_paths(dom, table, best.s, best.t)
                polys = []
                for path in ps.paths:
                    pts = [(best.s.x, best.s.y)]
                    pts += [tuple(dom.corner_xy[i]) for i in path]
                    pts.append((best.t.x, best.t.y))
                    polys.append(pts)
                overlays.paths = polys
            with open(args.svg_path, "w") as f:
                f.write(render_svg(dom, overlays))
        print(f"diameter = {result.diameter:.6f} "
              f"case={result.case.value if result.case else '?'} "
              f"complete={result.complete}", file=sys.stderr)
        if not result.complete and not args.allow_partial:
            print("enumeration budget exceeded (rerun with --allow-partial "
                  "to accept partial results)", file=sys.stderr)
            return 2
        return 0

    if args.cmd == "approx":
        if args.mode == "two":
            res = two_approx(dom, table, dom.corners[0])
        else:
            res = grid_approx(dom, args.eps, table)
        _emit({"schema": "geodiam/1", "mode": args.mode, "value": res.value,
               "guarantee": res.guarantee, "eps": res.eps,
               "cell_size": res.cell_size,
               "pair": [[res.pair[0].x, res.pair[0].y],
                        [res.pair[1].x, res.pair[1].y]]}, args.json_path)
        print(f"approx value = {res.value:.6f} ({res.guarantee})",
              file=sys.stderr)
        return 0

    raise AssertionError(f"unhandled command {args.cmd}")


def main() -> None:
    sys.exit(run_cli())


if __name__ == "__main__":
    main()
