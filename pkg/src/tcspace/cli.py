"""Command-line entry point ``tcs``.

Exit status: 0 when every requested verification passes, 1 when one fails,
2 on bad input or parameters (with a JSON error object on stderr).
"""

from __future__ import annotations

import argparse
import csv
import io as _stdio
import json
import os
import sys
from dataclasses import dataclass, field
from pathlib import Path

from . import acceptance
from .basis import _PairScorer, basis_distortion, pair_distortion, search_basis
from .errors import InputError, TCSError
from .hyperbolic import build_hyperbolic, points_space, verify_hyperbolic_bound
from .io import basis_from_json, basis_to_json, coords_from_json, dumps, graph_to_json, mu_from_json, read_json, space_from_json
from .laakso import build_laakso, verify_laakso_bound
from .metric import fmt, rational, validate_metric
from .transport import optimal_plan
from .tree_prob import min_expected_distortion_report


@dataclass
class RunConfig:
    subcommand: str
    args: argparse.Namespace
    out: str | None = None
    format: str = "json"
    guard_n: int | None = None
    guard_k: int | None = None
    seed: int = 0
    workers: int = field(default_factory=lambda: os.cpu_count() or 1)


def _emit(config: RunConfig, data, csv_rows=None) -> None:
    if config.format == "csv" and csv_rows is not None:
        buf = _stdio.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerows(csv_rows)
        text = buf.getvalue()
    else:
        text = dumps(data)
    if config.out:
        Path(config.out).write_text(text)
    else:
        sys.stdout.write(text)


def _pair(text: str):
    parts = text.split(",")
    if len(parts) != 2:
        raise InputError(f"--pair expects 'x,y', got {text!r}")
    return parts[0].strip(), parts[1].strip()


def _graph_edges(space, data: dict):
    """Index pairs of the input edge list, or of the minimal graph generating a distance matrix."""
    if "edges" in data:
        out = set()
        for u, v, _ in data["edges"]:
            i = u if isinstance(u, int) else space.index(u)
            j = v if isinstance(v, int) else space.index(v)
            out.add((min(i, j), max(i, j)))
        return sorted(out)
    D = space.dist
    return [(i, j) for i, j in space.pairs()
            if not any(D[i][k] + D[k][j] == D[i][j] for k in range(space.size) if k not in (i, j))]


def cmd_metric_validate(config: RunConfig) -> bool:
    space = space_from_json(read_json(config.args.space))
    report = validate_metric(space)
    rows = [[v.kind, " ".join(space.points[i] for i in v.indices)] for v in report.violations]
    _emit(config, {"ok": report.ok, "points": space.size, "violations": [
        {"kind": v.kind, "points": [space.points[i] for i in v.indices]} for v in report.violations
    ]}, [["kind", "points"]] + rows)
    return report.ok


def cmd_oc(config: RunConfig) -> bool:
    space = space_from_json(read_json(config.args.space))
    mu = mu_from_json(space, read_json(config.args.mu))
    plan = optimal_plan(space, mu)
    _emit(config, {"cost": fmt(plan.cost(space)), "plan": plan.to_json()},
          [["amount", "source", "target"]] + plan.to_json())
    return True


def cmd_basis_distortion(config: RunConfig) -> bool:
    a = config.args
    data = read_json(a.space)
    space = space_from_json(data)
    basis = basis_from_json(space, read_json(a.basis))
    if a.pair:
        x, y = _pair(a.pair)
        _emit(config, {"pair": [x, y], "pair_distortion": fmt(pair_distortion(basis, space, x, y))})
        return True
    pairs = _graph_edges(space, data) if a.edges_only else None
    result = basis_distortion(basis, space, pairs=pairs, workers=config.workers)
    if a.dump:
        scorer = _PairScorer(basis, space)
        with open(a.dump, "w", newline="") as fh:
            writer = csv.writer(fh, lineterminator="\n")
            writer.writerow(["x", "y", "d", "weighted_sum", "ratio"])
            for i, j in space.pairs() if pairs is None else pairs:
                s, d = scorer.weighted_sum(i, j), space.dist[i][j]
                writer.writerow([space.points[i], space.points[j], fmt(d), fmt(s), fmt(s / d)])
    _emit(config, {"distortion": fmt(result.value), "witness": list(result.pair),
                   "pairs_scanned": result.count, "edges_only": bool(a.edges_only)})
    return True


def cmd_basis_search(config: RunConfig) -> bool:
    a = config.args
    space = space_from_json(read_json(a.space))
    basis = search_basis(space, a.budget, seed=config.seed)
    result = basis_distortion(basis, space)
    _emit(config, {"budget": a.budget, "seed": config.seed, "distortion": fmt(result.value),
                   "witness": list(result.pair), "basis": basis_to_json(basis),
                   "note": "heuristic search; the value is an upper bound, not the minimum"})
    return True


def cmd_treeprob(config: RunConfig) -> bool:
    a = config.args
    space = space_from_json(read_json(a.space))
    basis = basis_from_json(space, read_json(a.basis))
    pairs = None
    if a.pair:
        x, y = _pair(a.pair)
        i, j = sorted((space.index(x), space.index(y)))
        pairs = [(i, j)]
    rows = min_expected_distortion_report(basis, space, a.mode, pairs)
    ok = all(r.effective == r.pair_distortion for r in rows)
    header = ["pair", "d", "pair_distortion", "E_effective", "E_product", "pi_independent"]
    table = [[f"{r.pair[0]},{r.pair[1]}", fmt(r.d), fmt(r.pair_distortion), fmt(r.effective),
              "" if r.product is None else fmt(r.product), "" if r.pi_independent is None else str(r.pi_independent).lower()]
             for r in rows]
    if a.report:
        config.format = a.report
    _emit(config, {"mode": a.mode, "effective_equals_coordinate_sum": ok, "rows": [dict(zip(header, t)) for t in table]},
          [header] + table)
    return ok


def cmd_laakso(config: RunConfig) -> bool:
    a = config.args
    full = a.full_pairs or a.k <= 3
    report = verify_laakso_bound(a.k, full_pairs=full, workers=config.workers, guard=config.guard_k)
    if a.export_graph:
        graph, space = build_laakso(a.k, config.guard_k)
        Path(a.export_graph).write_text(dumps(graph_to_json(graph.graph(), space.basepoint)))
    _emit(config, report)
    return report["passed"]


def cmd_hyper(config: RunConfig) -> bool:
    a = config.args
    data = read_json(a.points)
    if a.metric == "matrix":
        space = space_from_json(data)
    else:
        space = points_space(coords_from_json(data), a.metric)
    approx = build_hyperbolic(space, rational(a.lam), rational(a.r), a.k)
    report = verify_hyperbolic_bound(approx, workers=config.workers)
    _emit(config, report)
    return report["passed"]


def cmd_reproduce(config: RunConfig) -> bool:
    a = config.args
    if not config.out:
        raise InputError("reproduce needs --out DIR for the report files")
    out = Path(config.out)
    out.mkdir(parents=True, exist_ok=True)
    results = acceptance.run_all(config.seed, quick=a.quick, workers=config.workers,
                                 progress=lambda r: print(r.line(), flush=True))
    for r in results:
        (out / f"criterion_{r.number:02d}.json").write_text(dumps({**r.to_json(), "seed": config.seed, "quick": a.quick}))
    summary = {"seed": config.seed, "quick": a.quick, "passed": all(r.passed for r in results),
               "criteria": [{"criterion": r.number, "name": r.name, "passed": r.passed} for r in results]}
    (out / "summary.json").write_text(dumps(summary))
    with open(out / "summary.csv", "w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["criterion", "name", "passed"])
        writer.writerows([r.number, r.name, str(r.passed).lower()] for r in results)
    return summary["passed"]


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--out", help="write the report here instead of stdout")
    common.add_argument("--format", choices=["json", "csv"], default="json")
    common.add_argument("--seed", type=int, default=0)
    common.add_argument("--workers", type=int, default=None, help="parallel processes (default: all cores)")
    common.add_argument("--guard-n", type=int, default=None, help="largest N for tree enumeration")
    common.add_argument("--guard-k", type=int, default=None, help="largest Laakso level")

    p = argparse.ArgumentParser(prog="tcs", description="Exact transportation cost space computations.")
    sub = p.add_subparsers(dest="command", required=True)

    metric = sub.add_parser("metric", help="metric-space utilities").add_subparsers(dest="action", required=True)
    mv = metric.add_parser("validate", parents=[common], help="check the metric axioms")
    mv.add_argument("--space", required=True)
    mv.set_defaults(func=cmd_metric_validate)

    oc = sub.add_parser("oc", parents=[common], help="optimal transport cost and plan")
    oc.add_argument("--space", required=True)
    oc.add_argument("--mu", required=True)
    oc.set_defaults(func=cmd_oc)

    basis = sub.add_parser("basis", help="stochastic bases").add_subparsers(dest="action", required=True)
    bd = basis.add_parser("distortion", parents=[common], help="l1 distortion of a basis")
    bd.add_argument("--space", required=True)
    bd.add_argument("--basis", required=True)
    bd.add_argument("--pair", help="x,y: report a single pair")
    bd.add_argument("--edges-only", action="store_true", help="scan graph edges only")
    bd.add_argument("--dump", help="write per-pair CSV here")
    bd.set_defaults(func=cmd_basis_distortion)
    bs = basis.add_parser("search", parents=[common], help="heuristic low-distortion basis search")
    bs.add_argument("--space", required=True)
    bs.add_argument("--budget", type=int, default=200)
    bs.set_defaults(func=cmd_basis_search)

    tp = sub.add_parser("treeprob", parents=[common], help="effective charge and product expectations")
    tp.add_argument("--space", required=True)
    tp.add_argument("--basis", required=True)
    tp.add_argument("--pair")
    tp.add_argument("--mode", choices=["enumerate", "paths"], default="enumerate")
    tp.add_argument("--report", choices=["json", "csv"], default=None)
    tp.set_defaults(func=cmd_treeprob)

    la = sub.add_parser("laakso", parents=[common], help="verify the Laakso distortion bound")
    la.add_argument("--k", type=int, required=True)
    la.add_argument("--full-pairs", action="store_true", help="scan all pairs even for k > 3")
    la.add_argument("--export-graph", help="write the graph as an edge-list space file")
    la.set_defaults(func=cmd_laakso)

    hy = sub.add_parser("hyper", parents=[common], help="verify the hyperbolic approximation bound")
    hy.add_argument("--points", required=True)
    hy.add_argument("--metric", choices=["l1", "linf", "matrix"], default="l1")
    hy.add_argument("--lambda", dest="lam", default="2")
    hy.add_argument("--r", default="1/8")
    hy.add_argument("--k", type=int, default=1)
    hy.set_defaults(func=cmd_hyper)

    rp = sub.add_parser("reproduce", parents=[common], help="run every acceptance criterion")
    rp.add_argument("--quick", action="store_true", help="edges only for Laakso k = 3")
    rp.set_defaults(func=cmd_reproduce)
    return p


def run(config: RunConfig) -> int:
    """Dispatch one subcommand; guard flags override the environment for this call only."""
    saved = {}
    try:
        for name, value in (("TCS_GUARD_N", config.guard_n), ("TCS_GUARD_K", config.guard_k)):
            if value is not None:
                if value <= 0:
                    raise InputError(f"{name.lower()} must be positive")
                saved[name] = os.environ.get(name)
                os.environ[name] = str(value)
        return 0 if config.args.func(config) else 1
    finally:
        for name, value in saved.items():
            if value is None:
                os.environ.pop(name, None)
            else:
                os.environ[name] = value


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    config = RunConfig(
        subcommand=args.command, args=args, out=args.out, format=args.format,
        guard_n=args.guard_n, guard_k=args.guard_k, seed=args.seed,
        workers=args.workers or os.cpu_count() or 1,
    )
    try:
        return run(config)
    except (TCSError, ValueError, ArithmeticError) as exc:
        payload = exc.payload() if isinstance(exc, TCSError) else {"error": "invalid_input", "message": str(exc)}
        sys.stderr.write(json.dumps(payload, sort_keys=True) + "\n")
        return 2


if __name__ == "__main__":
    sys.exit(main())
