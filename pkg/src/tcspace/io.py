"""JSON readers and writers for spaces, measures, bases and point samples.

Rationals travel as ``"p/q"`` strings. Basis rows are keyed by order
positions: ``{"n": 3, "coeffs": {"1": "1/2", "2": "1/2"}}`` means
λ_{3,1} = λ_{3,2} = 1/2.
"""

from __future__ import annotations

import json
from pathlib import Path

from .basis import StochasticBasis
from .errors import InputError
from .metric import FiniteMetricSpace, VertexOrder, WeightedGraph, fmt, geodesic_metric, rational
from .transport import TransportProblem


def read_json(path) -> dict:
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise InputError(f"cannot read {path}: {exc.strerror}") from exc
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise InputError(f"{path}: invalid JSON at line {exc.lineno} column {exc.colno}: {exc.msg}") from exc
    if not isinstance(data, dict):
        raise InputError(f"{path}: expected a JSON object at top level")
    return data


def _require(data: dict, key: str, where: str):
    if key not in data:
        raise InputError(f"{where}: missing key {key!r}")
    return data[key]


def _rational(value, where: str):
    try:
        return rational(value)
    except (ValueError, TypeError) as exc:
        raise InputError(f"{where}: {exc}") from exc


def space_from_json(data: dict) -> FiniteMetricSpace:
    """Either an edge list (geodesic metric) or a full distance matrix."""
    points = [str(p) for p in _require(data, "points", "space")]
    basepoint = data.get("basepoint", 0)
    if isinstance(basepoint, int) and not 0 <= basepoint < len(points):
        raise InputError(f"space.basepoint: index {basepoint} out of range")
    base = points[basepoint] if isinstance(basepoint, int) else str(basepoint)
    if "dist" in data:
        matrix = [[_rational(v, "space.dist") for v in row] for row in data["dist"]]
        return FiniteMetricSpace(tuple(points), tuple(tuple(r) for r in matrix)).relabel_basepoint(base)
    edges = _require(data, "edges", "space")
    triples = []
    for e in edges:
        if not isinstance(e, list) or len(e) != 3:
            raise InputError(f"space.edges: expected [u, v, weight], got {e!r}")
        triples.append((e[0], e[1], _rational(e[2], "space.edges")))
    graph = WeightedGraph.from_edges(points, triples)
    return geodesic_metric(graph, basepoint=base)


def space_to_json(space: FiniteMetricSpace) -> dict:
    return {
        "points": list(space.points),
        "dist": [[fmt(v) for v in row] for row in space.dist],
        "basepoint": space.basepoint,
    }


def graph_to_json(graph: WeightedGraph, basepoint: int = 0) -> dict:
    return {
        "points": list(graph.vertices),
        "edges": [[i, j, fmt(w)] for (i, j), w in sorted(graph.edges.items())],
        "basepoint": basepoint,
    }


def mu_from_json(space: FiniteMetricSpace, data: dict) -> TransportProblem:
    mass = _require(data, "mass", "mu")
    if not isinstance(mass, dict):
        raise InputError("mu.mass: expected an object mapping labels to rationals")
    return TransportProblem.from_mass(space, {k: _rational(v, f"mu.mass[{k}]") for k, v in mass.items()})


def basis_from_json(space: FiniteMetricSpace, data: dict) -> StochasticBasis:
    order = VertexOrder.from_labels(space, [str(x) for x in _require(data, "order", "basis")])
    rows = [{} for _ in range(space.size)]
    rho = None
    for entry in _require(data, "rows", "basis"):
        n = int(_require(entry, "n", "basis.rows"))
        if not 1 <= n < space.size:
            raise InputError(f"basis.rows: position {n} out of range 1..{space.N}")
        rows[n] = {int(i): _rational(c, f"basis.rows[{n}]") for i, c in _require(entry, "coeffs", "basis.rows").items()}
        if "rho" in entry:
            rho = rho or [1] * space.size
            rho[n] = _rational(entry["rho"], f"basis.rows[{n}].rho")
    missing = [n for n in range(1, space.size) if not rows[n]]
    if missing:
        raise InputError(f"basis.rows: no row for positions {missing}")
    return StochasticBasis(order, rows, rho)


def basis_to_json(basis: StochasticBasis) -> dict:
    out = []
    for n in range(1, basis.N + 1):
        row = {"n": n, "coeffs": {str(i): fmt(c) for i, c in sorted(basis.rows[n].items())}}
        if basis.rho[n] != 1:
            row["rho"] = fmt(basis.rho[n])
        out.append(row)
    return {"order": list(basis.order.labels()), "rows": out}


def coords_from_json(data: dict) -> list:
    coords = _require(data, "coords", "points")
    return [[_rational(c, "points.coords") for c in p] for p in coords]


def write_json(path, data) -> None:
    Path(path).write_text(dumps(data))


def dumps(data) -> str:
    return json.dumps(data, indent=2, sort_keys=True) + "\n"
