"""Finite hyperbolic approximations of a sampled metric space and their radial basis.

Balls are closed and evaluated over the finite sample: B(x, R) is the set of
sample points within R of x. Layer i is a greedy r^i-net. Two net points of
the same layer are joined horizontally when their λr^i-balls share a sample
point. A point y of layer i+1 is joined radially to x of layer i when
B(y, λr^(i+1)) ⊆ B(x, λr^i). The radial neighbours N(y) are those x.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from gmpy2 import mpq

from .basis import StochasticBasis, _PairScorer, basis_distortion, basis_norms
from .errors import DimensionMismatch, DisconnectedGraph, EmptyRadialNeighbourhood, NotConnected, ParameterOutOfRange
from .metric import ONE, FiniteMetricSpace, VertexOrder, WeightedGraph, fmt, geodesic_metric, rational

FLOAT_TOL = 1e-12


def _le(a, b, exact: bool) -> bool:
    return a <= b if exact else a <= b + FLOAT_TOL


def epsilon_net(space: FiniteMetricSpace, eps) -> tuple:
    """Greedy maximal eps-separated subset, scanning points by index."""
    if not eps > 0:
        raise ParameterOutOfRange(f"net radius must be positive, got {eps}")
    exact = space.exact
    D = space.dist
    net = []
    for p in range(space.size):
        # separated means d >= eps, so p is skipped when some net point is closer than eps
        if all(not (D[p][q] < eps if exact else D[p][q] < eps - FLOAT_TOL) for q in net):
            net.append(p)
    return tuple(net)


def ball(space: FiniteMetricSpace, x: int, radius, within=None) -> frozenset:
    """Closed ball around point x, optionally restricted to the subset ``within``."""
    row = space.dist[x]
    pool = range(space.size) if within is None else within
    return frozenset(p for p in pool if _le(row[p], radius, space.exact))


@dataclass
class HyperbolicApprox:
    base: FiniteMetricSpace
    lam: object
    r: object
    k: int
    layers: dict  # i -> tuple of base point indices (the net L_i)
    vertices: list  # vertex id -> (layer, base point)
    horizontal: list  # (u, v) vertex ids in the same layer, u < v
    radial: list  # (lower, upper) vertex ids, lower in L_i and upper in L_{i+1}
    neighbours: dict  # vertex id in layers > -k -> tuple of radial neighbours one layer down
    space: FiniteMetricSpace  # unit-weight geodesic metric of G_k

    def radius(self, i: int):
        return self.lam * self.r**i

    def vertex_label(self, v: int) -> str:
        i, p = self.vertices[v]
        return f"L{i}:{self.base.points[p]}"

    def layer_vertices(self, i: int) -> list:
        return [v for v, (j, _) in enumerate(self.vertices) if j == i]


def _parameter(value, exact):
    return rational(value) if exact else float(value)


def build_hyperbolic(space: FiniteMetricSpace, lam=2, r=mpq(1, 8), k: int = 1) -> HyperbolicApprox:
    exact = space.exact
    lam, r = _parameter(lam, exact), _parameter(r, exact)
    if lam < 2:
        raise ParameterOutOfRange(f"lambda must be at least 2, got {fmt(lam)}")
    if not (0 < r < mpq(1, 6)):
        raise ParameterOutOfRange(f"r must lie in (0, 1/6), got {fmt(r)}")
    if k < 1 or not (1 / r) ** k > space.diameter():
        raise ParameterOutOfRange(f"k={k} must satisfy (1/r)^k > diam = {fmt(space.diameter())}")

    layers = {i: epsilon_net(space, r**i) for i in range(-k, k + 1)}
    vertices = [(i, p) for i in range(-k, k + 1) for p in layers[i]]
    vid = {vp: v for v, vp in enumerate(vertices)}
    balls = {(i, p): ball(space, p, lam * r**i) for i in layers for p in layers[i]}

    horizontal = []
    for i, net in layers.items():
        for a, p in enumerate(net):
            for q in net[a + 1 :]:
                if balls[(i, p)] & balls[(i, q)]:
                    horizontal.append((vid[(i, p)], vid[(i, q)]))
    radial, neighbours = [], {}
    for i in range(-k, k):
        for y in layers[i + 1]:
            inner = balls[(i + 1, y)]
            down = tuple(vid[(i, x)] for x in layers[i] if inner <= balls[(i, x)])
            neighbours[vid[(i + 1, y)]] = down
            radial.extend((u, vid[(i + 1, y)]) for u in down)

    labels = tuple(f"L{i}:{space.points[p]}" for i, p in vertices)
    graph = WeightedGraph(labels, {e: ONE for e in horizontal + radial})
    try:
        metric = geodesic_metric(graph)
    except DisconnectedGraph as exc:
        raise NotConnected(f"hyperbolic approximation graph is disconnected: {exc}") from exc
    return HyperbolicApprox(space, lam, r, k, layers, vertices, horizontal, radial, neighbours, metric)


def hyperbolic_order(approx: HyperbolicApprox) -> VertexOrder:
    """Layer-monotone order; vertices are already stored by (layer, point index)."""
    return VertexOrder(tuple(range(len(approx.vertices))), approx.space.points)


def radial_basis(approx: HyperbolicApprox) -> StochasticBasis:
    """b_x = δ_x − (1/|N(x)|) Σ_{y∈N(x)} δ_y for every vertex above the root layer."""
    order = hyperbolic_order(approx)
    rows = [{}]
    for v in order.indices[1:]:
        down = approx.neighbours.get(v, ())
        if not down:
            raise EmptyRadialNeighbourhood(f"vertex {approx.vertex_label(v)} has no radial neighbour")
        w = mpq(1, len(down))  # the graph metric is integral, so rows stay exact even for float samples
        rows.append({order.position(u): w for u in down})
    return StochasticBasis(order, rows)


@dataclass(frozen=True)
class HomogeneityReport:
    C_used: object  # max |B_{L_i}(x, λr^i)| / |B_{L_i}(x, λr^i(1−3r))| over layers and sample points
    D_est: int  # greedy half-radius cover count, maximised over sample balls
    bound_via_doubling: float  # 1 + 2·D·λ^{log₂ D}
    witness: tuple  # (layer, point label) attaining C_used

    @property
    def doubling_homogeneity(self) -> float:
        """D·λ^{log₂ D}, the homogeneity constant a doubling space is guaranteed."""
        return (self.bound_via_doubling - 1) / 2

    def to_json(self) -> dict:
        return {
            "C_used": fmt(self.C_used),
            "C_used_is_lower_estimate": True,
            "D_est": self.D_est,
            "doubling_homogeneity": self.doubling_homogeneity,
            "bound_via_doubling": self.bound_via_doubling,
            "witness": list(self.witness),
        }


def greedy_cover_count(space: FiniteMetricSpace, center: int, radius) -> int:
    """Number of radius/2 balls (centred anywhere in the sample) greedy set cover uses for B(center, radius)."""
    target = set(ball(space, center, radius))
    half = radius / 2
    candidates = [ball(space, c, half) for c in range(space.size)]
    count = 0
    while target:
        best = max(candidates, key=lambda b: len(b & target))
        target -= best
        count += 1
    return count


def doubling_estimate(space: FiniteMetricSpace) -> int:
    radii = sorted({space.dist[i][j] for i, j in space.pairs()})
    if not radii:
        return 1
    return max(greedy_cover_count(space, x, R) for x in range(space.size) for R in radii)


def homogeneity_constant(approx: HyperbolicApprox) -> HomogeneityReport:
    space, lam, r = approx.base, approx.lam, approx.r
    best, witness = ONE if space.exact else 1.0, None
    for i, net in approx.layers.items():
        outer, inner = lam * r**i, lam * r**i * (1 - 3 * r)
        for x in range(space.size):
            num = len(ball(space, x, outer, net))
            den = len(ball(space, x, inner, net))
            value = mpq(num, den) if space.exact else num / den
            if witness is None or value > best:
                best, witness = value, (i, space.points[x])
    D = doubling_estimate(space)
    bound = 1 + 2 * D * float(lam) ** math.log2(D)
    return HomogeneityReport(best, D, bound, witness)


def _order_sign(order: VertexOrder, u: int, v: int):
    """(later, earlier) endpoints of an edge under the basis order."""
    return (u, v) if order.position(u) > order.position(v) else (v, u)


def edge_measure(approx: HyperbolicApprox, order: VertexOrder, u: int, v: int) -> dict:
    """μ on the layer below a horizontal edge {u, v}, with unit coefficient and later endpoint positive."""
    hi, lo = _order_sign(order, u, v)
    mu = {}
    for w, sign in ((hi, 1), (lo, -1)):
        down = approx.neighbours.get(w, ())
        share = mpq(sign, len(down))
        for n in down:
            mu[n] = mu.get(n, 0) + share
    return {n: c for n, c in mu.items() if c}


def check_ball_identities(approx: HyperbolicApprox) -> dict:
    """Compare N(x) with B_{L_i}(x, λr^i(1−r)), and B_{L_i}(x, λr^i(1−3r)) with N(y) across horizontal edges."""
    space, lam, r = approx.base, approx.lam, approx.r
    point = {v: p for v, (_, p) in enumerate(approx.vertices)}
    vertex_of = {(i, p): v for v, (i, p) in enumerate(approx.vertices)}
    equal_fail, ball_in_n_fail, n_in_ball_fail, cross_fail = [], [], [], []
    for v, down in approx.neighbours.items():
        i = approx.vertices[v][0] - 1
        radius = lam * r**i * (1 - r)
        near = {vertex_of[(i, p)] for p in ball(space, point[v], radius, approx.layers[i])}
        got = set(down)
        if near != got:
            equal_fail.append(approx.vertex_label(v))
        if not near <= got:
            ball_in_n_fail.append(approx.vertex_label(v))
        if not got <= near:
            n_in_ball_fail.append(approx.vertex_label(v))
    for u, v in approx.horizontal:
        i = approx.vertices[u][0] - 1
        if i < -approx.k:
            continue
        radius = lam * r**i * (1 - 3 * r)
        for a, b in ((u, v), (v, u)):
            near = {vertex_of[(i, p)] for p in ball(space, point[a], radius, approx.layers[i])}
            if not near <= set(approx.neighbours[b]):
                cross_fail.append((approx.vertex_label(a), approx.vertex_label(b)))
    return {
        "radial_equals_ball": equal_fail,
        "ball_within_radial": ball_in_n_fail,
        "radial_within_ball": n_in_ball_fail,
        "shrunk_ball_within_neighbour": cross_fail,
    }


def check_edge_measures(approx: HyperbolicApprox, order: VertexOrder, C) -> dict:
    """For every horizontal edge above the root layer: support is a clique and |μ| ≤ 2 − 2/C."""
    adjacent = set(approx.horizontal) | {(v, u) for u, v in approx.horizontal}
    clique_fail, tv_fail, tv_max = [], [], 0
    cap = 2 - 2 / C
    for u, v in approx.horizontal:
        if approx.vertices[u][0] == -approx.k:
            continue
        mu = edge_measure(approx, order, u, v)
        support = sorted(mu)
        if any((a, b) not in adjacent for x, a in enumerate(support) for b in support[x + 1 :]):
            clique_fail.append((approx.vertex_label(u), approx.vertex_label(v)))
        tv = sum(abs(c) for c in mu.values())
        tv_max = max(tv_max, tv)
        if not _le(tv, cap, approx.base.exact):
            tv_fail.append((approx.vertex_label(u), approx.vertex_label(v)))
    return {"clique": clique_fail, "total_variation": tv_fail, "total_variation_max": tv_max}


def verify_hyperbolic_bound(approx: HyperbolicApprox, workers: int = 1) -> dict:
    basis = radial_basis(approx)
    space = approx.space
    exact = approx.base.exact
    homog = homogeneity_constant(approx)
    C = homog.C_used
    bound = 1 + 2 * C
    result = basis_distortion(basis, space, workers=workers)
    scorer = _PairScorer(basis, space)
    edges = approx.horizontal + approx.radial
    sweep = {e: scorer.weighted_sum(*e) for e in edges}
    sweep_max = max(sweep.values(), default=0)
    norms = basis_norms(basis, space)
    balls = check_ball_identities(approx)
    measures = check_edge_measures(approx, basis.order, C)
    checks = {
        "distortion_bound": _le(result.value, bound, exact),
        "edge_sweep": _le(sweep_max, bound, exact),
        "unit_norms": all(norms[n] == 1 for n in range(1, basis.N + 1)) if exact
        else all(abs(norms[n] - 1) <= FLOAT_TOL for n in range(1, basis.N + 1)),
        "radial_ball_identity": not balls["radial_equals_ball"],
        "shrunk_ball_inclusion": not balls["shrunk_ball_within_neighbour"],
        "edge_measure_clique": not measures["clique"],
        "edge_measure_total_variation": not measures["total_variation"],
        "doubling_consistency": float(C) <= (homog.bound_via_doubling - 1) / 2 + 1e-9,
    }
    return {
        "base_points": approx.base.size,
        "lambda": fmt(approx.lam),
        "r": fmt(approx.r),
        "k": approx.k,
        "layer_sizes": {str(i): len(net) for i, net in sorted(approx.layers.items())},
        "vertices": len(approx.vertices),
        "horizontal_edges": len(approx.horizontal),
        "radial_edges": len(approx.radial),
        "distortion": fmt(result.value),
        "witness": list(result.pair),
        "pairs_scanned": result.count,
        "bound": fmt(bound),
        "homogeneity": homog.to_json(),
        "edge_sweep_max": fmt(sweep_max),
        "edge_measure_total_variation_max": fmt(measures["total_variation_max"]),
        "failures": {**{k: v[:10] for k, v in balls.items()},
                     "edge_measure_clique": measures["clique"][:10],
                     "edge_measure_total_variation": measures["total_variation"][:10]},
        "checks": checks,
        "passed": checks["distortion_bound"],
    }


def points_space(coords, metric: str = "l1", exact: bool = True, labels=None) -> FiniteMetricSpace:
    """Sample of R^d under the l1 or linf norm."""
    pts = [tuple(rational(c) if exact else float(c) for c in p) for p in coords]
    if not pts:
        raise ParameterOutOfRange("need at least one point")
    dims = {len(p) for p in pts}
    if len(dims) != 1:
        raise DimensionMismatch(f"points have mixed dimensions {sorted(dims)}")
    if metric == "l1":
        norm = lambda a, b: sum((abs(s - t) for s, t in zip(a, b)), 0 * a[0])
    elif metric == "linf":
        norm = lambda a, b: max(abs(s - t) for s, t in zip(a, b))
    else:
        raise ParameterOutOfRange(f"unknown coordinate metric {metric!r}")
    labels = [f"p{i}" for i in range(len(pts))] if labels is None else labels
    matrix = [[norm(a, b) for b in pts] for a in pts]
    return FiniteMetricSpace.from_matrix(labels, matrix, exact=exact)


def singleton_instance() -> FiniteMetricSpace:
    return points_space([("0", "0")])


def two_point_instance() -> FiniteMetricSpace:
    return points_space([("0",), ("1",)])


def grid_instance(side: int = 4, spacing=mpq(3, 4)) -> FiniteMetricSpace:
    """side × side grid in the l1 plane. Spacing 3/4 keeps radial neighbourhoods equal to the shrunk balls."""
    spacing = rational(spacing)
    coords = [(spacing * a, spacing * b) for a in range(side) for b in range(side)]
    return points_space(coords, "l1")
