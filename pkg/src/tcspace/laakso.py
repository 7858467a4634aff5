"""Laakso graphs and their explicit low-distortion stochastic basis.

Level 1 is the six-vertex gadget s-a, a-b, a-c, b-d, c-d, d-t. Level g
replaces every edge {u, v} of level g-1 by a copy of the gadget with s glued
to the endpoint whose label sorts first and t glued to the other. A vertex
created at level g is labelled ``<edge code><role>``, where the edge code is
the digit path of the replaced edge (one digit 0-5 per level, in the gadget's
edge order above) and the role is one of a, b, c, d.

Each new vertex n splits its mass over the endpoints of the replaced edge
e(n), the nearer endpoint taking the larger share: weights 3/4 and 1/4 for
roles a and d, 1/2 and 1/2 for roles b and c.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from gmpy2 import mpq

from .basis import StochasticBasis, _PairScorer, basis_distortion, basis_norms, dual_coefficients
from .errors import OrderViolation, TooLarge
from .guards import guard_k
from .metric import ONE, FiniteMetricSpace, VertexOrder, WeightedGraph, fmt, geodesic_metric
from .transport import TransportProblem

GADGET_VERTICES = ("s", "a", "b", "c", "d", "t")
GADGET_EDGES = (("s", "a"), ("a", "b"), ("a", "c"), ("b", "d"), ("c", "d"), ("d", "t"))
# in-copy distance of each inner role to the (source, target) endpoints
ROLE_DISTANCES = {"a": (1, 3), "b": (2, 2), "c": (2, 2), "d": (3, 1)}


@dataclass
class LaaksoGraph:
    k: int
    labels: list  # vertex id -> label, in construction order
    generation: list  # vertex id -> g(v)
    edges: dict  # level i -> list of oriented edges (source id, target id)
    edge_codes: dict  # level i -> list of digit codes, parallel to edges[i]
    edge_parent: dict  # vertex id with g >= 2 -> oriented replaced edge e(v)
    role: dict  # vertex id with g >= 2 -> "a" | "b" | "c" | "d"
    descent: dict  # oriented edge of level i >= 2 -> the level i-1 edge it lies in
    _index: dict = field(default=None, repr=False)

    def __post_init__(self):
        self._index = {label: v for v, label in enumerate(self.labels)}

    def vertex(self, label: str) -> int:
        return self._index[label]

    def level_vertices(self, i: int):
        return [v for v, g in enumerate(self.generation) if g <= i]

    def graph(self, level: int | None = None) -> WeightedGraph:
        level = self.k if level is None else level
        verts = self.level_vertices(level)
        local = {v: n for n, v in enumerate(verts)}
        return WeightedGraph(
            tuple(self.labels[v] for v in verts),
            {(local[u], local[w]): ONE for u, w in self.edges[level]},
        )


def laakso_vertex_count(k: int) -> int:
    return 2 + 4 * sum(6**i for i in range(k))


def _build(k: int) -> LaaksoGraph:
    labels = list(GADGET_VERTICES)
    generation = [1] * 6
    idx = {v: n for n, v in enumerate(labels)}
    edges = {1: [(idx[u], idx[v]) if u < v else (idx[v], idx[u]) for u, v in GADGET_EDGES]}
    codes = {1: [str(j) for j in range(6)]}
    edge_parent, role, descent = {}, {}, {}
    for g in range(2, k + 1):
        new_edges, new_codes = [], []
        for (u, w), code in zip(edges[g - 1], codes[g - 1]):
            copy = {"s": u, "t": w}
            for r in "abcd":
                v = len(labels)
                labels.append(f"{code}{r}")
                generation.append(g)
                edge_parent[v] = (u, w)
                role[v] = r
                copy[r] = v
            for j, (p, q) in enumerate(GADGET_EDGES):
                a, b = copy[p], copy[q]
                e = (a, b) if labels[a] < labels[b] else (b, a)
                new_edges.append(e)
                new_codes.append(f"{code}{j}")
                descent[e] = (u, w)
        edges[g], codes[g] = new_edges, new_codes
    return LaaksoGraph(k, labels, generation, edges, codes, edge_parent, role, descent)


def build_laakso(k: int, guard: int | None = None):
    """(LaaksoGraph, unit-weight geodesic metric of level k with basepoint s)."""
    limit = guard_k() if guard is None else guard
    if k < 1:
        raise ValueError("Laakso level must be at least 1")
    if k > limit:
        raise TooLarge(f"Laakso level {k} exceeds the guard k <= {limit}")
    lg = _build(k)
    space = geodesic_metric(lg.graph(), basepoint="s")
    return lg, space


def laakso_order(graph: LaaksoGraph, space: FiniteMetricSpace | None = None) -> VertexOrder:
    """Generation-monotone order: s, a, b, c, d, t, then each generation by label."""
    first = [graph.vertex(v) for v in GADGET_VERTICES]
    rest = sorted(range(6, len(graph.labels)), key=lambda v: (graph.generation[v], graph.labels[v]))
    points = tuple(graph.labels) if space is None else space.points
    return VertexOrder(tuple(first + rest), points)


def check_generation_monotone(graph: LaaksoGraph, order: VertexOrder) -> bool:
    gens = [graph.generation[v] for v in order.indices]
    return all(a <= b for a, b in zip(gens, gens[1:]))


def laakso_basis(graph: LaaksoGraph, order: VertexOrder) -> StochasticBasis:
    """Delta rows on level 1; two-point splits over e(n) above it."""
    if not check_generation_monotone(graph, order):
        raise OrderViolation("order is not generation-monotone")
    if graph.generation[order.point(0)] != 1:
        raise OrderViolation("order must start at a level-1 vertex")
    rows = [{}]
    for n in range(1, len(order)):
        v = order.point(n)
        if graph.generation[v] == 1:
            rows.append({0: ONE})
            continue
        source, target = graph.edge_parent[v]
        to_source, to_target = ROLE_DISTANCES[graph.role[v]]
        rows.append({
            order.position(source): mpq(to_target, 4),
            order.position(target): mpq(to_source, 4),
        })
    return StochasticBasis(order, rows)


def _level_spaces(graph: LaaksoGraph, space: FiniteMetricSpace):
    out = {graph.k: space}
    for i in range(1, graph.k):
        out[i] = geodesic_metric(graph.graph(i))
    return out


def check_edge_lengths(graph: LaaksoGraph, space: FiniteMetricSpace) -> list:
    """Edges (level, u, v) whose level-k distance differs from 4^(k - level)."""
    bad = []
    for i in range(1, graph.k + 1):
        want = 4 ** (graph.k - i)
        for u, w in graph.edges[i]:
            if space.dist[u][w] != want:
                bad.append((i, graph.labels[u], graph.labels[w]))
    return bad


def check_norm_bound(graph: LaaksoGraph, basis: StochasticBasis, space: FiniteMetricSpace) -> list:
    """Positions n with ‖b_n‖ > 4^(k + 1 - g(n))."""
    norms = basis_norms(basis, space)
    k = graph.k
    return [n for n in range(1, basis.N + 1) if norms[n] > 4 ** (k + 1 - graph.generation[basis.order.point(n)])]


def check_edge_parents(graph: LaaksoGraph) -> list:
    """Edges {n, m} of level j with g(n) < j where g(m) != j or n is not in e(m)."""
    bad = []
    gen = graph.generation
    for j in range(1, graph.k + 1):
        for u, w in graph.edges[j]:
            for n, m in ((u, w), (w, u)):
                if gen[n] < j and (gen[m] != j or n not in graph.edge_parent.get(m, ())):
                    bad.append((j, graph.labels[n], graph.labels[m]))
    return bad


@dataclass
class DescentDiagnostic:
    edge: tuple
    chain: list  # a_k, ..., a_1 as label pairs
    support_ok: bool
    value_ok: bool
    ambiguous: bool


def descent_diagnostics(graph: LaaksoGraph, basis: StochasticBasis, space: FiniteMetricSpace,
                        levels: dict | None = None) -> list:
    """Check the descent-chain description of dual coordinates of edge molecules.

    For each top-level edge {x, y} (x later in the order) the chain
    a_k = {x, y}, a_{i-1} = e(z) for the endpoint z of a_i created at level i
    is rebuilt from the construction records. Then every nonzero coordinate
    must sit on a_{g(n)} with e(n) = a_{g(n)-1}, and the endpoints n_i^+ and
    n_i^- carry ±4^(g - k). n_i^+ is the endpoint p of a_i minimising
    d(n_{i+1}^+, p) - d(n_{i+1}^-, p) in level i+1; ties are flagged as
    ambiguous instead of guessed.
    """
    k = graph.k
    order = basis.order
    levels = _level_spaces(graph, space) if levels is None else levels
    gen = graph.generation
    out = []
    for u, w in graph.edges[k]:
        x, y = (u, w) if order.position(u) > order.position(w) else (w, u)
        chain = {k: (x, y)}
        for i in range(k, 1, -1):
            a, b = chain[i]
            z = a if gen[a] == i else b
            chain[i - 1] = graph.edge_parent[z]
        alpha = dual_coefficients(basis, TransportProblem.molecule(space, graph.labels[x], graph.labels[y]))
        support_ok = True
        for n in range(1, basis.N + 1):
            if alpha[n]:
                v = order.point(n)
                g = gen[v]
                if v not in chain[g] or (g >= 2 and set(graph.edge_parent[v]) != set(chain[g - 1])):
                    support_ok = False
        plus, minus = {k: x}, {k: y}
        ambiguous = False
        for j in range(k - 1, 0, -1):
            p, q = chain[j]
            D = levels[j + 1]
            hi, lo = D.index(graph.labels[plus[j + 1]]), D.index(graph.labels[minus[j + 1]])
            # nearer to n_{j+1}^+ relative to n_{j+1}^-; a vertex shared with a_{j+1} keeps its sign
            dp = D.dist[hi][D.index(graph.labels[p])] - D.dist[lo][D.index(graph.labels[p])]
            dq = D.dist[hi][D.index(graph.labels[q])] - D.dist[lo][D.index(graph.labels[q])]
            if dp == dq:
                ambiguous = True
                break
            plus[j], minus[j] = (p, q) if dp < dq else (q, p)
        value_ok = True
        if not ambiguous:
            for j in range(1, k + 1):
                for v, sign in ((plus[j], 1), (minus[j], -1)):
                    n = order.position(v)
                    if n and alpha[n] != sign * mpq(4) ** (gen[v] - k):
                        value_ok = False
        out.append(DescentDiagnostic(
            (graph.labels[x], graph.labels[y]),
            [(graph.labels[chain[i][0]], graph.labels[chain[i][1]]) for i in range(k, 0, -1)],
            support_ok, value_ok, ambiguous,
        ))
    return out


def verify_laakso_bound(k: int, full_pairs: bool = True, workers: int = 1, guard: int | None = None) -> dict:
    """Distortion of the Laakso basis against 8k, with the structural checks."""
    graph, space = build_laakso(k, guard)
    order = laakso_order(graph, space)
    basis = laakso_basis(graph, order)
    scorer = _PairScorer(basis, space)
    bound = 8 * k
    edge_max = max(scorer.weighted_sum(u, w) for u, w in graph.edges[k])  # edges have length 1
    if full_pairs:
        result = basis_distortion(basis, space, workers=workers)
    else:
        result = basis_distortion(basis, space, pairs=graph.edges[k], workers=workers)
    lower = mpq(3 * k - 5, 8)
    diagnostics = descent_diagnostics(graph, basis, space)
    edge_len = check_edge_lengths(graph, space)
    norms_bad = check_norm_bound(graph, basis, space)
    parents_bad = check_edge_parents(graph)
    diameter = space.diameter()
    checks = {
        "vertex_count": len(graph.labels) == laakso_vertex_count(k),
        "diameter": diameter == 4**k,
        "edge_lengths": not edge_len,
        "norm_bound": not norms_bad,
        "edge_parents": not parents_bad,
        "edge_sweep": edge_max <= bound,
        "distortion_upper": result.value <= bound,
        "distortion_lower": result.value >= max(ONE, lower),
        "descent_support": all(d.support_ok for d in diagnostics),
        "descent_values": all(d.value_ok for d in diagnostics if not d.ambiguous),
    }
    return {
        "k": k,
        "vertices": len(graph.labels),
        "edges": len(graph.edges[k]),
        "diameter": fmt(diameter),
        "pairs_scanned": result.count,
        "full_pairs": full_pairs,
        "distortion": fmt(result.value),
        "witness": list(result.pair),
        "bound": bound,
        "lower_bound": fmt(lower),
        "edge_sweep_max": fmt(edge_max),
        "descent_edges": len(diagnostics),
        "descent_ambiguous": sum(d.ambiguous for d in diagnostics),
        "failures": {
            "edge_lengths": edge_len[:10],
            "norm_bound": norms_bad[:10],
            "edge_parents": parents_bad[:10],
            "descent": [d.edge for d in diagnostics if not (d.support_ok and (d.value_ok or d.ambiguous))][:10],
        },
        "checks": checks,
        "passed": all(checks.values()),
    }
