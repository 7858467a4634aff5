"""Random and named instances shared by the demos, the CLI driver and the tests."""

from __future__ import annotations

import random

from gmpy2 import mpq

from .basis import StochasticBasis, tree_basis
from .metric import ONE, FiniteMetricSpace, VertexOrder, WeightedGraph, geodesic_metric


def five_point_space() -> FiniteMetricSpace:
    """Unit-weight graph: K4 on {1,2,3,4} plus edges 0-1 and 0-2."""
    edges = [("0", "1", 1), ("0", "2", 1)]
    edges += [(a, b, 1) for a in "1234" for b in "1234" if a < b]
    return geodesic_metric(WeightedGraph.from_edges("01234", edges))


def five_point_basis(space: FiniteMetricSpace | None = None) -> StochasticBasis:
    """b1 = δ1, b2 = δ2, b3 = δ3 − ½(δ1+δ2), b4 = δ4 − ½(δ1+δ2)."""
    space = five_point_space() if space is None else space
    half = mpq(1, 2)
    return StochasticBasis(
        VertexOrder.natural(space),
        [{0: ONE}, {0: ONE}, {1: half, 2: half}, {1: half, 2: half}],
    )


def random_tree_edges(rng: random.Random, size: int):
    """Random labelled tree: vertex v > 0 hangs from a uniform earlier vertex."""
    return [(rng.randrange(v), v) for v in range(1, size)]


def random_weight(rng: random.Random, max_num: int = 9, max_den: int = 3):
    return mpq(rng.randint(1, max_num), rng.randint(1, max_den))


def random_metric_space(rng: random.Random, size: int, extra_edges: int | None = None) -> FiniteMetricSpace:
    """Geodesic metric of a random connected graph with rational weights."""
    labels = [f"p{i}" for i in range(size)]
    edges = {}
    for u, v in random_tree_edges(rng, size):
        edges[(u, v)] = random_weight(rng)
    if extra_edges is None:
        extra_edges = rng.randint(0, size)
    for _ in range(extra_edges):
        u, v = rng.sample(range(size), 2) if size > 1 else (0, 0)
        if u != v:
            edges[(min(u, v), max(u, v))] = random_weight(rng)
    graph = WeightedGraph(tuple(labels), edges)
    return geodesic_metric(graph)


def random_tree_space(rng: random.Random, size: int):
    """(space, tree edges as label pairs) for a random weighted tree."""
    labels = [f"v{i}" for i in range(size)]
    tree = random_tree_edges(rng, size)
    graph = WeightedGraph(tuple(labels), {(u, v): random_weight(rng) for u, v in tree})
    return geodesic_metric(graph), [(labels[u], labels[v]) for u, v in tree]


def random_order(rng: random.Random, space: FiniteMetricSpace) -> VertexOrder:
    rest = [i for i in range(space.size) if i != space.basepoint]
    rng.shuffle(rest)
    return VertexOrder((space.basepoint, *rest), space.points)


def random_row(rng: random.Random, n: int, max_support: int | None = None) -> dict:
    """Random stochastic row over positions 0..n-1 with small integer weights."""
    k = rng.randint(1, n if max_support is None else min(n, max_support))
    support = rng.sample(range(n), k)
    weights = [rng.randint(1, 4) for _ in support]
    total = sum(weights)
    return {i: mpq(w, total) for i, w in zip(support, weights)}


def random_basis(rng: random.Random, space: FiniteMetricSpace, order: VertexOrder | None = None,
                 max_support: int | None = None) -> StochasticBasis:
    order = random_order(rng, space) if order is None else order
    rows = [{}] + [random_row(rng, n, max_support) for n in range(1, space.size)]
    return StochasticBasis(order, rows)


def random_molecular_tree_basis(rng: random.Random, size: int):
    """(space, basis, edges) for a random weighted tree and its molecular basis."""
    space, edges = random_tree_space(rng, size)
    return space, tree_basis(space, edges), edges
