from fractions import Fraction

import pytest
from gmpy2 import mpq
from hypothesis import given, strategies as st

from conftest import rng_of, seeds
from oracles import frac, nx_distances
from tcspace import FiniteMetricSpace, VertexOrder, WeightedGraph, geodesic_metric, rational, validate_metric
from tcspace.errors import DimensionMismatch, DisconnectedGraph, OrderViolation, UnknownPoint
from tcspace.laakso import build_laakso
from tcspace.metric import complete_graph, fmt
from tcspace.samples import five_point_space, random_metric_space, random_weight


def test_path_graph_distance():
    space = geodesic_metric(WeightedGraph.from_edges("012", [("0", "1", 1), ("1", "2", 1)]))
    assert space.d("0", "2") == 2


def test_five_point_distances():
    space = five_point_space()
    assert space.d("0", "3") == 2
    assert space.d("3", "4") == 1


def test_laakso_one_diameter():
    _, space = build_laakso(1)
    assert space.diameter() == 4


def test_validate_clean_matrix():
    space = FiniteMetricSpace.from_matrix("abc", [[0, 1, 2], [1, 0, 1], [2, 1, 0]])
    assert validate_metric(space).ok


def test_validate_triangle_violation():
    space = FiniteMetricSpace.from_matrix("abc", [[0, 1, 5], [1, 0, 1], [5, 1, 0]])
    report = validate_metric(space)
    assert not report.ok
    tri = report.by_kind("triangle")
    assert len(tri) == 1
    assert sorted(tri[0].indices) == [0, 1, 2]


def test_validate_asymmetry():
    space = FiniteMetricSpace.from_matrix("abc", [[0, 1, 2], [1, 0, 1], [3, 1, 0]])
    report = validate_metric(space)
    assert {v.kind for v in report.violations} >= {"symmetry"}


def test_rational_parsing():
    assert rational("3/4") == mpq(3, 4)
    assert rational(2) == 2
    assert fmt(mpq(6, 4)) == "3/2"
    assert fmt(mpq(4, 2)) == "2"


def test_disconnected_graph_raises():
    with pytest.raises(DisconnectedGraph):
        geodesic_metric(WeightedGraph.from_edges("abc", [("a", "b", 1)]))


def test_unknown_label():
    with pytest.raises(UnknownPoint):
        five_point_space().index("9")


def test_order_must_start_at_basepoint():
    space = five_point_space()
    with pytest.raises(OrderViolation):
        VertexOrder.from_labels(space, ["1", "0", "2", "3", "4"])
    with pytest.raises(DimensionMismatch):
        VertexOrder.from_labels(space, ["0", "1"])


@given(seeds, st.integers(min_value=2, max_value=9))
def test_geodesic_matches_networkx(seed, size):
    rng = rng_of(seed)
    edges = [(i, rng.randrange(i), random_weight(rng)) for i in range(1, size)]
    edges += [(rng.randrange(size), rng.randrange(size), random_weight(rng)) for _ in range(size)]
    edges = [(u, v, w) for u, v, w in edges if u != v]
    labels = [str(i) for i in range(size)]
    space = geodesic_metric(WeightedGraph.from_edges(labels, [(labels[u], labels[v], w) for u, v, w in edges]))
    expected = nx_distances(size, edges)
    assert [[frac(x) for x in row] for row in space.dist] == expected


@given(seeds, st.integers(min_value=2, max_value=8))
def test_geodesic_output_is_metric_and_idempotent(seed, size):
    space = random_metric_space(rng_of(seed), size)
    assert validate_metric(space).ok
    again = geodesic_metric(complete_graph(space), basepoint=space.points[space.basepoint])
    assert again.dist == space.dist


@given(seeds, st.integers(min_value=2, max_value=8))
def test_methods_agree(seed, size):
    space = random_metric_space(rng_of(seed), size)
    graph = complete_graph(space)
    ref = geodesic_metric(graph, method="floyd").dist
    assert geodesic_metric(graph, method="dijkstra").dist == ref


def test_float_mode_distances():
    graph = WeightedGraph.from_edges("abc", [("a", "b", 0.5), ("b", "c", 0.25)], exact=False)
    space = geodesic_metric(graph)
    assert not space.exact
    assert space.d("a", "c") == pytest.approx(0.75)
    assert isinstance(space.d("a", "c"), float)
    assert Fraction(space.d("a", "c")) == Fraction(3, 4)
