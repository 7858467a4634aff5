import pytest
from gmpy2 import mpq
from hypothesis import given, strategies as st

from conftest import rng_of, seeds
from oracles import frac, lp_cost, matching_cost
from tcspace import FiniteMetricSpace, TransportProblem, norm_molecule_combination, optimal_cost, optimal_plan
from tcspace.errors import DimensionMismatch, SamePoint
from tcspace.samples import five_point_space, random_metric_space
from tcspace.transport import witness_lower_bound


def random_problem(rng, space, support=4, max_mass=5):
    """Integer masses on at most ``support`` non-base points, completed at the basepoint."""
    pts = rng.sample(range(space.size), min(support, space.size))
    vals = [0] * space.size
    for p in pts:
        vals[p] = rng.randint(-max_mass, max_mass)
    return TransportProblem(space, tuple(vals))


def test_basepoint_completion():
    space = five_point_space()
    mu = TransportProblem.from_mass(space, {"1": 2, "3": -1})
    assert sum(mu.values) == 0
    assert mu.mass == {"0": -1, "1": 2, "3": -1}
    assert TransportProblem.delta(space, "0").is_zero()


def test_molecule_cost_and_plan():
    space = five_point_space()
    mu = TransportProblem.molecule(space, "3", "0")
    assert optimal_cost(space, mu) == 2
    assert optimal_plan(space, mu).to_json() == [["1", "3", "0"]]


def test_zero_problem():
    space = five_point_space()
    plan = optimal_plan(space, TransportProblem.zero(space))
    assert plan.moves == ()
    assert plan.cost(space) == 0


def test_single_source_ships_directly():
    space = five_point_space()
    mu = TransportProblem.from_mass(space, {"1": 2, "3": -1, "0": -1})
    assert optimal_cost(space, mu) == space.d("1", "3") + space.d("1", "0")


def test_crossing_supplies_pick_cheaper_pairing():
    # a, b on the left, c, d on the right; the crossed pairing a-d, b-c is cheaper
    D = [[0, 5, 9, 2], [5, 0, 2, 9], [9, 2, 0, 6], [2, 9, 6, 0]]
    space = FiniteMetricSpace.from_matrix("abcd", D)
    mu = TransportProblem.from_mass(space, {"a": 1, "b": 1, "c": -1, "d": -1})
    plan = optimal_plan(space, mu)
    assert sorted((m.source, m.target) for m in plan.moves) == [("a", "d"), ("b", "c")]
    assert plan.cost(space) == matching_cost(D, [1, 1, -1, -1]) == 4


def test_norm_molecule_combinations():
    space = FiniteMetricSpace.from_matrix("xyz", [[0, 1, 2], [1, 0, 1], [2, 1, 0]])
    assert norm_molecule_combination(space, {("x", "y"): 1}) == 1
    assert norm_molecule_combination(space, {("x", "y"): 1, ("y", "x"): 1}) == 0
    # y lies on a geodesic from x to z
    assert norm_molecule_combination(space, {("x", "y"): 1, ("y", "z"): 1}) == 2


def test_errors():
    space = five_point_space()
    with pytest.raises(SamePoint):
        TransportProblem.molecule(space, "1", "1")
    with pytest.raises(DimensionMismatch):
        TransportProblem(space, (1, 2))


@given(seeds, st.integers(min_value=2, max_value=7))
def test_matches_matching_oracle(seed, size):
    rng = rng_of(seed)
    space = random_metric_space(rng, size)
    # keep the support small so brute-force matching stays cheap
    vals = [0] * space.size
    pts = rng.sample(range(space.size), min(4, space.size))
    for p in pts[:-1]:
        vals[p] = rng.randint(-2, 2)
    vals[pts[-1]] = -sum(vals)
    mu = TransportProblem(space, tuple(vals))
    assert frac(optimal_cost(space, mu)) == matching_cost(space.dist, mu.values)


@given(seeds, st.integers(min_value=2, max_value=7))
def test_matches_linear_program(seed, size):
    rng = rng_of(seed)
    space = random_metric_space(rng, size)
    mu = random_problem(rng, space) * mpq(1, rng.randint(1, 4))
    assert float(optimal_cost(space, mu)) == pytest.approx(lp_cost(space.dist, mu.values), rel=1e-9, abs=1e-9)


@given(seeds, st.integers(min_value=2, max_value=7))
def test_plan_decomposes_problem(seed, size):
    rng = rng_of(seed)
    space = random_metric_space(rng, size)
    mu = random_problem(rng, space)
    plan = optimal_plan(space, mu)
    assert plan.as_problem(space) == mu
    pos = {space.points[i] for i, v in enumerate(mu.values) if v > 0}
    neg = {space.points[i] for i, v in enumerate(mu.values) if v < 0}
    assert all(m.source in pos and m.target in neg and m.amount > 0 for m in plan.moves)


@given(seeds, st.integers(min_value=2, max_value=7), st.fractions(min_value=-5, max_value=5, max_denominator=6))
def test_norm_axioms(seed, size, c):
    rng = rng_of(seed)
    space = random_metric_space(rng, size)
    mu, nu = random_problem(rng, space), random_problem(rng, space)
    n_mu = optimal_cost(space, mu)
    assert n_mu >= 0
    assert (n_mu == 0) == mu.is_zero()
    c = mpq(c.numerator, c.denominator)
    assert optimal_cost(space, mu * c) == abs(c) * n_mu
    assert optimal_cost(space, mu + nu) <= n_mu + optimal_cost(space, nu)


@given(seeds, st.integers(min_value=2, max_value=8))
def test_delta_is_isometry(seed, size):
    space = random_metric_space(rng_of(seed), size)
    for i, j in space.pairs():
        mu = TransportProblem.molecule(space, space.points[i], space.points[j])
        assert optimal_cost(space, mu) == space.dist[i][j]


@given(seeds, st.integers(min_value=2, max_value=7))
def test_lipschitz_witness_is_lower_bound(seed, size):
    rng = rng_of(seed)
    space = random_metric_space(rng, size)
    mu = random_problem(rng, space)
    assert witness_lower_bound(space, mu) <= optimal_cost(space, mu)
