from fractions import Fraction

import pytest
from gmpy2 import mpq
from hypothesis import given, strategies as st

import oracles as O
from conftest import rng_of, seeds
from tcspace import (
    CompatibleTree,
    StochasticBasis,
    VertexOrder,
    basis_distortion,
    basis_norms,
    enumerate_trees,
    meeting_point,
    tree_basis,
    tree_distance,
)
from tcspace.basis import alpha_recursion
from tcspace.errors import TooLarge
from tcspace.samples import random_basis, random_metric_space, random_tree_space
from tcspace.tree_prob import (
    TreeDistribution,
    _chains_between,
    charge_state,
    check_compatible,
    check_independent,
    edge_marginals,
    effective_charge,
    expected_distortion,
    expected_tree_distance,
    min_expected_distortion_report,
    product_probability,
    side_tables,
)
from tcspace.trees import count_trees


class Instance:
    def __init__(self, space, basis):
        self.space = space
        self.basis = StochasticBasis(basis.order.check(space), basis.rows)  # order carries the labels


def random_instance(seed, size):
    rng = rng_of(seed)
    space = random_metric_space(rng, size)
    return rng, Instance(space, random_basis(rng, space))


def coordinate_sum(basis, space, x, y):
    """Σ|α(n)| ‖b_n‖ for δ_F(x) − δ_F(y), with α from the dense oracle solve."""
    order, rows = list(basis.order.indices), [{i: O.frac(l) for i, l in r.items()} for r in basis.rows]
    mass = [0] * space.size
    mass[order[x]], mass[order[y]] = 1, -1
    alpha = O.duals(order, rows, mass)
    norms = basis_norms(basis, space)
    return sum((abs(a) * O.frac(norms[n + 1]) for n, a in enumerate(alpha)), Fraction(0))


def brute_independent(p, x, y):
    """(x,y)-independence straight from the definition, over every s > t."""
    N = p.order.N
    trees = list(p.support.items())

    def side(parent, z):
        path = [z]
        a, b = x, y
        while a != b:  # walk both endpoints up to the meeting point
            if a > b:
                a = parent[a]
            else:
                b = parent[b]
        m = a
        v = z
        while v != m:
            v = parent[v]
            path.append(v)
        return path

    for z in (x, y):
        for s in range(1, N + 1):
            vs = sum((w for parent, w in trees if s in side(parent, z)[:-1]), Fraction(0))
            for t in range(s):
                es = sum((w for parent, w in trees
                          if any({a, b} == {s, t} for a, b in zip(side(parent, z), side(parent, z)[1:]))), Fraction(0))
                marg = sum((w for parent, w in trees if parent[s] == t), Fraction(0))
                if O.frac(es) != O.frac(marg) * O.frac(vs):
                    return False
    return True


# -- enumeration and tree distances ---------------------------------------------------------------

@pytest.mark.parametrize("N,count", [(1, 1), (3, 6), (4, 24)])
def test_enumeration_counts(N, count):
    order = VertexOrder(tuple(range(N + 1)))
    trees = list(enumerate_trees(order))
    assert len(trees) == count == count_trees(N)
    assert sorted(t.parent for t in trees) == sorted(O.all_parent_arrays(N))


def test_enumeration_guard():
    with pytest.raises(TooLarge):
        list(enumerate_trees(VertexOrder(tuple(range(6))), guard=4))


def test_tree_distance_chain(five_point):
    space, basis = five_point
    tree = CompatibleTree(basis.order, (-1, 0, 1, 0, 0))
    assert tree_distance(tree, space, "2", "0") == space.d("2", "1") + space.d("1", "0")
    assert meeting_point(tree, space, "2", "0") == "0"
    assert tree_distance(tree, space, "3", "3") == 0
    assert meeting_point(tree, space, "3", "3") == "3"


def test_five_point_tree_distance(five_point):
    space, basis = five_point
    tree = CompatibleTree(basis.order, (-1, 0, 0, 1, 2))
    assert tree_distance(tree, space, "4", "3") == 4
    assert meeting_point(tree, space, "4", "3") == "0"


@given(seeds, st.integers(min_value=2, max_value=6))
def test_tree_distance_matches_oracle(seed, size):
    rng = rng_of(seed)
    space = random_metric_space(rng, size)
    order = VertexOrder.natural(space)
    parent = rng.choice(O.all_parent_arrays(space.N))
    tree = CompatibleTree(order, parent)
    D = [[O.frac(space.dist[order.point(a)][order.point(b)]) for b in range(space.size)] for a in range(space.size)]
    for a in range(space.size):
        for b in range(space.size):
            x, y = space.points[order.point(a)], space.points[order.point(b)]
            assert O.frac(tree_distance(tree, space, x, y)) == O.tree_path_length(parent, D, a, b)


# -- the product probability ----------------------------------------------------------------------

def test_molecular_product_is_point_mass():
    space, edges = random_tree_space(rng_of(5), 5)
    basis = tree_basis(space, edges)
    pi = product_probability(basis)
    assert list(pi.support.values()) == [1]


def test_five_point_product(five_point):
    space, basis = five_point
    pi = product_probability(basis)
    assert len(pi.support) == 4
    assert set(pi.support.values()) == {mpq(1, 4)}
    assert expected_distortion(pi, space, "4", "3") == 3


@given(seeds, st.integers(min_value=2, max_value=6))
def test_product_sums_to_one_with_edge_marginals(seed, size):
    _, inst = random_instance(seed, size)
    basis = inst.basis
    pi = product_probability(basis)
    assert pi.total() == 1
    marg = edge_marginals(pi)
    for n in range(1, basis.N + 1):
        for i in range(n):
            assert marg.get((n, i), 0) == basis.lam(n, i)


@given(seeds, st.integers(min_value=2, max_value=6))
def test_products_off_a_subforest_sum_to_one(seed, size):
    rng, inst = random_instance(seed, size)
    basis = inst.basis
    N = basis.N
    base = rng.choice(O.all_parent_arrays(N))
    S = {n for n in range(1, N + 1) if rng.random() < 0.5}  # children whose parent edge is kept
    total = Fraction(0)
    for parent in O.all_parent_arrays(N):
        if all(parent[n] == base[n] for n in S):
            w = Fraction(1)
            for n in range(1, N + 1):
                if n not in S:
                    w *= O.frac(basis.lam(n, parent[n]))
            total += w
    assert total == 1


@given(seeds, st.integers(min_value=2, max_value=6))
def test_duals_are_root_path_probabilities(seed, size):
    _, inst = random_instance(seed, size)
    basis = inst.basis
    pi = product_probability(basis)
    for z in range(1, basis.N + 1):
        v = [0] * (basis.N + 1)
        v[z] = 1
        alpha = alpha_recursion(basis, v)
        for n in range(1, basis.N + 1):
            on_path = sum((w for t, w in pi.trees() if n in t.root_path(z)), mpq(0))
            assert alpha[n] == on_path


# -- the effective charge ---------------------------------------------------------------------------

def test_five_point_effective_charge(five_point):
    space, basis = five_point
    p, _ = effective_charge(basis, "4", "3")
    assert p.support == {(-1, 0, 0, 1, 1): mpq(1, 2), (-1, 0, 0, 2, 2): mpq(1, 2)}
    assert expected_distortion(p, space, "4", "3") == 2
    assert check_compatible(p, product_probability(basis))
    assert check_independent(p, "4", "3")


def test_molecular_effective_charge_is_point_mass():
    space, edges = random_tree_space(rng_of(11), 5)
    basis = tree_basis(space, edges)
    tree = product_probability(basis).support
    for a in range(1, basis.N + 1):
        for b in range(a):
            p, _ = effective_charge(basis, a, b)
            assert p.support == tree


def test_point_masses_compatibility_and_independence(five_point):
    _, basis = five_point
    t1 = TreeDistribution(basis.order, {(-1, 0, 0, 1, 2): mpq(1)})
    t2 = TreeDistribution(basis.order, {(-1, 0, 0, 1, 1): mpq(1)})
    assert check_compatible(t1, t1)
    assert not check_compatible(t1, t2)
    assert check_independent(t1, 4, 3)
    assert check_independent(t2, 4, 3)


def test_perturbed_distribution_is_not_independent(five_point):
    # Reweighting the two effective-charge trees keeps independence; mixing in a tree
    # whose 4-3 path runs through different vertices does not.
    _, basis = five_point
    p = TreeDistribution(basis.order, {(-1, 0, 0, 1, 1): mpq(1, 3), (-1, 0, 0, 2, 2): mpq(2, 3)})
    assert brute_independent(p, 4, 3)
    assert check_independent(p, 4, 3)
    q = TreeDistribution(basis.order, {(-1, 0, 0, 1, 2): mpq(1, 3), (-1, 0, 1, 2, 1): mpq(2, 3)})
    assert not brute_independent(q, 4, 3)
    assert not check_independent(q, 4, 3)


@given(seeds, st.integers(min_value=2, max_value=6))
def test_effective_charge_equality(seed, size):
    _, inst = random_instance(seed, size)
    space, basis = inst.space, inst.basis
    pi = product_probability(basis)
    for x in range(1, basis.N + 1):
        for y in range(x):
            p, _ = effective_charge(basis, x, y)
            assert p.total() == 1
            assert O.frac(expected_tree_distance(p, space, x, y)) == coordinate_sum(basis, space, x, y)
            assert check_compatible(p, pi)
            assert check_independent(p, x, y)


@given(seeds, st.integers(min_value=2, max_value=5))
def test_independence_matches_definition(seed, size):
    rng, inst = random_instance(seed, size)
    basis = inst.basis
    pi = product_probability(basis)
    x = rng.randint(1, basis.N)
    y = rng.randrange(x)
    assert check_independent(pi, x, y) == brute_independent(pi, x, y)
    p, _ = effective_charge(basis, x, y)
    assert brute_independent(p, x, y)


@given(seeds, st.integers(min_value=2, max_value=6))
def test_product_lower_bound_when_independent(seed, size):
    _, inst = random_instance(seed, size)
    space, basis = inst.space, inst.basis
    pi = product_probability(basis)
    for x in range(1, basis.N + 1):
        for y in range(x):
            if check_independent(pi, x, y):
                assert O.frac(expected_tree_distance(pi, space, x, y)) >= coordinate_sum(basis, space, x, y)


@given(seeds, st.integers(min_value=2, max_value=6))
def test_path_mode_expands_to_enumeration(seed, size):
    _, inst = random_instance(seed, size)
    space, basis = inst.space, inst.basis
    for x in range(1, basis.N + 1):
        for y in range(x):
            paths, _ = effective_charge(basis, x, y, mode="paths")
            trees, _ = effective_charge(basis, x, y)
            assert paths.expand().support == trees.support
            assert expected_tree_distance(paths, space, x, y) == expected_tree_distance(trees, space, x, y)
            assert edge_marginals(paths) == edge_marginals(trees)


def test_full_enumeration_matches_support_enumeration(five_point):
    _, basis = five_point
    a, _ = effective_charge(basis, 4, 3)
    b, _ = effective_charge(basis, 4, 3, full=True)
    assert a.support == b.support


# -- chain quantities -------------------------------------------------------------------------------

def chains_of(state):
    return list(state.chains())


@given(seeds, st.integers(min_value=2, max_value=6))
def test_chain_properties(seed, size):
    _, inst = random_instance(seed, size)
    basis = inst.basis
    N = basis.N
    for x in range(1, N + 1):
        for y in range(x):
            st_ = charge_state(basis, x, y)
            a, b, g = st_.chain_alpha, st_.chain_beta, st_.chain_gamma
            mu = {x: 1, y: -1}
            for n in range(y + 1, N + 1):  # beta vanishes above y
                assert st_.beta[n] == 0
            for n in range(N + 1):  # (3) chain alphas add up to alpha(n)
                assert sum((a[c] for c in a if c[-1] == n), mpq(0)) == st_.alpha[n]
            for c in a:
                s = c[0]
                assert a[c] * mu[s] >= 0 and g[c] >= 0  # (6)
                if a[c]:  # effective chains only
                    assert all(st_.winner[n] == s for n in c)
                if len(c) >= 2:
                    lam = basis.lam(c[-2], c[-1])
                    assert b[c] * mu[s] == abs(a[c[:-1]]) * lam - abs(a[c])
                    assert b[c] * mu[s] >= 0
                    assert abs(b[c]) == g[c] * abs(st_.beta[c[-1]])  # (7)
                    if b[c]:
                        assert all(st_.winner[n] == s for n in c[:-1])
            for c in a:  # (8) extensions of c cancel exactly its alpha
                longer = [d for d in b if len(d) > len(c) and d[: len(c)] == c]
                assert sum((b[d] for d in longer), mpq(0)) == a[c]
            for n in range(1, N + 1):  # (9)
                assert sum((b[c] for c in b if n in c[:-1]), mpq(0)) == st_.alpha[n]
                for i in range(n):
                    on_edge = sum((b[c] for c in b if any(p == (n, i) for p in zip(c, c[1:]))), mpq(0))
                    assert on_edge == st_.alpha[n] * basis.lam(n, i)


@given(seeds, st.integers(min_value=2, max_value=6))
def test_charge_reaches_winners_only(seed, size):
    _, inst = random_instance(seed, size)
    basis = inst.basis
    for x in range(1, basis.N + 1):
        for y in range(x):
            p, st_ = effective_charge(basis, x, y)
            tab = side_tables(p, x, y)
            for n in range(basis.N + 1):
                assert tab.vertex[st_.winner[n]].get(n, 0) == abs(st_.alpha[n])
                assert tab.vertex[st_.loser[n]].get(n, 0) == 0


def test_chains_between():
    assert _chains_between(3, 3) == [(3,)]
    assert sorted(_chains_between(3, 0)) == [(3, 0), (3, 1, 0), (3, 2, 0), (3, 2, 1, 0)]


# -- reports ----------------------------------------------------------------------------------------

def test_report_on_tree_metric():
    space, edges = random_tree_space(rng_of(2), 6)
    rows = min_expected_distortion_report(tree_basis(space, edges), space)
    assert all(r.pair_distortion == r.effective == r.product == 1 for r in rows)


def test_five_point_report(five_point):
    space, basis = five_point
    (row,) = min_expected_distortion_report(basis, space, pairs=[(3, 4)])
    assert (row.pair_distortion, row.effective, row.product) == (2, 2, 3)


@given(seeds, st.integers(min_value=2, max_value=6))
def test_report_max_equals_distortion(seed, size):
    _, inst = random_instance(seed, size)
    space, basis = inst.space, inst.basis
    rows = min_expected_distortion_report(basis, space, mode="paths")
    assert max(r.effective for r in rows) == basis_distortion(basis, space).value
    assert all(r.effective == r.pair_distortion for r in rows)
