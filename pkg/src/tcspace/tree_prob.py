"""Probability distributions over order-compatible trees.

Two distributions matter: the product distribution pi(T) = prod of lambda over
the tree's edges, and for a fixed pair x > y the effective charge
distribution, whose expected tree distance equals the basis coordinate sum
Σ|alpha(n)| ‖b_n‖ exactly. The effective charge is available either tree by
tree (``mode="enumerate"``) or as a law on x–y paths (``mode="paths"``); the
rest of a tree is then distributed as the product of lambda.
"""

from __future__ import annotations

import itertools
from collections import defaultdict
from dataclasses import dataclass, field

from .basis import StochasticBasis, _PairScorer, alpha_recursion
from .errors import OrderMismatch, SamePoint, TooLarge
from .guards import guard_n
from .metric import ONE, ZERO, FiniteMetricSpace, VertexOrder
from .trees import CompatibleTree, chain_length, parent_arrays, path_sides


def _zero():
    return ZERO


@dataclass(frozen=True)
class TreeDistribution:
    order: VertexOrder
    support: dict  # parent tuple (parent[0] == -1) -> positive probability

    def total(self):
        return sum(self.support.values(), ZERO)

    def trees(self):
        for parent, p in self.support.items():
            yield CompatibleTree(self.order, parent), p

    def probability(self, tree) -> object:
        parent = tree.parent if isinstance(tree, CompatibleTree) else tuple(tree)
        return self.support.get(parent, ZERO)


@dataclass(frozen=True)
class PathDistribution:
    """Effective charge marginalised to the x–y path.

    ``paths`` maps (x_side, y_side) to p(P); each side is a decreasing tuple
    of positions ending at the meeting point. ``rows`` are the basis rows used
    for the product law off the path.
    """

    order: VertexOrder
    x: int
    y: int
    paths: dict
    rows: tuple = field(repr=False)

    def total(self):
        return sum(self.paths.values(), ZERO)

    def expand(self, guard: int | None = None) -> TreeDistribution:
        """Spread each path weight over trees by the product law off the path."""
        N = self.order.N
        limit = guard_n() if guard is None else guard
        if N > limit:
            raise TooLarge(f"expanding over trees with N = {N} exceeds the guard {limit}")
        support = {}
        for (cx, cy), p in self.paths.items():
            parent = [None] * (N + 1)
            parent[0] = -1
            for side in (cx, cy):
                for a, b in zip(side, side[1:]):
                    parent[a] = b
            free = [n for n in range(1, N + 1) if parent[n] is None]
            choices = [list(self.rows[n].items()) for n in free]
            for combo in itertools.product(*choices):
                w = p
                for n, (i, lam) in zip(free, combo):
                    parent[n] = i
                    w *= lam
                if w:
                    key = tuple(parent)
                    support[key] = support.get(key, ZERO) + w
        return TreeDistribution(self.order, support)


def _check_basis(basis: StochasticBasis):
    if not basis.is_normalised():
        return basis.normalised()
    return basis


def product_probability(basis: StochasticBasis, guard: int | None = None) -> TreeDistribution:
    """pi(T) = Π λ_e over the tree's edges, stored on its positive support."""
    basis = _check_basis(basis)
    N = basis.N
    limit = guard_n() if guard is None else guard
    if N > limit:
        raise TooLarge(f"product distribution over {N}! trees exceeds the guard N <= {limit}")
    choices = [[(-1, ONE)]] + [list(basis.rows[n].items()) for n in range(1, N + 1)]
    support = {}
    for combo in itertools.product(*choices):
        p = ONE
        for _, lam in combo:
            p *= lam
        support[tuple(i for i, _ in combo)] = p
    return TreeDistribution(basis.order, support)


def edge_marginals(p) -> dict:
    """p({n, i} in T) for every edge with positive probability, keyed (n, i), n > i."""
    if isinstance(p, PathDistribution):
        return _path_edge_marginals(p)
    out = defaultdict(_zero)
    for parent, w in p.support.items():
        for n in range(1, len(parent)):
            out[(n, parent[n])] += w
    return dict(out)


def _path_edge_marginals(p: PathDistribution) -> dict:
    N = p.order.N
    out = defaultdict(_zero)
    off_path = [ZERO] * (N + 1)  # mass of paths on which n is free
    for (cx, cy), w in p.paths.items():
        on = set(cx[:-1]) | set(cy[:-1])
        for side in (cx, cy):
            for a, b in zip(side, side[1:]):
                out[(a, b)] += w
        for n in range(1, N + 1):
            if n not in on:
                off_path[n] += w
    for n in range(1, N + 1):
        if off_path[n]:
            for i, lam in p.rows[n].items():
                out[(n, i)] += off_path[n] * lam
    return {k: v for k, v in out.items() if v}


def _same_order(p, q):
    if p.order.indices != q.order.indices:
        raise OrderMismatch("distributions are defined over different vertex orders")


def check_compatible(p, p0) -> bool:
    """True iff p and p0 give every pair the same edge probability."""
    _same_order(p, p0)
    a, b = edge_marginals(p), edge_marginals(p0)
    N = p.order.N
    return all(a.get((n, i), ZERO) == b.get((n, i), ZERO) for n in range(1, N + 1) for i in range(n))


@dataclass
class SideTables:
    """Path-event probabilities for one pair x > y.

    ``edge[z][(s, t)] = p({s,t} in [z, m_T]_T)`` and
    ``vertex[z][s] = p(s in [z, m_T)_T)`` for z in {x, y}.
    """

    x: int
    y: int
    edge: dict
    vertex: dict
    marginals: dict
    total: object
    length: object = None


def side_tables(p, x: int, y: int, space: FiniteMetricSpace | None = None) -> SideTables:
    edge = {x: defaultdict(_zero), y: defaultdict(_zero)}
    vertex = {x: defaultdict(_zero), y: defaultdict(_zero)}
    length = ZERO if space is not None else None
    order = p.order
    if isinstance(p, PathDistribution):
        if (p.x, p.y) != (x, y):
            raise OrderMismatch("path distribution was built for a different pair")
        items = (((cx, cy), w) for (cx, cy), w in p.paths.items())
        marginals = _path_edge_marginals(p)
    else:
        items = ((path_sides(parent, x, y), w) for parent, w in p.support.items())
        marginals = edge_marginals(p)
    total = ZERO
    for (cx, cy), w in items:
        total += w
        for z, side in ((x, cx), (y, cy)):
            ez, vz = edge[z], vertex[z]
            for a, b in zip(side, side[1:]):
                ez[(a, b)] += w
                vz[a] += w
        if space is not None:
            length += w * (chain_length(cx, order, space) + chain_length(cy, order, space))
    return SideTables(x, y, edge, vertex, marginals, total, length)


def _ordered_pair(order: VertexOrder, x, y):
    a, b = order.resolve(x), order.resolve(y)
    if a == b:
        raise SamePoint(f"pair needs distinct points, got {x!r} twice")
    return (a, b) if a > b else (b, a)


def independence_failures(p, x, y) -> list:
    """Triples (z, s, t) where p({s,t} in [z,m]) != p({s,t} in T) p(s in [z,m))."""
    a, b = _ordered_pair(p.order, x, y)
    tab = side_tables(p, a, b)
    N = p.order.N
    bad = []
    for z in (a, b):
        ez, vz = tab.edge[z], tab.vertex[z]
        for s in range(1, N + 1):
            vs = vz.get(s, ZERO)
            for t in range(s):
                if ez.get((s, t), ZERO) != tab.marginals.get((s, t), ZERO) * vs:
                    bad.append((z, s, t))
    return bad


def check_independent(p, x, y) -> bool:
    """(x,y)-independence over every s > t (absent pairs contribute 0 = 0)."""
    return not independence_failures(p, x, y)


def expected_tree_distance(p, space: FiniteMetricSpace, x, y):
    a, b = _ordered_pair(p.order, x, y)
    p.order.check(space)
    return side_tables(p, a, b, space).length


def expected_distortion(p, space: FiniteMetricSpace, x, y):
    """E_p d_T(x, y) / d(x, y)."""
    a, b = _ordered_pair(p.order, x, y)
    d = space.dist[p.order.point(a)][p.order.point(b)]
    return expected_tree_distance(p, space, x, y) / d


@dataclass
class EffectiveChargeState:
    """Per-vertex and per-chain quantities of the effective charge for x > y.

    Vertices are order positions. Chains are decreasing position tuples that
    start at x or y; singleton chains carry alpha(s), gamma 1 and beta(s).
    """

    x: int
    y: int
    alpha: list
    beta: list
    winner: list
    loser: list
    chain_alpha: dict
    chain_beta: dict
    chain_gamma: dict

    def chains(self):
        return self.chain_alpha.keys()


def _chains_between(s: int, t: int):
    """All decreasing chains from s down to t (s >= t)."""
    if s == t:
        return [(s,)]
    inner = range(t + 1, s)
    out = []
    for r in range(len(inner) + 1):
        for mid in itertools.combinations(reversed(inner), r):
            out.append((s,) + mid + (t,))
    return out


def charge_state(basis: StochasticBasis, x, y) -> EffectiveChargeState:
    basis = _check_basis(basis)
    order = basis.order
    x, y = _ordered_pair(order, x, y)
    N = basis.N
    rows = basis.rows
    mu = [ZERO] * (N + 1)
    mu[x] += 1
    mu[y] -= 1
    alpha = alpha_recursion(basis, mu)
    winner = [x if alpha[n] > 0 else y for n in range(N + 1)]
    loser = [y if alpha[n] > 0 else x for n in range(N + 1)]
    beta = [ZERO] * (N + 1)
    for m in range(1, N + 1):
        if alpha[m]:
            for n, lam in rows[m].items():
                if winner[m] == loser[n]:
                    beta[n] += lam * alpha[m]

    c_alpha, c_beta, c_gamma = {}, {}, {}
    for s in (x, y):
        c_alpha[(s,)] = alpha[s]
        c_beta[(s,)] = beta[s]
        c_gamma[(s,)] = ONE
    # induction on the terminal, from the top down
    for t in range(max(x, y) - 1, -1, -1):
        for s in (x, y):
            if s <= t:
                continue
            chains = [c for c in _chains_between(s, t) if len(c) >= 2]
            numer = {}
            for c in chains:
                head = c[:-1]
                numer[c] = c_alpha[head] * rows[head[-1]].get(t, ZERO)
            denom = sum(numer.values(), ZERO)
            for c in chains:
                num = numer[c]
                if denom:
                    g = num / denom
                elif num:
                    raise ArithmeticError(f"nonzero weight over a vanishing total for chain {c}")
                else:
                    g = ZERO
                if winner[t] == winner[c[-2]]:
                    a = num + g * beta[t]
                else:
                    a = ZERO
                c_gamma[c] = g
                c_alpha[c] = a
                c_beta[c] = num - a
    return EffectiveChargeState(x, y, alpha, beta, winner, loser, c_alpha, c_beta, c_gamma)


def _path_weight(state: EffectiveChargeState, cx, cy):
    m = cx[-1]
    bm = state.beta[m]
    if not bm:
        return ZERO  # 0/0 = 0 convention
    return abs(state.chain_beta[tuple(cx)] * state.chain_beta[tuple(cy)]) / abs(bm)


def effective_tree_weight(basis: StochasticBasis, state: EffectiveChargeState, parent) -> object:
    """p(T) of the effective charge for one tree (parent array)."""
    cx, cy = path_sides(parent, state.x, state.y)
    w = _path_weight(state, cx, cy)
    if not w:
        return ZERO
    on = set(cx[:-1]) | set(cy[:-1])
    rows = basis.rows
    for n in range(1, len(parent)):
        if n not in on:
            lam = rows[n].get(parent[n], ZERO)
            if not lam:
                return ZERO
            w *= lam
    return w


def effective_charge(basis: StochasticBasis, x, y, mode: str = "enumerate", guard: int | None = None,
                     full: bool = False):
    """Effective charge distribution for the pair and its state.

    ``mode="enumerate"`` evaluates p(T) tree by tree. By default only trees in
    the support of pi are visited: any tree using an edge with λ = 0 gets
    p(T) = 0, since its off-path product or its chain β vanishes. ``full=True``
    visits all N! trees. ``mode="paths"`` returns a PathDistribution.
    """
    basis = _check_basis(basis)
    state = charge_state(basis, x, y)
    N = basis.N
    if mode == "paths":
        paths = {}
        for m in range(0, state.y + 1):
            for cy in _chains_between(state.y, m):
                by = state.chain_beta[cy]
                if not by:
                    continue
                used = set(cy[:-1])
                for cx in _chains_between(state.x, m):
                    if used.intersection(cx[:-1]):
                        continue
                    w = _path_weight(state, cx, cy)
                    if w:
                        paths[(cx, cy)] = w
        return PathDistribution(basis.order, state.x, state.y, paths, basis.rows), state
    if mode != "enumerate":
        raise ValueError(f"unknown mode {mode!r}")
    limit = guard_n() if guard is None else guard
    if N > limit:
        raise TooLarge(f"enumerating trees with N = {N} exceeds the guard {limit}")
    if full:
        trees = parent_arrays(N, limit)
    else:
        choices = [(-1,)] + [tuple(basis.rows[n]) for n in range(1, N + 1)]
        trees = itertools.product(*choices)
    support = {}
    for parent in trees:
        w = effective_tree_weight(basis, state, parent)
        if w:
            support[tuple(parent)] = w
    return TreeDistribution(basis.order, support), state


@dataclass(frozen=True)
class PairRow:
    pair: tuple
    d: object
    pair_distortion: object
    effective: object
    product: object
    pi_independent: bool


def min_expected_distortion_report(basis: StochasticBasis, space: FiniteMetricSpace, mode: str = "enumerate",
                                   pairs=None) -> list:
    """One PairRow per unordered pair: coordinate sum, effective and product expectations."""
    basis = _check_basis(basis)
    order = basis.order.check(space)
    basis = StochasticBasis(order, basis.rows)
    scorer = _PairScorer(basis, space)
    pi = product_probability(basis) if mode == "enumerate" else None
    out = []
    for i, j in space.pairs() if pairs is None else pairs:
        a, b = order.position(i), order.position(j)
        d = space.dist[i][j]
        ratio = scorer.weighted_sum(i, j) / d
        p, _ = effective_charge(basis, a, b, mode)
        eff = expected_tree_distance(p, space, a, b) / d
        if pi is not None:
            prod = expected_tree_distance(pi, space, a, b) / d
            indep = check_independent(pi, a, b)
        else:
            prod, indep = None, None
        out.append(PairRow((space.points[i], space.points[j]), d, ratio, eff, prod, indep))
    return out
