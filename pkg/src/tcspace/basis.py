"""Stochastic bases of the transportation cost space.

A basis is a vertex order F together with row-stochastic split coefficients:
``b_n = rho_n * (delta_F(n) - sum_{i<n} lam[n][i] * delta_F(i))``. Rows are
sparse dicts over order positions. Dual coordinates come from the
triangular recursion ``alpha(n) = mu(n) + sum_{m>n} alpha(m) lam[m][n]``.
"""

from __future__ import annotations

import heapq
import random
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np

from .errors import DimensionMismatch, InvalidBasis, NotMolecular, SamePoint
from .metric import ONE, ZERO, FiniteMetricSpace, VertexOrder, rational
from .transport import TransportProblem
from .trees import CompatibleTree


@dataclass(frozen=True)
class StochasticBasis:
    order: VertexOrder
    rows: tuple  # rows[n] = {i: lam_{n,i}} for positions n = 1..N; rows[0] == {}
    rho: tuple = None  # rho[n] for n = 1..N; rho[0] is unused
    tol: float = field(default=0.0, compare=False)

    def __post_init__(self):
        rows = list(self.rows)
        size = len(self.order)
        if len(rows) == size - 1:
            rows = [{}] + rows
        if len(rows) != size:
            raise DimensionMismatch(f"basis has {len(rows)} rows for {size} points")
        clean = [{}]
        for n in range(1, size):
            row = {}
            for i, lam in dict(rows[n]).items():
                i = int(i)
                if not 0 <= i < n:
                    raise InvalidBasis(f"row {n} refers to position {i}, which is not below {n}")
                lam = lam if isinstance(lam, float) else rational(lam)
                if lam < 0:
                    raise InvalidBasis(f"row {n} has a negative coefficient at {i}")
                if lam:
                    row[i] = row[i] + lam if i in row else lam
            total = sum(row.values())
            if abs(total - 1) > self.tol:
                raise InvalidBasis(f"row {n} sums to {total}, not 1")
            clean.append(dict(sorted(row.items())))
        rho = self.rho
        if rho is None:
            rho = (ONE,) * size
        else:
            rho = tuple(rho)
            if len(rho) == size - 1:
                rho = (ONE,) + rho
            if len(rho) != size:
                raise DimensionMismatch("rho must have one entry per row")
            rho = tuple(r if isinstance(r, float) else rational(r) for r in rho)
            if any(r == 0 for r in rho[1:]):
                raise InvalidBasis("rho entries must be nonzero")
        object.__setattr__(self, "rows", tuple(clean))
        object.__setattr__(self, "rho", rho)

    @property
    def N(self) -> int:
        return len(self.rows) - 1

    def is_normalised(self) -> bool:
        return all(r == 1 for r in self.rho[1:])

    def normalised(self) -> "StochasticBasis":
        if self.is_normalised():
            return self
        return StochasticBasis(self.order, self.rows, None, self.tol)

    def scaled(self, rho: Sequence) -> "StochasticBasis":
        return StochasticBasis(self.order, self.rows, tuple(rho), self.tol)

    def vector(self, space: FiniteMetricSpace, n: int) -> TransportProblem:
        """b_n as a transportation problem."""
        self.order.check(space)
        vals = [ZERO] * space.size
        r = self.rho[n]
        vals[self.order.point(n)] = r
        for i, lam in self.rows[n].items():
            vals[self.order.point(i)] -= r * lam
        return TransportProblem(space, tuple(vals))

    def lam(self, n: int, i: int):
        return self.rows[n].get(i, ZERO)


def _check(basis: StochasticBasis, space: FiniteMetricSpace):
    if len(basis.order) != space.size:
        raise DimensionMismatch(f"basis has {len(basis.order)} points, space has {space.size}")
    basis.order.check(space)


def basis_norms(basis: StochasticBasis, space: FiniteMetricSpace) -> tuple:
    """‖b_n‖ for n = 0..N (entry 0 is a zero placeholder)."""
    _check(basis, space)
    D = space.dist
    F = basis.order.indices
    out = [ZERO]
    for n in range(1, basis.N + 1):
        row = D[F[n]]
        out.append(abs(basis.rho[n]) * sum((lam * row[F[i]] for i, lam in basis.rows[n].items()), ZERO))
    return tuple(out)


@dataclass(frozen=True)
class DualCoefficients:
    """Coordinates alpha(1..N); ``values[0]`` holds the recursion extended to 0."""

    values: tuple

    @property
    def coeffs(self) -> tuple:
        return self.values[1:]

    def __getitem__(self, n):
        return self.values[n]

    def __len__(self):
        return len(self.values) - 1


def alpha_recursion(basis: StochasticBasis, v: Sequence) -> list:
    """Back-substitution over positions N..0 for a raw mass vector ``v`` by position.

    Works for the normalised rows; ``v`` need not sum to zero, in which case the
    entry at 0 is the total mass.
    """
    N = basis.N
    if len(v) != N + 1:
        raise DimensionMismatch(f"vector has {len(v)} entries, basis has {N + 1} points")
    acc = [rational(a) if not isinstance(a, float) else a for a in v]
    rows = basis.rows
    for n in range(N, 0, -1):
        a = acc[n]
        if a:
            for i, lam in rows[n].items():
                acc[i] += a * lam
    return acc


def _position_vector(basis, mu: TransportProblem):
    F = basis.order.indices
    return [mu.values[F[p]] for p in range(len(F))]


def dual_coefficients(basis: StochasticBasis, mu: TransportProblem) -> DualCoefficients:
    _check(basis, mu.space)
    alpha = alpha_recursion(basis, _position_vector(basis, mu))
    rho = basis.rho
    return DualCoefficients(tuple([alpha[0]] + [alpha[n] / rho[n] for n in range(1, basis.N + 1)]))


def series_dual_coefficients(basis: StochasticBasis, mu: TransportProblem) -> DualCoefficients:
    """Same coordinates via the truncated Neumann series sum_{j<=N} T^j delta*(mu).

    T is the strictly upper-triangular matrix with T[i][n] = lam_{n,i}; it is
    nilpotent, so the series equals (I - T)^{-1} exactly.
    """
    _check(basis, mu.space)
    size = basis.N + 1
    T = np.full((size, size), ZERO, dtype=object)
    for n in range(1, size):
        for i, lam in basis.rows[n].items():
            T[i, n] = lam
    term = np.array(_position_vector(basis, mu), dtype=object)
    total = term.copy()
    for _ in range(basis.N):
        term = T.dot(term)
        total = total + term
    rho = basis.rho
    return DualCoefficients(tuple([total[0]] + [total[n] / rho[n] for n in range(1, size)]))


def reconstruct(basis: StochasticBasis, space: FiniteMetricSpace, coeffs) -> TransportProblem:
    """Σ coeffs(n) b_n. ``coeffs`` is DualCoefficients or a length-N sequence."""
    _check(basis, space)
    c = coeffs.coeffs if isinstance(coeffs, DualCoefficients) else tuple(coeffs)
    if len(c) != basis.N:
        raise DimensionMismatch(f"{len(c)} coefficients for {basis.N} basis vectors")
    F = basis.order.indices
    vals = [ZERO] * space.size
    for n in range(1, basis.N + 1):
        a = rational(c[n - 1]) * basis.rho[n]
        if not a:
            continue
        vals[F[n]] += a
        for i, lam in basis.rows[n].items():
            vals[F[i]] -= a * lam
    return TransportProblem(space, tuple(vals))


def delta_duals(basis: StochasticBasis) -> list:
    """Sparse b*(delta_F(p)) for every position p of the normalised basis.

    Entry 0 is empty because delta at the basepoint completes to zero.
    """
    rows = basis.rows
    out = [{}]
    for p in range(1, basis.N + 1):
        acc = {p: ONE}
        heap = [-p]
        duals = {}
        while heap:
            n = -heapq.heappop(heap)
            a = acc.pop(n)
            if not a:
                continue
            duals[n] = a
            for i, lam in rows[n].items():
                if i == 0:
                    continue
                if i in acc:
                    acc[i] += a * lam
                else:
                    acc[i] = a * lam
                    heapq.heappush(heap, -i)
        out.append(duals)
    return out


class _PairScorer:
    """Σ|alpha(n)| ‖b_n‖ for molecules, using precomputed point duals."""

    def __init__(self, basis: StochasticBasis, space: FiniteMetricSpace):
        _check(basis, space)
        self.space = space
        self.basis = basis.normalised()
        self.norms = basis_norms(self.basis, space)
        by_position = delta_duals(self.basis)
        pos = basis.order.position
        self.duals = [by_position[pos(i)] for i in range(space.size)]

    def weighted_sum(self, i: int, j: int):
        a, b = self.duals[i], self.duals[j]
        norms = self.norms
        total = ZERO
        for n, v in a.items():
            w = v - b.get(n, ZERO)
            if w:
                total += abs(w) * norms[n]
        for n, v in b.items():
            if n not in a:
                total += abs(v) * norms[n]
        return total

    def ratio(self, i: int, j: int):
        return self.weighted_sum(i, j) / self.space.dist[i][j]


def pair_distortion(basis: StochasticBasis, space: FiniteMetricSpace, x, y):
    """(1/d(x,y)) Σ_n |b*_n(δ_x − δ_y)| ‖b_n‖."""
    i, j = space.index(x), space.index(y)
    if i == j:
        raise SamePoint(f"pair distortion needs distinct points, got {x!r} twice")
    return _PairScorer(basis, space).ratio(i, j)


@dataclass(frozen=True)
class DistortionResult:
    value: object
    pair: tuple  # witness labels
    count: int  # number of pairs scanned


def _best_over(scorer, pairs):
    best, arg, count = None, None, 0
    for i, j in pairs:
        r = scorer.ratio(i, j)
        count += 1
        if best is None or r > best:
            best, arg = r, (i, j)
    return best, arg, count


def _chunk_worker(args):
    basis, space, pairs = args
    return _best_over(_PairScorer(basis, space), pairs)


def iter_pair_ratios(basis: StochasticBasis, space: FiniteMetricSpace, pairs=None):
    """Yield (i, j, Σ|α|‖b‖, d(i,j)) over index pairs (all pairs by default)."""
    scorer = _PairScorer(basis, space)
    for i, j in space.pairs() if pairs is None else pairs:
        yield i, j, scorer.weighted_sum(i, j), space.dist[i][j]


def basis_distortion(
    basis: StochasticBasis,
    space: FiniteMetricSpace,
    pairs: Iterable | None = None,
    workers: int = 1,
) -> DistortionResult:
    """Max of pair_distortion over all unordered pairs, or over ``pairs`` (index pairs).

    Ties keep the first pair in scan order, so the witness is the
    lexicographically smallest index pair among maximisers.
    """
    pair_list = list(space.pairs() if pairs is None else (tuple(sorted(p)) for p in pairs))
    if not pair_list:
        return DistortionResult(ONE, (), 0)
    if workers > 1 and len(pair_list) > 2000:
        size = -(-len(pair_list) // workers)
        chunks = [pair_list[k : k + size] for k in range(0, len(pair_list), size)]
        with ProcessPoolExecutor(workers) as pool:
            results = list(pool.map(_chunk_worker, [(basis, space, c) for c in chunks]))
        best, arg, count = None, None, 0
        for value, pair, c in results:  # chunks are in scan order
            count += c
            if best is None or value > best:
                best, arg = value, pair
    else:
        best, arg, count = _best_over(_PairScorer(basis, space), pair_list)
    return DistortionResult(best, (space.points[arg[0]], space.points[arg[1]]), count)


def molecular_tree(basis: StochasticBasis) -> CompatibleTree:
    """The tree parent(n) = i when every row is a single λ_{n,i} = 1."""
    parent = [-1]
    for n in range(1, basis.N + 1):
        row = basis.rows[n]
        if len(row) != 1:
            raise NotMolecular(f"row {n} splits its mass over {len(row)} points")
        (i, _), = row.items()
        parent.append(i)
    return CompatibleTree(basis.order, tuple(parent))


def is_molecular(basis: StochasticBasis) -> bool:
    return all(len(row) == 1 for row in basis.rows[1:])


def delta_basis(space: FiniteMetricSpace, order: VertexOrder | None = None) -> StochasticBasis:
    """b_n = δ_F(n): every row puts its mass on the basepoint."""
    order = VertexOrder.natural(space) if order is None else order.check(space)
    return StochasticBasis(order, [{}] + [{0: ONE} for _ in range(space.N)])


def tree_basis(space: FiniteMetricSpace, edges: Iterable) -> StochasticBasis:
    """Molecular basis along a spanning tree given by label pairs.

    The order is breadth-first from the basepoint, neighbours by index.
    """
    adj = {i: [] for i in range(space.size)}
    count = 0
    for u, v in edges:
        i, j = space.index(u), space.index(v)
        adj[i].append(j)
        adj[j].append(i)
        count += 1
    if count != space.N:
        raise InvalidBasis(f"a spanning tree on {space.size} points needs {space.N} edges, got {count}")
    root = space.basepoint
    seen = {root: -1}
    queue = [root]
    for u in queue:
        for v in sorted(adj[u]):
            if v not in seen:
                seen[v] = u
                queue.append(v)
    if len(queue) != space.size:
        raise InvalidBasis("edges do not span the space")
    order = VertexOrder(tuple(queue), space.points)
    rows = [{}] + [{order.position(seen[i]): ONE} for i in queue[1:]]
    return StochasticBasis(order, rows)


def minimum_spanning_tree(space: FiniteMetricSpace):
    """Prim's tree of the metric, as label pairs; ties go to smaller indices."""
    n = space.size
    D = space.dist
    root = space.basepoint
    inside = {root}
    best = {v: (D[root][v], root) for v in range(n) if v != root}
    out = []
    while best:
        v = min(best, key=lambda u: (best[u][0], u))
        _, p = best.pop(v)
        inside.add(v)
        out.append((space.points[p], space.points[v]))
        for u in best:
            if D[v][u] < best[u][0]:
                best[u] = (D[v][u], v)
    return out


def _reorder_rows(basis: StochasticBasis, new_order: VertexOrder) -> StochasticBasis:
    """Carry rows over to a new order, keeping weights that still point downward."""
    old = basis.order
    rows = [{}]
    for n in range(1, len(new_order)):
        point = new_order.point(n)
        old_row = basis.rows[old.position(point)]
        row = {}
        for i, lam in old_row.items():
            k = new_order.position(old.point(i))
            if k < n:
                row[k] = lam
        total = sum(row.values(), ZERO)
        rows.append({k: lam / total for k, lam in row.items()} if total else {0: ONE})
    return StochasticBasis(new_order, rows)


def search_basis(space: FiniteMetricSpace, budget: int, seed: int = 0) -> StochasticBasis:
    """Local search for a low-distortion basis.

    Starts from the delta basis in natural order. With a positive budget the
    first step tries the molecular basis of a minimum spanning tree; later
    steps are adjacent transpositions of the order and simplex moves
    row <- (1-t) row + t e_i with t halved up to 10 times. A candidate is kept
    when it scores strictly lower, or equal with a lexicographically smaller
    order.
    """
    rng = random.Random(seed)
    best = delta_basis(space)
    best_score = basis_distortion(best, space).value

    def better(cand):
        nonlocal best, best_score
        s = basis_distortion(cand, space).value
        if s < best_score or (s == best_score and cand.order.indices < best.order.indices):
            best, best_score = cand, s
            return True
        return False

    if budget <= 0 or space.N == 0:
        return best
    better(tree_basis(space, minimum_spanning_tree(space)))
    N = space.N
    for _ in range(budget - 1):
        if N >= 2 and rng.random() < 0.3:
            k = rng.randint(1, N - 1)
            idx = list(best.order.indices)
            idx[k], idx[k + 1] = idx[k + 1], idx[k]
            better(_reorder_rows(best, VertexOrder(tuple(idx), space.points)))
            continue
        n = rng.randint(1, N)
        i = rng.randrange(n)
        row = best.rows[n]
        t = ONE
        for _ in range(11):
            new = {k: (1 - t) * lam for k, lam in row.items()}
            new[i] = new.get(i, ZERO) + t
            rows = list(best.rows)
            rows[n] = new
            if better(StochasticBasis(best.order, rows)):
                break
            t /= 2
    return best
