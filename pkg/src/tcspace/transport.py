"""Transportation problems on a finite metric space and their optimal cost.

A problem is a signed mass vector whose basepoint entry is always recomputed
so that the total mass is zero. The optimal cost is solved exactly by
successive shortest paths on the bipartite supply/demand graph.
"""

from __future__ import annotations

import heapq
from dataclasses import dataclass
from math import lcm
from typing import Mapping

from gmpy2 import mpq

from .errors import DimensionMismatch, SamePoint
from .metric import ZERO, FiniteMetricSpace, fmt, rational


@dataclass(frozen=True)
class TransportProblem:
    space: FiniteMetricSpace
    values: tuple  # indexed like space.points

    def __post_init__(self):
        if len(self.values) != self.space.size:
            raise DimensionMismatch(f"mass vector has {len(self.values)} entries, space has {self.space.size}")
        vals = [rational(v) for v in self.values]
        b = self.space.basepoint
        vals[b] = ZERO
        vals[b] = -sum(vals, ZERO)
        object.__setattr__(self, "values", tuple(vals))

    @classmethod
    def from_mass(cls, space: FiniteMetricSpace, mass: Mapping) -> "TransportProblem":
        vals = [ZERO] * space.size
        for label, m in mass.items():
            vals[space.index(label)] += rational(m)
        return cls(space, tuple(vals))

    @classmethod
    def zero(cls, space):
        return cls(space, (ZERO,) * space.size)

    @classmethod
    def delta(cls, space, x) -> "TransportProblem":
        """δ_x, completed at the basepoint (so δ_0 is the zero problem)."""
        vals = [ZERO] * space.size
        vals[space.index(x)] = mpq(1)
        return cls(space, tuple(vals))

    @classmethod
    def molecule(cls, space, x, y) -> "TransportProblem":
        i, j = space.index(x), space.index(y)
        if i == j:
            raise SamePoint(f"molecule needs two distinct points, got {x!r} twice")
        vals = [ZERO] * space.size
        vals[i] = mpq(1)
        vals[j] = mpq(-1)
        return cls(space, tuple(vals))

    @property
    def mass(self) -> dict:
        return {self.space.points[i]: v for i, v in enumerate(self.values) if v}

    def support(self):
        return [i for i, v in enumerate(self.values) if v]

    def is_zero(self) -> bool:
        return not any(self.values)

    def _check(self, other):
        if other.space is not self.space and other.space != self.space:
            raise DimensionMismatch("problems live on different spaces")

    def __add__(self, other):
        self._check(other)
        return TransportProblem(self.space, tuple(a + b for a, b in zip(self.values, other.values)))

    def __sub__(self, other):
        self._check(other)
        return TransportProblem(self.space, tuple(a - b for a, b in zip(self.values, other.values)))

    def __neg__(self):
        return TransportProblem(self.space, tuple(-a for a in self.values))

    def __mul__(self, c):
        c = rational(c)
        return TransportProblem(self.space, tuple(c * a for a in self.values))

    __rmul__ = __mul__


@dataclass(frozen=True)
class Move:
    amount: mpq
    source: str
    target: str


@dataclass(frozen=True)
class TransportPlan:
    moves: tuple

    def cost(self, space):
        return sum((m.amount * space.d(m.source, m.target) for m in self.moves), ZERO)

    def as_problem(self, space) -> TransportProblem:
        vals = [ZERO] * space.size
        for m in self.moves:
            vals[space.index(m.source)] += m.amount
            vals[space.index(m.target)] -= m.amount
        return TransportProblem(space, tuple(vals))

    def to_json(self):
        return [[fmt(m.amount), m.source, m.target] for m in self.moves]


def _min_cost_flow(supply, demand, cost):
    """Successive shortest paths with Johnson potentials.

    ``supply``/``demand`` are positive ints with equal totals; ``cost[p][q]`` is
    the unit cost from source p to sink q. Returns the flow matrix.
    """
    P, Q = len(supply), len(demand)
    S, T = P + Q, P + Q + 1
    n = P + Q + 2
    zero = 0.0 if any(isinstance(c, float) for row in cost for c in row) else ZERO
    # adjacency: edge = [to, cap, cost, rev_index]
    graph = [[] for _ in range(n)]

    def add(u, v, cap, c):
        graph[u].append([v, cap, c, len(graph[v])])
        graph[v].append([u, 0, -c, len(graph[u]) - 1])

    for p in range(P):
        add(S, p, supply[p], zero)
    for p in range(P):
        for q in range(Q):
            add(p, P + q, sum(supply), cost[p][q])
    for q in range(Q):
        add(P + q, T, demand[q], zero)

    potential = [zero] * n
    remaining = sum(supply)
    while remaining:
        dist = [None] * n
        prev = [None] * n
        dist[S] = zero
        heap = [(zero, S)]
        done = [False] * n
        while heap:
            du, u = heapq.heappop(heap)
            if done[u]:
                continue
            done[u] = True
            for k, (v, cap, c, _) in enumerate(graph[u]):
                if cap <= 0 or done[v]:
                    continue
                reduced = c + potential[u] - potential[v]
                if reduced < 0:  # float round-off only
                    reduced = reduced * 0
                nd = du + reduced
                if dist[v] is None or nd < dist[v]:
                    dist[v] = nd
                    prev[v] = (u, k)
                    heapq.heappush(heap, (nd, v))
        if dist[T] is None:
            raise RuntimeError("residual graph lost its augmenting path")
        for v in range(n):
            if dist[v] is not None:
                potential[v] += dist[v]
        push = remaining
        v = T
        while v != S:
            u, k = prev[v]
            push = min(push, graph[u][k][1])
            v = u
        v = T
        while v != S:
            u, k = prev[v]
            e = graph[u][k]
            e[1] -= push
            graph[v][e[3]][1] += push
            v = u
        remaining -= push

    flow = [[0] * Q for _ in range(P)]
    for p in range(P):
        for v, cap, c, rev in graph[p]:
            if P <= v < P + Q:
                flow[p][v - P] = graph[v][rev][1]
    return flow


def optimal_plan(space: FiniteMetricSpace, mu: TransportProblem) -> TransportPlan:
    """An optimal plan: moves from P+ to P- with minimal total cost."""
    if mu.space != space:
        raise DimensionMismatch("problem is defined on a different space")
    pos = [(i, v) for i, v in enumerate(mu.values) if v > 0]
    neg = [(i, -v) for i, v in enumerate(mu.values) if v < 0]
    if not pos:
        return TransportPlan(())
    scale = lcm(*(int(v.denominator) for _, v in pos + neg))
    supply = [int(v * scale) for _, v in pos]
    demand = [int(v * scale) for _, v in neg]
    cost = [[space.dist[i][j] for j, _ in neg] for i, _ in pos]
    flow = _min_cost_flow(supply, demand, cost)
    moves = []
    for a, (i, _) in enumerate(pos):
        for b, (j, _) in enumerate(neg):
            if flow[a][b]:
                moves.append(Move(mpq(flow[a][b], scale), space.points[i], space.points[j]))
    return TransportPlan(tuple(moves))


def optimal_cost(space: FiniteMetricSpace, mu: TransportProblem):
    """OC(μ), the free-space norm of μ."""
    return optimal_plan(space, mu).cost(space)


def norm_molecule_combination(space: FiniteMetricSpace, coefficients: Mapping):
    """Norm of Σ c·(δ_x − δ_y) over ``{(x, y): c}``."""
    vals = [ZERO] * space.size
    for (x, y), c in coefficients.items():
        c = rational(c)
        vals[space.index(x)] += c
        vals[space.index(y)] -= c
    return optimal_cost(space, TransportProblem(space, tuple(vals)))


def witness_lower_bound(space: FiniteMetricSpace, mu: TransportProblem):
    """Best value of Σ μ(z) f(z) over the potentials ±(d(n,·) − d(n,0)).

    Each potential is 1-Lipschitz and vanishes at the basepoint, so the result
    never exceeds OC(μ).
    """
    b = space.basepoint
    best = ZERO
    for n in range(space.size):
        row = space.dist[n]
        s = sum((m * (row[z] - row[b]) for z, m in enumerate(mu.values) if m), ZERO)
        best = max(best, abs(s))
    return best
