"""Finite metric spaces, weighted graphs, geodesic metrics and vertex orders.

Scalars are exact rationals (``gmpy2.mpq``) unless a space is built in float
mode. Labels are opaque strings; indices follow input order.
"""

from __future__ import annotations

import heapq
from collections import deque
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Sequence

from gmpy2 import mpfr, mpq

from .errors import DimensionMismatch, DisconnectedGraph, OrderViolation, UnknownPoint

ZERO = mpq(0)
ONE = mpq(1)


def rational(value) -> mpq:
    """Exact rational from an int, Fraction, mpq or a ``"p/q"``/decimal string."""
    if isinstance(value, str):
        try:
            return mpq(value.strip())
        except ValueError as exc:
            raise ValueError(f"not a rational: {value!r}") from exc
    if isinstance(value, Fraction):
        return mpq(value.numerator, value.denominator)
    if isinstance(value, bool):
        raise ValueError(f"not a rational: {value!r}")
    return mpq(value)


def scalar(value, exact: bool = True):
    return rational(value) if exact else float(value)


def fmt(value) -> str:
    """Serialise a scalar as ``"p/q"`` (or ``"p"``); floats use repr."""
    if isinstance(value, (float, type(mpfr(0)))):
        return repr(float(value))
    return str(mpq(value))


@dataclass(frozen=True)
class FiniteMetricSpace:
    points: tuple
    dist: tuple
    basepoint: int = 0
    _index: dict = field(default=None, compare=False, repr=False)
    _exact: bool = field(default=None, compare=False, repr=False)

    def __post_init__(self):
        points = tuple(str(p) for p in self.points)
        n = len(points)
        if n == 0:
            raise DimensionMismatch("a metric space needs at least one point")
        if len(set(points)) != n:
            raise DimensionMismatch("point labels must be unique")
        rows = tuple(tuple(row) for row in self.dist)
        if len(rows) != n or any(len(row) != n for row in rows):
            raise DimensionMismatch(f"distance matrix must be {n}x{n}")
        if not 0 <= self.basepoint < n:
            raise DimensionMismatch(f"basepoint index {self.basepoint} out of range")
        object.__setattr__(self, "points", points)
        object.__setattr__(self, "dist", rows)
        object.__setattr__(self, "_index", {p: i for i, p in enumerate(points)})
        object.__setattr__(self, "_exact", not any(isinstance(v, float) for row in rows for v in row))

    @classmethod
    def from_matrix(cls, points: Sequence, matrix, basepoint: int = 0, exact: bool = True):
        return cls(tuple(points), tuple(tuple(scalar(v, exact) for v in row) for row in matrix), basepoint)

    @property
    def size(self) -> int:
        return len(self.points)

    @property
    def N(self) -> int:
        return len(self.points) - 1

    @property
    def exact(self) -> bool:
        return self._exact

    def index(self, label) -> int:
        try:
            return self._index[str(label)]
        except KeyError:
            raise UnknownPoint(f"unknown point {label!r}") from None

    def d(self, a, b):
        return self.dist[self.index(a)][self.index(b)]

    def diameter(self):
        return max(max(row) for row in self.dist)

    def pairs(self):
        """All unordered index pairs (i, j) with i < j."""
        n = self.size
        return ((i, j) for i in range(n) for j in range(i + 1, n))

    def relabel_basepoint(self, label) -> "FiniteMetricSpace":
        return FiniteMetricSpace(self.points, self.dist, self.index(label))


@dataclass(frozen=True)
class WeightedGraph:
    vertices: tuple
    edges: dict  # (i, j) with i < j -> positive weight

    def __post_init__(self):
        vertices = tuple(str(v) for v in self.vertices)
        if len(set(vertices)) != len(vertices):
            raise DimensionMismatch("vertex labels must be unique")
        clean = {}
        for (i, j), w in dict(self.edges).items():
            if i == j:
                raise ValueError(f"self-loop at {vertices[i]!r}")
            if not w > 0:
                raise ValueError(f"edge weight must be positive, got {w}")
            key = (min(i, j), max(i, j))
            clean[key] = min(w, clean[key]) if key in clean else w  # parallel edges: the shortest wins
        object.__setattr__(self, "vertices", vertices)
        object.__setattr__(self, "edges", clean)

    @classmethod
    def from_edges(cls, vertices: Sequence, edges: Iterable, exact: bool = True):
        """Build from ``(u, v, w)`` triples; u, v are labels or indices."""
        vertices = tuple(str(v) for v in vertices)
        index = {v: i for i, v in enumerate(vertices)}

        def resolve(u):
            if isinstance(u, int) and not isinstance(u, bool):
                if not 0 <= u < len(vertices):
                    raise UnknownPoint(f"vertex index {u} out of range")
                return u
            try:
                return index[str(u)]
            except KeyError:
                raise UnknownPoint(f"unknown vertex {u!r}") from None

        out = {}
        for u, v, w in edges:
            i, j = resolve(u), resolve(v)
            key = (min(i, j), max(i, j)) if i != j else (i, j)
            w = scalar(w, exact)
            out[key] = min(w, out[key]) if key in out else w
        return cls(vertices, out)

    def adjacency(self):
        adj = [[] for _ in self.vertices]
        for (i, j), w in self.edges.items():
            adj[i].append((j, w))
            adj[j].append((i, w))
        return adj


def _bfs_rows(adj, n):
    rows = []
    for s in range(n):
        row = [None] * n
        row[s] = 0
        queue = deque([s])
        while queue:
            u = queue.popleft()
            for v, _ in adj[u]:
                if row[v] is None:
                    row[v] = row[u] + 1
                    queue.append(v)
        rows.append(row)
    return rows


def _dijkstra_rows(adj, n, zero):
    rows = []
    for s in range(n):
        row = [None] * n
        heap = [(zero, s)]
        while heap:
            du, u = heapq.heappop(heap)
            if row[u] is not None:
                continue
            row[u] = du
            for v, w in adj[u]:
                if row[v] is None:
                    heapq.heappush(heap, (du + w, v))
        rows.append(row)
    return rows


def _floyd_rows(graph, n, zero):
    D = [[None] * n for _ in range(n)]
    for i in range(n):
        D[i][i] = zero
    for (i, j), w in graph.edges.items():
        if D[i][j] is None or w < D[i][j]:
            D[i][j] = D[j][i] = w
    for k in range(n):
        Dk = D[k]
        for i in range(n):
            dik = D[i][k]
            if dik is None:
                continue
            Di = D[i]
            for j in range(n):
                dkj = Dk[j]
                if dkj is not None:
                    cand = dik + dkj
                    if Di[j] is None or cand < Di[j]:
                        Di[j] = cand
    return D


def geodesic_metric(graph: WeightedGraph, basepoint=None, method: str = "auto") -> FiniteMetricSpace:
    """Shortest-path metric of a connected weighted graph.

    ``method`` is ``"floyd"``, ``"dijkstra"``, ``"bfs"`` (unit weights only) or
    ``"auto"``: BFS when all weights are equal, Floyd–Warshall for small dense
    graphs, Dijkstra per source otherwise.
    """
    n = len(graph.vertices)
    weights = set(graph.edges.values())
    exact = not any(isinstance(w, float) for w in weights)
    zero = ZERO if exact else 0.0
    if method == "auto":
        if len(weights) <= 1:
            method = "bfs"
        elif n <= 64 or len(graph.edges) * 8 > n * n:
            method = "floyd"
        else:
            method = "dijkstra"
    if method == "bfs":
        if len(weights) > 1:
            raise ValueError("bfs requires equal edge weights")
        unit = weights.pop() if weights else ONE
        rows = _bfs_rows(graph.adjacency(), n)
        rows = [[None if v is None else unit * v for v in row] for row in rows]
        if exact:
            rows = [[None if v is None else mpq(v) for v in row] for row in rows]
    elif method == "dijkstra":
        rows = _dijkstra_rows(graph.adjacency(), n, zero)
    elif method == "floyd":
        rows = _floyd_rows(graph, n, zero)
    else:
        raise ValueError(f"unknown shortest-path method {method!r}")
    for i, row in enumerate(rows):
        for j, v in enumerate(row):
            if v is None:
                raise DisconnectedGraph(
                    f"no path between {graph.vertices[i]!r} and {graph.vertices[j]!r}"
                )
    base = 0
    if basepoint is not None:
        try:
            base = graph.vertices.index(str(basepoint))
        except ValueError:
            raise UnknownPoint(f"unknown basepoint {basepoint!r}") from None
    return FiniteMetricSpace(graph.vertices, tuple(tuple(r) for r in rows), base)


def complete_graph(space: FiniteMetricSpace) -> WeightedGraph:
    """The complete graph weighted by the metric."""
    return WeightedGraph(space.points, {(i, j): space.dist[i][j] for i, j in space.pairs()})


@dataclass(frozen=True)
class Violation:
    kind: str  # "shape", "diagonal", "symmetry", "positivity" or "triangle"
    indices: tuple

    def describe(self, space=None):
        if space is None:
            return f"{self.kind} {self.indices}"
        return f"{self.kind} {tuple(space.points[i] for i in self.indices)}"


@dataclass
class ValidationReport:
    violations: list

    @property
    def ok(self) -> bool:
        return not self.violations

    def __bool__(self):
        return self.ok

    def by_kind(self, kind):
        return [v for v in self.violations if v.kind == kind]


def validate_metric(space: FiniteMetricSpace, tol: float = 0.0) -> ValidationReport:
    """List every violated metric axiom. Triangle check is O(n^3)."""
    D = space.dist
    n = space.size
    out = []
    for i in range(n):
        if D[i][i] != 0:
            out.append(Violation("diagonal", (i,)))
    for i, j in space.pairs():
        if D[i][j] != D[j][i]:
            out.append(Violation("symmetry", (i, j)))
        if not (D[i][j] > 0 and D[j][i] > 0):
            out.append(Violation("positivity", (i, j)))
    # with a symmetric matrix (a, b, c) and (c, b, a) are the same violation
    symmetric = not any(v.kind == "symmetry" for v in out)
    for a in range(n):
        Da = D[a]
        for b in range(n):
            dab = Da[b]
            Db = D[b]
            for c in range(n):
                if a == c or b == a or b == c or (symmetric and a > c):
                    continue
                bound = dab + Db[c]
                if Da[c] > (bound + tol if tol else bound):
                    out.append(Violation("triangle", (a, b, c)))
    return ValidationReport(out)


@dataclass(frozen=True)
class VertexOrder:
    """A bijection position -> point index; position 0 is the basepoint.

    ``points`` optionally carries the space's labels so that callers can name
    vertices by label; integers always mean order positions.
    """

    indices: tuple
    points: tuple = field(default=None, compare=False)
    _position: tuple = field(default=None, compare=False, repr=False)

    def __post_init__(self):
        indices = tuple(int(i) for i in self.indices)
        if sorted(indices) != list(range(len(indices))):
            raise OrderViolation("order must be a permutation of the point indices")
        if self.points is not None and len(self.points) != len(indices):
            raise DimensionMismatch("label list does not match the order length")
        pos = [0] * len(indices)
        for p, i in enumerate(indices):
            pos[i] = p
        object.__setattr__(self, "indices", indices)
        object.__setattr__(self, "_position", tuple(pos))

    def __len__(self):
        return len(self.indices)

    @property
    def N(self) -> int:
        return len(self.indices) - 1

    def point(self, position: int) -> int:
        return self.indices[position]

    def position(self, index: int) -> int:
        return self._position[index]

    def resolve(self, x) -> int:
        """Order position of a label (str) or a position (int)."""
        if isinstance(x, str):
            if self.points is None:
                raise UnknownPoint(f"order carries no labels, cannot resolve {x!r}")
            try:
                return self._position[self.points.index(x)]
            except ValueError:
                raise UnknownPoint(f"unknown point {x!r}") from None
        x = int(x)
        if not 0 <= x < len(self.indices):
            raise UnknownPoint(f"position {x} out of range")
        return x

    def label(self, position: int):
        if self.points is None:
            return position
        return self.points[self.indices[position]]

    def check(self, space: FiniteMetricSpace) -> "VertexOrder":
        """Validate against a space and attach its labels."""
        if len(self.indices) != space.size:
            raise DimensionMismatch(f"order has {len(self.indices)} entries, space has {space.size} points")
        if self.indices[0] != space.basepoint:
            raise OrderViolation("order must start at the basepoint")
        if self.points == space.points:
            return self
        return VertexOrder(self.indices, space.points)

    def labels(self):
        return [self.label(p) for p in range(len(self.indices))]

    @classmethod
    def from_labels(cls, space: FiniteMetricSpace, labels: Sequence) -> "VertexOrder":
        if len(labels) != space.size:
            raise DimensionMismatch(f"order lists {len(labels)} points, space has {space.size}")
        return cls(tuple(space.index(l) for l in labels), space.points).check(space)

    @classmethod
    def natural(cls, space: FiniteMetricSpace) -> "VertexOrder":
        """Basepoint first, then the remaining points by index."""
        b = space.basepoint
        return cls((b,) + tuple(i for i in range(space.size) if i != b), space.points)
