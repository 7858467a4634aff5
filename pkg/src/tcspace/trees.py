"""Spanning trees compatible with a vertex order.

A compatible tree is stored as a parent array over order positions with
``parent[0] == -1`` and ``parent[n] < n``; root paths are then decreasing.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from math import factorial

from .errors import TooLarge
from .guards import guard_n
from .metric import ZERO, FiniteMetricSpace, VertexOrder


@dataclass(frozen=True)
class CompatibleTree:
    order: VertexOrder
    parent: tuple  # parent[n] over positions, parent[0] == -1

    def __post_init__(self):
        parent = tuple(int(p) for p in self.parent)
        if len(parent) != len(self.order) or parent[0] != -1:
            raise ValueError("parent array must have one entry per position and start with -1")
        for n in range(1, len(parent)):
            if not 0 <= parent[n] < n:
                raise ValueError(f"parent({n}) = {parent[n]} is not smaller than {n}")
        object.__setattr__(self, "parent", parent)

    def edges(self):
        """Edges as (child, parent) position pairs."""
        return [(n, self.parent[n]) for n in range(1, len(self.parent))]

    def root_path(self, n):
        out = [n]
        while n:
            n = self.parent[n]
            out.append(n)
        return out

    def path(self, a, b):
        """Tree path between positions a and b as two sides ending at the meeting point."""
        return path_sides(self.parent, a, b)


def path_sides(parent, a, b):
    """(a..m, b..m): the two halves of the tree path, m = meeting point."""
    side_a, side_b = [a], [b]
    while a != b:
        if a > b:
            a = parent[a]
            side_a.append(a)
        else:
            b = parent[b]
            side_b.append(b)
    return side_a, side_b


def count_trees(N: int) -> int:
    return factorial(N)


def parent_arrays(N: int, guard: int | None = None):
    """All N! parent arrays with parent[n] < n, in lexicographic order."""
    limit = guard_n() if guard is None else guard
    if N > limit:
        raise TooLarge(f"enumerating {N}! trees exceeds the guard N <= {limit}")
    ranges = [(-1,)] + [range(n) for n in range(1, N + 1)]
    return itertools.product(*ranges)


def enumerate_trees(order: VertexOrder, guard: int | None = None):
    for parent in parent_arrays(order.N, guard):
        yield CompatibleTree(order, parent)


def _positions(tree, space, x, y):
    order = tree.order
    return order.position(space.index(x)), order.position(space.index(y))


def meeting_point(tree: CompatibleTree, space: FiniteMetricSpace, x, y) -> str:
    """Label of the order-minimal vertex on the tree path from x to y."""
    a, b = _positions(tree, space, x, y)
    side_a, _ = path_sides(tree.parent, a, b)
    return space.points[tree.order.point(side_a[-1])]


def tree_distance(tree: CompatibleTree, space: FiniteMetricSpace, x, y):
    """Length of the tree path, each edge weighted by the ambient distance."""
    a, b = _positions(tree, space, x, y)
    return sum(
        (chain_length(side, tree.order, space) for side in path_sides(tree.parent, a, b)),
        ZERO,
    )


def chain_length(chain, order: VertexOrder, space: FiniteMetricSpace):
    D = space.dist
    pts = [order.point(p) for p in chain]
    return sum((D[u][v] for u, v in zip(pts, pts[1:])), ZERO)
