"""Edge orientations: online random and two-choice rules, exact offline r-orientation."""

from dataclasses import dataclass

import numba
import numpy as np

from .edges import pair_index
from .rng import integer_draws


@dataclass
class Orientation:
    """Directed version of an edge list; edge ``i`` points ``tails[i] -> heads[i]``."""

    n: int
    tails: np.ndarray
    heads: np.ndarray
    in_degree: np.ndarray

    def __len__(self):
        return len(self.heads)

    @property
    def max_in_degree(self):
        return int(self.in_degree.max()) if self.n else 0

    def consistent(self):
        return (int(self.in_degree.sum()) == len(self.heads)
                and np.array_equal(np.bincount(self.heads, minlength=self.n), self.in_degree))


@dataclass
class Infeasible:
    """Certificate that no orientation with in-degree <= r exists.

    ``vertices`` induces ``induced_edges > r * len(vertices)`` edges.
    """

    r: int
    vertices: np.ndarray
    induced_edges: int

    @property
    def density(self):
        return self.induced_edges / len(self.vertices)


def random_orient(u, v, coin):
    """Head of edge ``(u, v)`` under the fair-coin rule."""
    return v if coin else u


def two_choice_orient(u, v, in_degree, coin):
    """Head of ``(u, v)``: the endpoint of lower in-degree, coin on ties."""
    du, dv = in_degree[u], in_degree[v]
    if du < dv:
        return u
    if dv < du:
        return v
    return v if coin else u


def random_orientation(us, vs, n, key):
    """Orient every edge by an independent fair coin drawn from stream ``key``."""
    us = np.asarray(us, dtype=np.int64)
    vs = np.asarray(vs, dtype=np.int64)
    coins = integer_draws(key, 2).take(0, len(us)).astype(bool)
    heads = np.where(coins, vs, us)
    tails = np.where(coins, us, vs)
    return Orientation(n, tails, heads, np.bincount(heads, minlength=n).astype(np.int64))


@numba.njit(cache=True, nogil=True)
def _greedy_start(us, vs, n):
    heads = np.empty_like(us)
    tails = np.empty_like(us)
    indeg = np.zeros(n, dtype=np.int64)
    for i in range(us.shape[0]):
        u, v = us[i], vs[i]
        if indeg[v] < indeg[u]:
            u, v = v, u
        # u has the lower in-degree and receives the edge
        heads[i] = u
        tails[i] = v
        indeg[u] += 1
    return tails, heads, indeg


@numba.njit(cache=True, nogil=True)
def _path_reversal(n, tails, heads, indeg, r, inc_ptr, inc_edges):
    stamp_of = np.full(n, -1, dtype=np.int64)
    via = np.empty(n, dtype=np.int64)
    queue = np.empty(n, dtype=np.int64)
    stamp = 0
    for w in range(n):
        while indeg[w] > r:
            stamp += 1
            stamp_of[w] = stamp
            queue[0] = w
            q_head, q_tail = 0, 1
            found = -1
            while q_head < q_tail and found < 0:
                x = queue[q_head]
                q_head += 1
                for k in range(inc_ptr[x], inc_ptr[x + 1]):
                    e = inc_edges[k]
                    if heads[e] != x:
                        continue
                    y = tails[e]
                    if stamp_of[y] == stamp:
                        continue
                    stamp_of[y] = stamp
                    via[y] = e
                    if indeg[y] < r:
                        found = y
                        break
                    queue[q_tail] = y
                    q_tail += 1
            if found < 0:
                return w, queue[:q_tail].copy()
            y = found
            while y != w:
                e = via[y]
                x = heads[e]
                heads[e] = y
                tails[e] = x
                y = x
            indeg[found] += 1
            indeg[w] -= 1
    return -1, queue[:0].copy()


def simple_edges(us, vs, n):
    """Drop self-loops and collapse repeated pairs, keeping first occurrences."""
    us = np.asarray(us, dtype=np.int64)
    vs = np.asarray(vs, dtype=np.int64)
    keep = us != vs
    us, vs = us[keep], vs[keep]
    _, first = np.unique(pair_index(us, vs, n), return_index=True)
    first.sort()
    return us[first], vs[first]


def induced_edge_count(us, vs, vertices, n):
    mask = np.zeros(n, dtype=bool)
    mask[vertices] = True
    return int(np.count_nonzero(mask[us] & mask[vs]))


def exact_r_orientation(us, vs, n, r):
    """Orient a simple graph with every in-degree at most ``r``, or prove it impossible.

    Starts from a greedy lower-in-degree orientation, then repeatedly pushes
    excess in-degree along reversed edges to a vertex with spare capacity.
    When an overloaded vertex reaches no such vertex, the reached set is
    returned as an :class:`Infeasible` density witness.

    The input is assumed simple; use :func:`simple_edges` first.
    """
    us = np.ascontiguousarray(us, dtype=np.int64)
    vs = np.ascontiguousarray(vs, dtype=np.int64)
    if r < 0:
        raise ValueError("r must be non-negative")
    m = len(us)
    tails, heads, indeg = _greedy_start(us, vs, n)
    ends = np.concatenate([us, vs])
    order = np.argsort(ends, kind="stable")
    inc_edges = (order % m).astype(np.int64) if m else order.astype(np.int64)
    inc_ptr = np.zeros(n + 1, dtype=np.int64)
    np.cumsum(np.bincount(ends, minlength=n), out=inc_ptr[1:])
    stuck, reached = _path_reversal(n, tails, heads, indeg, r, inc_ptr, inc_edges)
    if stuck >= 0:
        vertices = np.sort(reached)
        return Infeasible(r, vertices, induced_edge_count(us, vs, vertices, n))
    return Orientation(n, tails, heads, indeg)


def greedy_indeg_coloring(orientation, r):
    """Give the in-edges of each vertex pairwise distinct colors ``0..r-1``.

    Every color class then has in-degree at most one at every vertex.
    """
    if len(orientation) and orientation.max_in_degree > r:
        raise ValueError(f"in-degree {orientation.max_in_degree} exceeds r={r}")
    heads = orientation.heads
    order = np.argsort(heads, kind="stable")
    sorted_heads = heads[order]
    group_start = np.searchsorted(sorted_heads, sorted_heads, side="left")
    colors = np.empty(len(heads), dtype=np.int64)
    colors[order] = np.arange(len(heads)) - group_start
    return colors
