"""Colored multigraph under construction, with per-color component statistics.

All per-color union-find forests live in stacked ``(r, n)`` arrays so the
jitted kernels (and the strategy kernels built on top of them) can update
every statistic in O(alpha(n)) per edge.  Color 0 is "blue" and color 1
is "red" whenever two-color bookkeeping is discussed.
"""

import math
from dataclasses import dataclass, field
from typing import NamedTuple

import numba
import numpy as np

DISCARD = -1

# offsets into ProcessState.stats[c]
SUM_SQ = 0
LARGEST = 1


@numba.njit(cache=True, nogil=True)
def _find(parent, x):
    root = x
    while parent[root] != root:
        root = parent[root]
    while parent[x] != root:
        nxt = parent[x]
        parent[x] = root
        x = nxt
    return root


@numba.njit(cache=True, nogil=True)
def _union(parent, size, stats, u, v):
    ru = _find(parent, u)
    rv = _find(parent, v)
    a = size[ru]
    b = size[rv]
    if ru == rv:
        return False, a, b
    if a < b:
        ru, rv = rv, ru
    parent[rv] = ru
    size[ru] = a + b
    stats[SUM_SQ] += 2 * a * b
    if a + b > stats[LARGEST]:
        stats[LARGEST] = a + b
    return True, a, b


@numba.njit(cache=True, nogil=True)
def _apply_edge(parent, size, stats, degree, in_degree, mate, mate_color, counts,
                u, v, color, head):
    if color < 0:
        return False, 0, 0
    # matching bookkeeping, classified on the pre-edge state
    du = degree[u]
    dv = degree[v]
    if du == 0:
        counts[0] -= 1
    elif du == 1 and degree[mate[u]] == 1:
        counts[1 + mate_color[u]] -= 2
    if dv == 0:
        counts[0] -= 1
    elif dv == 1 and degree[mate[v]] == 1 and mate[v] != u:
        counts[1 + mate_color[v]] -= 2
    degree[u] = du + 1
    degree[v] = dv + 1
    if du == 0:
        mate[u] = v
        mate_color[u] = color
    if dv == 0:
        mate[v] = u
        mate_color[v] = color
    if du == 0 and dv == 0:
        counts[1 + color] += 2
    if head >= 0:
        in_degree[head] += 1
    return _union(parent[color], size[color], stats[color], u, v)


@numba.njit(cache=True, nogil=True)
def _apply_batch(parent, size, stats, degree, in_degree, mate, mate_color, counts,
                 us, vs, colors, heads):
    merges = 0
    for i in range(us.shape[0]):
        merged, _, _ = _apply_edge(parent, size, stats, degree, in_degree, mate,
                                   mate_color, counts, us[i], vs[i], colors[i], heads[i])
        if merged:
            merges += 1
    return merges


@numba.njit(cache=True, nogil=True)
def _labels(parent):
    out = np.empty(parent.shape[0], dtype=np.int64)
    for x in range(parent.shape[0]):
        out[x] = _find(parent, x)
    return out


class MergeReport(NamedTuple):
    was_merge: bool
    sizes_before: tuple


class ComponentTracker:
    """Union-find over ``n`` vertices with an exact running sum of squared sizes.

    Usually a view into one color row of a :class:`ProcessState`; a
    standalone tracker owns its arrays.
    """

    def __init__(self, n, parent=None, size=None, stats=None):
        if n < 1:
            raise ValueError("n must be at least 1")
        self.n = n
        self.parent = np.arange(n, dtype=np.int64) if parent is None else parent
        self.size = np.ones(n, dtype=np.int64) if size is None else size
        if stats is None:
            stats = np.array([n, 1], dtype=np.int64)
        self.stats = stats

    def find(self, x):
        return int(_find(self.parent, x))

    def union(self, u, v):
        merged, a, b = _union(self.parent, self.size, self.stats, u, v)
        return MergeReport(bool(merged), (int(a), int(b)))

    @property
    def sum_sq(self):
        return int(self.stats[SUM_SQ])

    @property
    def largest(self):
        return int(self.stats[LARGEST])

    def susceptibility(self):
        return self.sum_sq / self.n

    def labels(self):
        """Root of every vertex (compresses paths as a side effect)."""
        return _labels(self.parent)

    def component_sizes(self):
        roots = np.flatnonzero(self.parent == np.arange(self.n))
        return self.size[roots]


@dataclass
class TailFit:
    K: float
    c: float
    max_component: int
    empirical_tail: dict = field(repr=False)

    def bound(self, s):
        return self.K * math.exp(-self.c * s)

    def dominates(self):
        """True when ``K e^{-cs}`` is at least the empirical tail at every observed s."""
        log_k = math.log(self.K)
        return all(math.log(frac) <= log_k - self.c * s + 1e-9
                   for s, frac in self.empirical_tail.items())


def empirical_tail(sizes, n):
    """Fraction of vertices in components of order >= s, at each distinct size s.

    The tail is a step function that only drops just after a component size,
    so these points (together with s=1) determine it everywhere.
    """
    sizes = np.sort(np.asarray(sizes, dtype=np.int64))
    distinct, first = np.unique(sizes, return_index=True)
    # vertices in components of size >= distinct[j]
    suffix = np.cumsum(sizes[::-1])[::-1]
    tail = {1: 1.0}
    for s, i in zip(distinct.tolist(), first.tolist()):
        tail[s] = float(suffix[i]) / n
    return tail


def fit_tail(sizes, n):
    """Fit a ``K e^{-cs}`` envelope to the component-size tail."""
    sizes = np.asarray(sizes, dtype=np.int64)
    largest = int(sizes.max())
    tail = empirical_tail(sizes, n)
    if largest == 1:
        return TailFit(math.e, 1.0, 1, tail)
    s = np.array(list(tail.keys()), dtype=float)
    y = np.log(np.array(list(tail.values())))
    keep = np.exp(y) >= 10.0 / n
    if keep.sum() >= 2:
        slope = np.polyfit(s[keep], y[keep], 1)[0]
        c = max(-float(slope), 1e-9)
    else:
        c = 1.0
    log_k = float(np.max(y + c * s)) + 1e-12
    return TailFit(math.exp(log_k), c, largest, tail)


class LogRecord(NamedTuple):
    round: int
    u: int
    v: int
    color: int
    orient: str
    tag: str = ""


class ProcessState:
    """The evolving r-colored multigraph on ``n`` vertices.

    Alongside the per-color trackers it keeps total degrees, the in-degree
    ledger used by orientation strategies, and the counts of isolated
    vertices and of vertices on isolated monochromatic edges per color.
    """

    def __init__(self, n, r, log=False):
        if n < 1 or r < 1:
            raise ValueError(f"need n >= 1 and r >= 1, got n={n}, r={r}")
        self.n = n
        self.r = r
        self.parent = np.tile(np.arange(n, dtype=np.int64), (r, 1))
        self.size = np.ones((r, n), dtype=np.int64)
        self.stats = np.zeros((r, 2), dtype=np.int64)
        self.stats[:, SUM_SQ] = n
        self.stats[:, LARGEST] = 1
        self.degree = np.zeros(n, dtype=np.int64)
        self.in_degree = np.zeros(n, dtype=np.int64)
        self.mate = np.full(n, -1, dtype=np.int64)
        self.mate_color = np.zeros(n, dtype=np.int64)
        self.counts = np.zeros(r + 1, dtype=np.int64)
        self.counts[0] = n
        self.round = 0
        self.edge_log = [] if log else None

    def tracker(self, color):
        return ComponentTracker(self.n, self.parent[color], self.size[color], self.stats[color])

    def susceptibility(self, color):
        return int(self.stats[color, SUM_SQ]) / self.n

    def sum_sq(self, color):
        return int(self.stats[color, SUM_SQ])

    def largest(self, color):
        return int(self.stats[color, LARGEST])

    @property
    def matching_counts(self):
        """``{I, B, R, J}``: isolated, blue-matching, red-matching, rest."""
        iso = int(self.counts[0])
        blue = int(self.counts[1])
        red = int(self.counts[2]) if self.r >= 2 else 0
        rest = self.n - iso - int(self.counts[1:].sum())
        return {"I": iso, "B": blue, "R": red, "J": rest}

    def _arrays(self):
        return (self.parent, self.size, self.stats, self.degree, self.in_degree,
                self.mate, self.mate_color, self.counts)

    def _check_edge(self, u, v, color):
        if u == v:
            raise ValueError(f"self-loop at vertex {u}")
        if not (0 <= u < self.n and 0 <= v < self.n):
            raise ValueError(f"vertex out of range: ({u}, {v})")
        if color >= self.r or color < DISCARD:
            raise ValueError(f"color {color} out of range for r={self.r}")

    def add_colored_edge(self, u, v, color, head=-1, tag=""):
        self._check_edge(u, v, color)
        merged, a, b = _apply_edge(*self._arrays(), u, v, color, head)
        if self.edge_log is not None:
            self.edge_log.append(LogRecord(self.round, u, v, color, _orient_code(u, v, head), tag))
        self.round += 1
        return MergeReport(bool(merged), (int(a), int(b)))

    def apply_batch(self, us, vs, colors, heads=None, tags=None):
        """Apply pre-decided edges in order; returns the number of merges."""
        us = np.ascontiguousarray(us, dtype=np.int64)
        vs = np.ascontiguousarray(vs, dtype=np.int64)
        colors = np.ascontiguousarray(colors, dtype=np.int64)
        if heads is None:
            heads = np.full(us.shape[0], -1, dtype=np.int64)
        heads = np.ascontiguousarray(heads, dtype=np.int64)
        if us.size and (np.any(us == vs) or colors.max() >= self.r or colors.min() < DISCARD):
            raise ValueError("batch contains a self-loop or an out-of-range color")
        merges = _apply_batch(*self._arrays(), us, vs, colors, heads)
        if self.edge_log is not None:
            self._log_batch(us, vs, colors, heads, tags)
        self.round += int(us.shape[0])
        return int(merges)

    def _log_batch(self, us, vs, colors, heads, tags):
        for i in range(us.shape[0]):
            tag = "" if tags is None else tags[i]
            u, v, h = int(us[i]), int(vs[i]), int(heads[i])
            self.edge_log.append(LogRecord(self.round + i, u, v, int(colors[i]),
                                           _orient_code(u, v, h), tag))

    def fit_component_tail(self, color):
        return fit_tail(self.tracker(color).component_sizes(), self.n)


def new_state(n, r, log=False):
    return ProcessState(n, r, log=log)


def _orient_code(u, v, head):
    if head < 0:
        return "-"
    return "uv" if head == v else "vu"


def format_record(rec):
    color = "-" if rec.color == DISCARD else str(rec.color)
    line = f"{rec.round},{rec.u},{rec.v},{color},{rec.orient}"
    return f"{line},{rec.tag}" if rec.tag else line


def parse_record(line):
    parts = line.strip().split(",")
    if len(parts) not in (5, 6):
        raise ValueError(f"bad edge-log line: {line!r}")
    color = DISCARD if parts[3] == "-" else int(parts[3])
    if parts[4] not in ("uv", "vu", "-"):
        raise ValueError(f"bad orientation field: {parts[4]!r}")
    tag = parts[5] if len(parts) == 6 else ""
    return LogRecord(int(parts[0]), int(parts[1]), int(parts[2]), color, parts[4], tag)


def write_edge_log(records, fh):
    for rec in records:
        fh.write(format_record(rec) + "\n")


def read_edge_log(fh):
    return [parse_record(line) for line in fh if line.strip()]


def replay(records, n, r, log=False):
    """Rebuild a ProcessState from edge-log records."""
    state = ProcessState(n, r, log=log)
    for rec in records:
        if rec.round != state.round:
            raise ValueError(f"edge log out of order at round {rec.round}")
        if rec.orient == "uv":
            head = rec.v
        elif rec.orient == "vu":
            head = rec.u
        else:
            head = -1
        state.add_colored_edge(rec.u, rec.v, rec.color, head, rec.tag)
    return state
