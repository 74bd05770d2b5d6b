"""Edge-coloring policies.

Every online strategy answers ``decide(state, u, v)`` without touching the
state, and ``play(state, us, vs)`` decides and applies a whole batch.  A
strategy's coin for round k is draw k of its own Philox stream, so the
per-edge and batched paths make identical choices.

Two-color convention: color 0 is blue, color 1 is red.
"""

import enum
from dataclasses import dataclass, field
from typing import NamedTuple, Optional

import numba
import numpy as np

from . import rng
from .graph_state import DISCARD, ProcessState, _apply_edge
from .oracles import build_projective_plane, is_prime
from .orientation import exact_r_orientation, greedy_indeg_coloring, simple_edges

BLUE = 0
RED = 1


class Tag(enum.IntEnum):
    RANDOM = 0
    ORIENT_LEVEL = 1
    ORIENT_OVERFLOW = 2
    ISO_NONE_RANDOM = 3
    ISO_BOTH_RANDOM = 4
    ISO_NEIGHBOR_BLUE = 5
    ISO_NEIGHBOR_RED = 6
    PLANE_LINE = 7
    PLANE_DISCARD = 8
    BLOCK_TABLE = 9
    PHASE_ONE = 10
    BOTH_IN_R = 11
    OUTSIDE_R = 12
    OFFLINE = 13


class Decision(NamedTuple):
    color: int
    head: int = -1
    tag: Tag = Tag.RANDOM


KINDS = ("RandomColoring", "Orient", "IsolatedMatching", "OfflineOrientation",
         "ProjectivePlane", "BlockMatrix", "AdaptiveTwoPhase")

DEFAULT_A1 = [[1, 1, 0], [1, 1, 0], [0, 0, 0]]


@dataclass
class StrategySpec:
    kind: str
    r: int
    seed: int = 0
    eps: Optional[float] = None
    q: Optional[int] = None
    A1: Optional[list] = None
    t: Optional[float] = None

    def validate(self):
        if self.kind not in KINDS:
            raise ValueError(f"unknown strategy kind {self.kind!r}")
        if self.r < 1:
            raise ValueError("r must be at least 1")
        if self.kind in ("IsolatedMatching", "AdaptiveTwoPhase") and self.r != 2:
            raise ValueError(f"{self.kind} needs r = 2")
        if self.kind == "AdaptiveTwoPhase" and not (self.t is not None and 0 < self.t < 0.5):
            raise ValueError("AdaptiveTwoPhase needs 0 < t < 1/2")
        if self.kind == "ProjectivePlane":
            if self.q is None or not is_prime(self.q):
                raise ValueError("ProjectivePlane needs a prime q")
            if self.r != self.q**2 + self.q + 1:
                raise ValueError(f"ProjectivePlane with q={self.q} needs r={self.q**2 + self.q + 1}")
        if self.kind == "BlockMatrix":
            a1 = np.asarray(DEFAULT_A1 if self.A1 is None else self.A1)
            if a1.ndim != 2 or a1.shape[0] != a1.shape[1]:
                raise ValueError("A1 must be square")
            if not np.array_equal(a1, a1.T) or not np.isin(a1, (0, 1)).all():
                raise ValueError("A1 must be a symmetric 0/1 matrix")
            if self.r != 2:
                raise ValueError("BlockMatrix needs r = 2")
        if self.kind == "OfflineOrientation" and not (self.eps is not None and 0 <= self.eps <= 1):
            raise ValueError("OfflineOrientation needs 0 <= eps <= 1")
        return self

    def to_dict(self):
        out = {"kind": self.kind, "r": self.r, "seed": self.seed}
        for name in ("eps", "q", "A1", "t"):
            if getattr(self, name) is not None:
                out[name] = getattr(self, name)
        return out

    @classmethod
    def from_dict(cls, d):
        return cls(**d).validate()


class Strategy:
    """Base class: subclasses define ``decide`` and usually a faster ``play``."""

    online = True

    def __init__(self, r, key):
        self.r = r
        self.key = key

    def decide(self, state, u, v):
        raise NotImplementedError

    def step(self, state, u, v):
        d = self.decide(state, u, v)
        state.add_colored_edge(u, v, d.color, d.head, d.tag.name)
        return d

    def decide_batch(self, state, us, vs):
        """Decisions for a batch whose choices do not depend on earlier batch edges."""
        out = [self.decide(state, int(u), int(v)) for u, v in zip(us, vs)]
        colors = np.array([d.color for d in out], dtype=np.int64)
        heads = np.array([d.head for d in out], dtype=np.int64)
        tags = np.array([int(d.tag) for d in out], dtype=np.int64)
        return colors, heads, tags

    def play(self, state, us, vs):
        colors, heads, tags = self.decide_batch(state, us, vs)
        _apply_logged(state, us, vs, colors, heads, tags)
        return colors, heads, tags


def _apply_logged(state, us, vs, colors, heads, tags):
    names = None if state.edge_log is None else [Tag(t).name for t in tags]
    state.apply_batch(us, vs, colors, heads, names)


class RandomColoring(Strategy):
    def __init__(self, r, key):
        super().__init__(r, key)
        self.draws = rng.integer_draws(key, r)

    def decide(self, state, u, v):
        return Decision(int(self.draws[state.round]), -1, Tag.RANDOM)

    def decide_batch(self, state, us, vs):
        k = len(us)
        return (self.draws.take(state.round, k), np.full(k, -1, dtype=np.int64),
                np.full(k, int(Tag.RANDOM), dtype=np.int64))


@numba.njit(cache=True, nogil=True)
def _orient_choice(in_degree, u, v, coin, r):
    head = v if coin else u
    d = in_degree[head] + 1
    if d < r:
        return d - 1, head, 1
    return r - 1, head, 2


@numba.njit(cache=True, nogil=True)
def _play_orient(parent, size, stats, degree, in_degree, mate, mate_color, counts,
                 us, vs, coins, r, colors, heads, tags):
    for i in range(us.shape[0]):
        c, h, tg = _orient_choice(in_degree, us[i], vs[i], coins[i], r)
        colors[i] = c
        heads[i] = h
        tags[i] = tg
        _apply_edge(parent, size, stats, degree, in_degree, mate, mate_color, counts,
                    us[i], vs[i], c, h)


class Orient(Strategy):
    """Random orientation; color by the head's new in-degree, overflow into the last color."""

    def __init__(self, r, key):
        super().__init__(r, key)
        self.coins = rng.integer_draws(key, 2)

    def decide(self, state, u, v):
        c, h, tg = _orient_choice(state.in_degree, u, v, self.coins[state.round], self.r)
        return Decision(int(c), int(h), Tag(tg))

    def play(self, state, us, vs):
        return _play_fused(state, us, vs, self.coins, _play_orient, self.r)


def _play_fused(state, us, vs, coins, kernel, *extra):
    us = np.ascontiguousarray(us, dtype=np.int64)
    vs = np.ascontiguousarray(vs, dtype=np.int64)
    if np.any(us == vs):
        raise ValueError("batch contains a self-loop")
    k = len(us)
    draws = coins.take(state.round, k)
    colors = np.empty(k, dtype=np.int64)
    heads = np.empty(k, dtype=np.int64)
    tags = np.empty(k, dtype=np.int64)
    kernel(*state._arrays(), us, vs, draws, *extra, colors, heads, tags)
    if state.edge_log is not None:
        state._log_batch(us, vs, colors, heads, [Tag(t).name for t in tags])
    state.round += k
    return colors, heads, tags


@numba.njit(cache=True, nogil=True)
def _iso_choice(degree, mate, mate_color, u, v, coin):
    seen_blue = False
    seen_red = False
    for x in (u, v):
        if degree[x] == 1 and degree[mate[x]] == 1:
            if mate_color[x] == 0:
                seen_blue = True
            else:
                seen_red = True
    if seen_blue and not seen_red:
        return 1, 5
    if seen_red and not seen_blue:
        return 0, 6
    if seen_blue:
        return coin, 4
    return coin, 3


@numba.njit(cache=True, nogil=True)
def _play_isolated(parent, size, stats, degree, in_degree, mate, mate_color, counts,
                   us, vs, coins, colors, heads, tags):
    for i in range(us.shape[0]):
        c, tg = _iso_choice(degree, mate, mate_color, us[i], vs[i], coins[i])
        colors[i] = c
        heads[i] = -1
        tags[i] = tg
        _apply_edge(parent, size, stats, degree, in_degree, mate, mate_color, counts,
                    us[i], vs[i], c, -1)


class IsolatedMatching(Strategy):
    """Two colors: avoid the color of an adjacent isolated edge when it is unique."""

    def __init__(self, r, key):
        if r != 2:
            raise ValueError("IsolatedMatching needs r = 2")
        super().__init__(r, key)
        self.coins = rng.integer_draws(key, 2)

    def decide(self, state, u, v):
        c, tg = _iso_choice(state.degree, state.mate, state.mate_color, u, v,
                            self.coins[state.round])
        return Decision(int(c), -1, Tag(tg))

    def play(self, state, us, vs):
        return _play_fused(state, us, vs, self.coins, _play_isolated)


def block_of(vertices, n, k):
    """Equal contiguous blocks: vertex v lies in block ``floor(v k / n)``."""
    return np.asarray(vertices, dtype=np.int64) * k // n


class ProjectivePlaneStrategy(Strategy):
    """Color by the line through the endpoints' blocks; same-block edges are discarded."""

    def __init__(self, q, key=None):
        self.plane = build_projective_plane(q)
        super().__init__(self.plane.r, key)

    def decide(self, state, u, v):
        i, j = block_of([u, v], state.n, self.r)
        if i == j:
            return Decision(DISCARD, -1, Tag.PLANE_DISCARD)
        return Decision(self.plane.line_of(i, j), -1, Tag.PLANE_LINE)

    def decide_batch(self, state, us, vs):
        bi = block_of(us, state.n, self.r)
        bj = block_of(vs, state.n, self.r)
        colors = self.plane.pair_to_line[bi, bj]
        tags = np.where(colors == DISCARD, int(Tag.PLANE_DISCARD), int(Tag.PLANE_LINE))
        return colors, np.full(len(us), -1, dtype=np.int64), tags


class BlockMatrixStrategy(Strategy):
    """Color 0 where the block pair's entry of ``A1`` is 1, else color 1."""

    def __init__(self, A1=None, key=None):
        super().__init__(2, key)
        self.A1 = np.asarray(DEFAULT_A1 if A1 is None else A1, dtype=np.int64)
        self.k = self.A1.shape[0]

    def decide(self, state, u, v):
        i, j = block_of([u, v], state.n, self.k)
        return Decision(0 if self.A1[i, j] else 1, -1, Tag.BLOCK_TABLE)

    def decide_batch(self, state, us, vs):
        bi = block_of(us, state.n, self.k)
        bj = block_of(vs, state.n, self.k)
        colors = np.where(self.A1[bi, bj] == 1, 0, 1).astype(np.int64)
        k = len(us)
        return colors, np.full(k, -1, dtype=np.int64), np.full(k, int(Tag.BLOCK_TABLE), dtype=np.int64)


class AdaptiveTwoPhase(Strategy):
    """Red for the first ``floor(t n)`` rounds, then red only inside the touched set R."""

    def __init__(self, t, key=None):
        if not 0 < t < 0.5:
            raise ValueError("t must lie in (0, 1/2)")
        super().__init__(2, key)
        self.t = t
        self.in_r = None

    def switch_round(self, n):
        return int(np.floor(self.t * n))

    def _fix_r(self, state):
        if self.in_r is None:
            self.in_r = state.degree >= 1

    def decide(self, state, u, v):
        if state.round < self.switch_round(state.n):
            return Decision(RED, -1, Tag.PHASE_ONE)
        self._fix_r(state)
        if self.in_r[u] and self.in_r[v]:
            return Decision(RED, -1, Tag.BOTH_IN_R)
        return Decision(BLUE, -1, Tag.OUTSIDE_R)

    def play(self, state, us, vs):
        us = np.asarray(us, dtype=np.int64)
        vs = np.asarray(vs, dtype=np.int64)
        cut = max(0, min(len(us), self.switch_round(state.n) - state.round))
        k = len(us)
        colors = np.full(k, RED, dtype=np.int64)
        tags = np.full(k, int(Tag.PHASE_ONE), dtype=np.int64)
        heads = np.full(k, -1, dtype=np.int64)
        _apply_logged(state, us[:cut], vs[:cut], colors[:cut], heads[:cut], tags[:cut])
        if cut < k:
            self._fix_r(state)
            inside = self.in_r[us[cut:]] & self.in_r[vs[cut:]]
            colors[cut:] = np.where(inside, RED, BLUE)
            tags[cut:] = np.where(inside, int(Tag.BOTH_IN_R), int(Tag.OUTSIDE_R))
            _apply_logged(state, us[cut:], vs[cut:], colors[cut:], heads[cut:], tags[cut:])
        return colors, heads, tags


@dataclass
class OfflineResult:
    feasible: bool
    colors: Optional[np.ndarray] = None
    kept: Optional[np.ndarray] = None
    largest: list = field(default_factory=list)
    state: Optional[ProcessState] = None
    witness: Optional[object] = None
    us: Optional[np.ndarray] = None
    vs: Optional[np.ndarray] = None


def offline_orientation_coloring(us, vs, n, r, eps, key):
    """Orient with in-degree <= r, color in-edges distinctly, then delete each edge w.p. eps.

    ``largest`` holds the largest surviving component per color.  An
    infeasible orientation is reported with its density witness.
    """
    us, vs = simple_edges(us, vs, n)
    orient = exact_r_orientation(us, vs, n, r)
    if not hasattr(orient, "heads"):
        return OfflineResult(False, witness=orient, us=us, vs=vs)
    colors = greedy_indeg_coloring(orient, r)
    kept = rng.uniform_draws(key).take(0, len(us)) >= eps
    state = ProcessState(n, r)
    state.apply_batch(orient.tails[kept], orient.heads[kept], colors[kept], orient.heads[kept])
    largest = [state.largest(c) for c in range(r)]
    return OfflineResult(True, colors, kept, largest, state, None, orient.tails, orient.heads)


class OfflineOrientation:
    """Offline pipeline wrapper so it can sit in an experiment config."""

    online = False

    def __init__(self, r, eps, key):
        self.r = r
        self.eps = eps
        self.key = key

    def run(self, us, vs, n):
        return offline_orientation_coloring(us, vs, n, self.r, self.eps, self.key)


def build_strategy(spec, trial_seed=0):
    """Instantiate ``spec`` for one trial; coins are keyed by (trial_seed, spec.seed)."""
    spec.validate()
    key = rng.derive_key(trial_seed, rng.STRATEGY, spec.seed)
    if spec.kind == "RandomColoring":
        return RandomColoring(spec.r, key)
    if spec.kind == "Orient":
        return Orient(spec.r, key)
    if spec.kind == "IsolatedMatching":
        return IsolatedMatching(spec.r, key)
    if spec.kind == "ProjectivePlane":
        return ProjectivePlaneStrategy(spec.q, key)
    if spec.kind == "BlockMatrix":
        return BlockMatrixStrategy(spec.A1, key)
    if spec.kind == "AdaptiveTwoPhase":
        return AdaptiveTwoPhase(spec.t, key)
    return OfflineOrientation(spec.r, spec.eps, rng.derive_key(trial_seed, rng.DELETION, spec.seed))
