"""Seeded edge sources: the product-round model, G(n, m) and G(n, p)."""

import math
from dataclasses import asdict, dataclass
from typing import Optional

import numpy as np

from . import rng

PRODUCT = "product"
GNM = "gnm"
GNP = "gnp"
MODELS = (PRODUCT, GNM, GNP)


@dataclass(frozen=True)
class StreamConfig:
    n: int
    seed: int
    model: str = PRODUCT
    m: Optional[int] = None
    p: Optional[float] = None

    def __post_init__(self):
        if self.n < 2:
            raise ValueError("edge streams need n >= 2")
        if self.model not in MODELS:
            raise ValueError(f"unknown model {self.model!r}")
        if self.model in (PRODUCT, GNM) and (self.m is None or self.m < 0):
            raise ValueError(f"model {self.model} needs m >= 0")
        if self.model == GNM and self.m > self.n * (self.n - 1) // 2:
            raise ValueError("G(n, m) cannot have more than C(n, 2) edges")
        if self.model == GNP and (self.p is None or not 0.0 <= self.p <= 1.0):
            raise ValueError("G(n, p) needs 0 <= p <= 1")

    def to_dict(self):
        return {k: v for k, v in asdict(self).items() if v is not None}


def _pair_draw(n):
    def draw(gen, size):
        u = gen.integers(0, n, size=size, dtype=np.int64)
        v = gen.integers(0, n - 1, size=size, dtype=np.int64)
        v += v >= u
        return np.stack([u, v], axis=1)
    return draw


def product_pairs(n, key):
    """Unbounded stream of uniform unordered pairs of distinct vertices."""
    return rng.BlockedDraws(key, _pair_draw(n))


def _row_start(u, n):
    return u * (2 * n - u - 1) // 2


def pair_from_index(idx, n):
    """Decode lexicographic indices of pairs ``u < v`` in ``[0, C(n,2))``."""
    idx = np.asarray(idx, dtype=np.int64)
    # row u starts at u*(2n-u-1)/2
    u = np.floor((2 * n - 1 - np.sqrt((2.0 * n - 1) ** 2 - 8.0 * idx)) / 2).astype(np.int64)
    u = np.clip(u, 0, n - 2)
    # float rounding can land one row off near row boundaries
    u = np.where(_row_start(u, n) > idx, u - 1, u)
    u = np.where(idx >= _row_start(u + 1, n), u + 1, u)
    start = _row_start(u, n)
    v = idx - start + u + 1
    return u, v


def pair_index(u, v, n):
    u = np.asarray(u, dtype=np.int64)
    v = np.asarray(v, dtype=np.int64)
    lo, hi = np.minimum(u, v), np.maximum(u, v)
    return lo * (2 * n - lo - 1) // 2 + (hi - lo - 1)


def sample_gnm(n, m, gen):
    """m distinct pairs, uniformly, in uniformly random order."""
    total = n * (n - 1) // 2
    if m > total:
        raise ValueError("m exceeds C(n, 2)")
    if m == 0:
        return np.empty(0, dtype=np.int64), np.empty(0, dtype=np.int64)
    if m * 16 > total:
        # partial Fisher-Yates over all pair indices
        idx = np.arange(total, dtype=np.int64)
        for i in range(m):
            j = int(gen.integers(i, total))
            idx[i], idx[j] = idx[j], idx[i]
        chosen = idx[:m]
    else:
        seen = set()
        chosen = np.empty(m, dtype=np.int64)
        filled = 0
        while filled < m:
            batch = gen.integers(0, total, size=max(64, 2 * (m - filled)), dtype=np.int64)
            for x in batch.tolist():
                if x not in seen:
                    seen.add(x)
                    chosen[filled] = x
                    filled += 1
                    if filled == m:
                        break
    u, v = pair_from_index(chosen, n)
    # random endpoint order so (u, v) is not always u < v
    flip = gen.integers(0, 2, size=m).astype(bool)
    u2 = np.where(flip, v, u)
    v2 = np.where(flip, u, v)
    return u2, v2


class EdgeStream:
    """Edges of one model, fully determined by ``(seed, position)``.

    For the finite models the whole edge sequence is drawn on construction;
    the product model is generated lazily in Philox blocks.
    """

    def __init__(self, config, key=None):
        self.config = config
        self.key = rng.derive_key(config.seed, rng.EDGES) if key is None else key
        self.position = 0
        n = config.n
        if config.model == PRODUCT:
            self.length = config.m
            self._pairs = product_pairs(n, self.key)
            self._fixed = None
        else:
            gen = rng.block_generator(self.key, 0)
            if config.model == GNM:
                m = config.m
            else:
                m = int(gen.binomial(n * (n - 1) // 2, config.p))
            self._fixed = sample_gnm(n, m, gen)
            self.length = m

    def __len__(self):
        return self.length

    def remaining(self):
        return self.length - self.position

    def edge_at(self, pos):
        if pos >= self.length:
            raise IndexError(pos)
        if self._fixed is None:
            u, v = self._pairs[pos]
            return int(u), int(v)
        return int(self._fixed[0][pos]), int(self._fixed[1][pos])

    def next_edge(self):
        """Next ``(u, v)``, or ``None`` once the stream is exhausted."""
        if self.position >= self.length:
            return None
        edge = self.edge_at(self.position)
        self.position += 1
        return edge

    def take(self, count):
        """Up to ``count`` further edges as two int64 arrays."""
        count = min(count, self.remaining())
        start = self.position
        self.position += count
        if self._fixed is None:
            pairs = self._pairs.take(start, count)
            return pairs[:, 0].copy(), pairs[:, 1].copy()
        return (self._fixed[0][start:start + count].copy(),
                self._fixed[1][start:start + count].copy())

    def __iter__(self):
        while True:
            edge = self.next_edge()
            if edge is None:
                return
            yield edge


def interleave_fictitious(real_m, total_m, seed):
    """Uniform random subset of ``real_m`` positions in ``[0, total_m)``, sorted.

    The remaining positions are meant to carry freshly drawn fictitious edges.
    """
    if real_m > total_m or real_m < 0:
        raise ValueError(f"cannot place {real_m} real edges among {total_m} slots")
    gen = rng.block_generator(rng.derive_key(seed, rng.AUX), 0)
    return np.sort(gen.choice(total_m, size=real_m, replace=False))


def interleave(real_us, real_vs, total_m, n, seed):
    """Merge real edges into a longer stream of fictitious uniform edges.

    Returns ``(us, vs, is_real)``.
    """
    real_us = np.asarray(real_us, dtype=np.int64)
    real_vs = np.asarray(real_vs, dtype=np.int64)
    positions = interleave_fictitious(len(real_us), total_m, seed)
    pairs = product_pairs(n, rng.derive_key(seed, rng.AUX, 1)).take(0, total_m)
    us, vs = pairs[:, 0].copy(), pairs[:, 1].copy()
    us[positions] = real_us
    vs[positions] = real_vs
    is_real = np.zeros(total_m, dtype=bool)
    is_real[positions] = True
    return us, vs, is_real


@dataclass
class CouplingReport:
    n: int
    m: int
    fractions: list

    @property
    def min_fraction(self):
        return min(self.fractions)

    @property
    def mean_fraction(self):
        return float(np.mean(self.fractions))


def distinct_fraction(us, vs, n):
    if len(us) == 0:
        return 1.0
    return len(np.unique(pair_index(us, vs, n))) / len(us)


def coupling_check(n, m, trials, seed=0, strict=True):
    """Fraction of distinct edges among ``m`` product-model draws, per trial.

    With ``strict`` the sparse regime ``m <= n log n`` is enforced.
    """
    if strict and m > n * math.log(n):
        raise ValueError(f"m={m} exceeds n log n for n={n}")
    fractions = []
    for trial in range(trials):
        stream = EdgeStream(StreamConfig(n, rng.derive_seed(seed, trial), PRODUCT, m=m))
        us, vs = stream.take(m)
        fractions.append(distinct_fraction(us, vs, n))
    return CouplingReport(n, m, fractions)
