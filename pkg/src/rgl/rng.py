"""Counter-based random streams.

Every random quantity in the lab is drawn from numpy's Philox4x64 generator.
A stream is identified by a 128-bit key; draw ``k`` of a stream lives in
block ``k // BLOCK`` and each block is generated from its own counter
offset, so a value depends only on ``(key, position)`` and never on how
the caller chunked its requests.
"""

import numpy as np

BLOCK = 1 << 16

# stream purposes under one trial key
EDGES = 0
STRATEGY = 1
DELETION = 2
AUX = 3


def derive_key(seed, *path):
    """128-bit Philox key for ``seed`` and an integer path (trial, purpose, ...)."""
    words = [int(seed) & 0xFFFFFFFFFFFFFFFF, *(int(p) for p in path)]
    return np.random.SeedSequence(words).generate_state(2, np.uint64)


def derive_seed(seed, *path):
    """A 64-bit child seed, used to hand one trial its own master seed."""
    words = [int(seed) & 0xFFFFFFFFFFFFFFFF, *(int(p) for p in path)]
    return int(np.random.SeedSequence(words).generate_state(1, np.uint64)[0])


def block_generator(key, block):
    bitgen = np.random.Philox(key=key, counter=[0, 0, 0, int(block)])
    return np.random.Generator(bitgen)


class BlockedDraws:
    """Random-access sequence of draws backed by Philox blocks.

    ``draw(gen, size)`` must return an array whose first axis has length
    ``size``.  Only the most recently used block is cached.
    """

    def __init__(self, key, draw):
        self.key = np.asarray(key, dtype=np.uint64)
        self.draw = draw
        self._block_index = -1
        self._block = None

    def _get_block(self, b):
        if b != self._block_index:
            self._block = self.draw(block_generator(self.key, b), BLOCK)
            self._block_index = b
        return self._block

    def __getitem__(self, pos):
        return self._get_block(pos // BLOCK)[pos % BLOCK]

    def take(self, start, count):
        """Draws at positions ``start .. start+count-1``."""
        if count <= 0:
            return self.draw(block_generator(self.key, 0), 0)
        first, last = start // BLOCK, (start + count - 1) // BLOCK
        parts = []
        for b in range(first, last + 1):
            blk = self._get_block(b)
            lo = start - b * BLOCK if b == first else 0
            hi = start + count - b * BLOCK if b == last else BLOCK
            parts.append(blk[lo:hi])
        return parts[0].copy() if len(parts) == 1 else np.concatenate(parts)


def integer_draws(key, high):
    """Uniform integers in ``[0, high)``, one per position."""
    return BlockedDraws(key, lambda g, size: g.integers(0, high, size=size, dtype=np.int64))


def uniform_draws(key):
    return BlockedDraws(key, lambda g, size: g.random(size))
