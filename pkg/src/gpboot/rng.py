"""Counter-based random streams.

Every standard normal used by the library is addressed by a triple
``(seed, stream, counter)``.  The key of a Philox-4x64 generator is
``(seed, stream)``; the 64-bit output at flat position ``p`` comes from
counter block ``p // 4``.  Draw ``i`` of a Monte Carlo run that needs
``width`` normals per draw reads the block range starting at
``i * ceil(width / 4)``, so any subset of draws can be regenerated
independently and chunked/parallel evaluation reproduces the sequential
result bit for bit.

Normals are produced by inverse-CDF transform of 53-bit uniforms on the
open interval (0, 1).
"""

import numpy as np
from numpy.random import Philox
from scipy.special import ndtri

MASK64 = (1 << 64) - 1

RNG_DESCRIPTION = {
    "generator": "Philox4x64-10 (numpy.random.Philox)",
    "key": "(seed, stream)",
    "counter": "draw_index * ceil(width / 4) + block, one uint64 per normal",
    "transform": "u = ((raw >> 11) + 0.5) * 2**-53; z = Phi^{-1}(u)",
}


def _blocks(width):
    return (width + 3) // 4


def raw_block(seed, stream, start_block, n_values):
    """``n_values`` raw uint64 words beginning at counter block ``start_block``."""
    bitgen = Philox(
        key=[int(seed) & MASK64, int(stream) & MASK64],
        counter=[int(start_block) & MASK64, int(start_block) >> 64, 0, 0],
    )
    return bitgen.random_raw(n_values)


def raw_to_uniform(raw):
    return ((raw >> np.uint64(11)).astype(np.float64) + 0.5) * (2.0 ** -53)


def normals(seed, stream, start_draw, n_draws, width):
    """Standard normals for draws ``start_draw .. start_draw + n_draws - 1``.

    Returns an ``(n_draws, width)`` array.  Row ``j`` depends only on
    ``(seed, stream, start_draw + j, width)``.
    """
    if n_draws <= 0 or width <= 0:
        return np.zeros((max(n_draws, 0), max(width, 0)))
    w = _blocks(width)
    raw = raw_block(seed, stream, start_draw * w, n_draws * w * 4)
    u = raw_to_uniform(raw).reshape(n_draws, w * 4)[:, :width]
    return ndtri(u)


def uniforms(seed, stream, start_draw, n_draws, width):
    """Uniforms on (0, 1) with the same addressing as :func:`normals`."""
    w = _blocks(width)
    raw = raw_block(seed, stream, start_draw * w, n_draws * w * 4)
    return raw_to_uniform(raw).reshape(n_draws, w * 4)[:, :width]


class CounterStream:
    """Sequential view of one ``(seed, stream)`` pair.

    Exposes ``standard_normal`` so it can be passed wherever a
    ``numpy.random.Generator`` is accepted.  Each call consumes whole
    counter blocks, so results depend only on the call sequence.
    """

    def __init__(self, seed, stream=0, block=0):
        self.seed = int(seed)
        self.stream = int(stream)
        self.block = int(block)

    def standard_normal(self, size=None):
        shape = () if size is None else (size if isinstance(size, tuple) else (size,))
        count = int(np.prod(shape)) if shape else 1
        w = _blocks(count)
        raw = raw_block(self.seed, self.stream, self.block, w * 4)
        self.block += w
        z = ndtri(raw_to_uniform(raw)[:count])
        return z.reshape(shape) if shape else float(z[0])

    def uniform(self, size=None):
        shape = () if size is None else (size if isinstance(size, tuple) else (size,))
        count = int(np.prod(shape)) if shape else 1
        w = _blocks(count)
        raw = raw_block(self.seed, self.stream, self.block, w * 4)
        self.block += w
        u = raw_to_uniform(raw)[:count]
        return u.reshape(shape) if shape else float(u[0])

    def spawn(self, stream):
        return CounterStream(self.seed, stream)


def derive_stream(*ids):
    """Stable 64-bit stream id from a tuple of small integers."""
    h = 0xCBF29CE484222325
    for v in ids:
        for b in int(v).to_bytes(8, "little", signed=False):
            h ^= b
            h = (h * 0x100000001B3) & MASK64
    return h
