"""Counter-keyed random streams.

Every Monte Carlo quantity in the package is drawn from a stream keyed by
``(seed, *tags, chunk)``.  Trials are grouped in fixed-size chunks so that the
draw belonging to trial ``t`` never depends on how many trials were requested
or on which worker produced it.
"""

from __future__ import annotations

import zlib
from typing import Iterator, Sequence

import numpy as np

# upper bound on float64 entries drawn per chunk (about 2 MB)
_CHUNK_ELEMENTS = 1 << 18
_MAX_CHUNK = 1024


def chunk_size(draw_shape: Sequence[int]) -> int:
    """Number of trials per chunk for draws of the given per-trial shape."""
    per_trial = int(np.prod(draw_shape)) if len(draw_shape) else 1
    return int(max(1, min(_MAX_CHUNK, _CHUNK_ELEMENTS // max(per_trial, 1))))


def tag_of(name: str) -> int:
    """Stable 32-bit tag for a string (``hash`` is salted per process)."""
    return zlib.crc32(name.encode("utf-8"))


def generator(seed: int, *key: int) -> np.random.Generator:
    ss = np.random.SeedSequence(int(seed), spawn_key=tuple(int(k) for k in key))
    return np.random.Generator(np.random.PCG64(ss))


def chunks(start: int, stop: int, size: int) -> Iterator[tuple[int, int, int]]:
    """Yield ``(chunk_index, lo, hi)`` with ``lo:hi`` offsets inside the chunk."""
    t = start
    while t < stop:
        c = t // size
        lo = t - c * size
        hi = min(stop - c * size, size)
        yield c, lo, hi
        t = c * size + hi


def subranges(start: int, stop: int, draw_shape: Sequence[int]) -> Iterator[tuple[int, int]]:
    """Split ``start .. stop`` into chunk-aligned pieces to bound memory use."""
    size = chunk_size(draw_shape)
    for c, lo, hi in chunks(start, stop, size):
        yield c * size + lo, c * size + hi


def normals(
    seed: int,
    tags: Sequence[int],
    start: int,
    stop: int,
    shape: Sequence[int],
) -> np.ndarray:
    """Standard normal draws for trials ``start .. stop-1``.

    Returns an array of shape ``(stop - start, *shape)``.  Trial ``t`` always
    receives the same block regardless of ``start``/``stop``.
    """
    shape = tuple(int(s) for s in shape)
    size = chunk_size(shape)
    out = np.empty((stop - start,) + shape)
    pos = 0
    for c, lo, hi in chunks(start, stop, size):
        block = generator(seed, *tags, c).standard_normal((hi,) + shape)
        out[pos : pos + hi - lo] = block[lo:hi]
        pos += hi - lo
    return out


def derive_seed(seed: int, *key: int) -> int:
    """A 64-bit seed for a deterministic sub-object (e.g. a test matrix)."""
    ss = np.random.SeedSequence(int(seed), spawn_key=tuple(int(k) for k in key))
    lo, hi = (int(w) for w in ss.generate_state(2, np.uint32))
    return lo | (hi << 32)
