"""Counter-based random streams.

Every random quantity is drawn from a Philox stream keyed by the run seed and
a tuple of integer keys (experiment tag, block index, ...). Streams never
depend on the worker layout, so results are reproducible for any
parallelism.
"""

from __future__ import annotations

import zlib

import numpy as np

__all__ = ["BLOCK", "tag", "stream", "block_streams"]

#: samples per stream block; fixed so partitions are seed-indexed
BLOCK = 4096


def tag(name: str) -> int:
    """Stable 32-bit key for a string label."""
    return zlib.crc32(name.encode())


def _key(k) -> int:
    if isinstance(k, str):
        return tag(k)
    k = int(k)
    if k < 0:
        raise ValueError("stream keys must be nonnegative")
    return k


def stream(seed: int, *keys) -> np.random.Generator:
    """Generator for the stream ``(seed, *keys)``."""
    if seed is None:
        raise ValueError("a seed is required")
    seed = int(seed)
    if not 0 <= seed < 2**64:
        raise ValueError("seed must be a 64-bit unsigned integer")
    ss = np.random.SeedSequence([seed & 0xFFFFFFFF, seed >> 32, *(_key(k) for k in keys)])
    return np.random.Generator(np.random.Philox(ss))


def block_streams(seed: int, samples: int, *keys):
    """Yield ``(start, stop, generator)`` covering ``range(samples)`` in fixed blocks."""
    for b, start in enumerate(range(0, samples, BLOCK)):
        yield start, min(samples, start + BLOCK), stream(seed, *keys, b)
