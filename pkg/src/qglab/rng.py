"""Seeded, splittable random streams.

Every stream is a Philox counter-based generator keyed by the pair
``(seed, stream_index)``, so parallel tasks derive independent streams from
a master seed and their task index without sharing state. Gaussian draws go
through numpy's ziggurat transform, which is deterministic per platform.
"""
from __future__ import annotations

import numpy as np

_MASK64 = (1 << 64) - 1


def seeded_rng(seed: int, stream_index: int = 0) -> np.random.Generator:
    """Return the generator for stream ``stream_index`` of master ``seed``."""
    if seed < 0 or stream_index < 0:
        raise ValueError("seed and stream_index must be non-negative")
    key = np.array([seed & _MASK64, stream_index & _MASK64], dtype=np.uint64)
    return np.random.Generator(np.random.Philox(key=key))


def as_generator(rng) -> np.random.Generator:
    """Accept a Generator, an int seed (stream 0) or a ``(seed, stream)`` pair."""
    if isinstance(rng, np.random.Generator):
        return rng
    if isinstance(rng, tuple):
        return seeded_rng(*rng)
    if isinstance(rng, (int, np.integer)):
        return seeded_rng(int(rng))
    raise TypeError(f"cannot build a random generator from {type(rng).__name__}")
