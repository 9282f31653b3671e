"""Seeded random-stream derivation.

Every randomized routine in this package takes an explicit
``numpy.random.Generator``. Independent streams are derived from a master
seed and an integer path (e.g. ``(protocol, shots, trial)``), so results
are reproducible and independent of execution order or worker count.
"""

from __future__ import annotations

import numpy as np

_MASK32 = 0xFFFFFFFF


def derive_rng(seed: int, *path: int) -> np.random.Generator:
    """Return a PCG64 generator for the stream identified by ``seed`` and ``path``.

    Each path component is split into two 32-bit words and fed into a
    ``SeedSequence`` spawn key, so distinct paths give statistically
    independent streams and the same path always gives the same stream.
    """
    seed = int(seed)
    if seed < 0:
        raise ValueError("seed must be a non-negative integer")
    words: list[int] = []
    for part in path:
        part = int(part)
        if part < 0:
            raise ValueError("stream path components must be non-negative")
        words.append(part & _MASK32)
        words.append((part >> 32) & _MASK32)
    ss = np.random.SeedSequence(seed, spawn_key=tuple(words))
    return np.random.Generator(np.random.PCG64(ss))


def spawn_streams(rng: np.random.Generator, n: int) -> list[np.random.Generator]:
    """Derive ``n`` independent child streams from ``rng`` (advances the parent)."""
    return rng.spawn(n)
