"""Seedable, splittable random streams.

Every stochastic routine in the package takes an explicit
``numpy.random.Generator``. Streams are derived from a master seed and a
path of keys (integers or names), so a given ``(seed, *path)`` always yields
the same stream regardless of the order in which streams are created.
"""

from __future__ import annotations

import zlib

import numpy as np


def _key(part: int | str) -> int:
    if isinstance(part, str):
        return zlib.crc32(part.encode("utf-8"))
    if part < 0:
        raise ValueError(f"stream keys must be non-negative, got {part}")
    return int(part)


def stream(seed: int, *path: int | str) -> np.random.Generator:
    """Return the generator for ``seed`` split along ``path``."""
    if seed < 0:
        raise ValueError(f"seed must be non-negative, got {seed}")
    ss = np.random.SeedSequence(entropy=int(seed), spawn_key=tuple(_key(p) for p in path))
    return np.random.Generator(np.random.PCG64(ss))


def derive_seed(seed: int, *path: int | str) -> int:
    """A 63-bit integer seed derived from ``seed`` and ``path``.

    Used to give each Monte Carlo trial its own seed that can be written out
    and fed back to reproduce that trial alone.
    """
    ss = np.random.SeedSequence(entropy=int(seed), spawn_key=tuple(_key(p) for p in path))
    return int(ss.generate_state(1, dtype=np.uint64)[0]) >> 1
