"""Seeded random streams.

Every stream is a Philox4x64 counter-based generator keyed through
``numpy.random.SeedSequence(seed, spawn_key=key)``. Keys are tuples of
non-negative integers such as ``(purpose, observation, mask)``, so the
stream used for one unit of work does not depend on evaluation order or
on how the work is split across threads.
"""

import zlib

import numpy as np


def purpose_id(label):
    """Stable 32-bit integer for a text label (CRC-32)."""
    return zlib.crc32(label.encode("utf-8"))


def substream(seed, *key):
    """Independent generator for ``(seed, *key)``."""
    ss = np.random.SeedSequence(int(seed), spawn_key=tuple(int(k) for k in key))
    return np.random.Generator(np.random.Philox(ss))


def as_generator(rng):
    """Accept a Generator, an int seed or None."""
    if isinstance(rng, np.random.Generator):
        return rng
    if rng is None:
        return np.random.default_rng()
    return substream(rng)
