"""Seeded random streams.

Every randomized routine takes a :class:`numpy.random.Generator` backed by
PCG64.  Substreams are derived from a master seed with
:class:`numpy.random.SeedSequence` spawn keys, so a given
``(master_seed, stream_index)`` always yields the same stream no matter how
work is scheduled.
"""

from __future__ import annotations

import numpy as np

ALGORITHM = "PCG64 (numpy.random.Generator, SeedSequence spawn keys)"


def make_rng(seed: int, *stream: int) -> np.random.Generator:
    """Return the generator for substream ``stream`` of ``seed``."""
    if seed < 0:
        raise ValueError("seed must be non-negative")
    ss = np.random.SeedSequence(entropy=int(seed), spawn_key=tuple(int(s) for s in stream))
    return np.random.Generator(np.random.PCG64(ss))
