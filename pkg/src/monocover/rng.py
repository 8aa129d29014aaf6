"""Seeded random streams.

Every stochastic routine draws from a Philox counter-based generator keyed by
``SeedSequence(seed, spawn_key=stream)``. A stream is a tuple of small
non-negative integers, e.g. ``(trial, purpose)``; distinct streams are
statistically independent and reproducible regardless of evaluation order,
which is what lets trials run in parallel and still merge byte-identically.
"""

from __future__ import annotations

import numpy as np

# purpose ids used as the last component of a stream key
GRAPH = 0
COLORING = 1
PIPELINE = 2
PROPS = 3
ORACLE = 4


def make_rng(seed: int, *stream: int) -> np.random.Generator:
    seq = np.random.SeedSequence(int(seed) & ((1 << 64) - 1), spawn_key=tuple(int(s) for s in stream))
    return np.random.Generator(np.random.Philox(seq))


def derive_seed(seed: int, *stream: int) -> int:
    """A 64-bit integer seed for a substream, for APIs that take plain seeds."""
    seq = np.random.SeedSequence(int(seed) & ((1 << 64) - 1), spawn_key=tuple(int(s) for s in stream))
    return int(seq.generate_state(1, dtype=np.uint64)[0])
