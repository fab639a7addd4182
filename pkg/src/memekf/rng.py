"""Reproducible random streams.

Every stream is a Philox (counter-based) generator keyed by the base seed and
a tuple of integer keys, e.g. ``(run, step)`` for measurement synthesis or
``(block,)`` for Monte-Carlo sample blocks. A stream depends only on its
keys, so runs or blocks can be generated in any order or in parallel.
"""
from __future__ import annotations

import numpy as np

MEASUREMENTS = 0
ORACLE = 1


def stream(seed: int, *keys: int) -> np.random.Generator:
    ss = np.random.SeedSequence(int(seed) & (2**64 - 1), spawn_key=tuple(int(k) for k in keys))
    return np.random.Generator(np.random.Philox(ss))
