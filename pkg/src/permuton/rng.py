"""Seed handling.

Every random routine takes either an integer seed or a ``numpy.random.Generator``.
Independent streams for batches are derived as ``SeedSequence([seed, index])``,
so a (seed, batch index) pair always maps to the same stream regardless of how
batches are scheduled.
"""
from __future__ import annotations

import numpy as np


def as_generator(seed=None) -> np.random.Generator:
    if isinstance(seed, np.random.Generator):
        return seed
    return np.random.default_rng(seed)


def stream(seed: int, index: int) -> np.random.Generator:
    """Generator for batch ``index`` of a run seeded with ``seed``."""
    return np.random.default_rng(np.random.SeedSequence([int(seed), int(index)]))
