"""Stateless seed derivation.

``substream(seed, i, j, ...)`` always returns the same child for the same
key path, unlike ``SeedSequence.spawn`` which advances an internal counter.
"""

from __future__ import annotations

import numpy as np


def as_seedseq(seed) -> np.random.SeedSequence:
    if isinstance(seed, np.random.SeedSequence):
        return seed
    return np.random.SeedSequence(seed)


def substream(seed, *key: int) -> np.random.SeedSequence:
    seq = as_seedseq(seed)
    return np.random.SeedSequence(seq.entropy, spawn_key=tuple(seq.spawn_key) + tuple(key))


def generator(seed, *key: int) -> np.random.Generator:
    if isinstance(seed, np.random.Generator) and not key:
        return seed
    return np.random.default_rng(substream(seed, *key) if key else as_seedseq(seed))
