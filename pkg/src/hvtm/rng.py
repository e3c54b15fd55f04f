"""Deterministic random-stream derivation.

Every random choice in the package flows from a single 64-bit master seed.
Named components get disjoint streams by spawning ``numpy.random.SeedSequence``
children keyed on small integer tags, which is platform-stable and
order-independent: requesting the stream for ``(seed, TAG_GRAM_BASIS)`` always
yields the same generator no matter what was drawn elsewhere.
"""
from __future__ import annotations

import numpy as np

__all__ = [
    "TAG_ITEM_MEMORY",
    "TAG_GRAM_BASIS",
    "TAG_TIE_BREAK",
    "TAG_TM_WEIGHTS",
    "TAG_TM_FEEDBACK",
    "TAG_TM_SHUFFLE",
    "TAG_TM_NEGATIVE",
    "TAG_SEARCH",
    "TAG_GENERATOR",
    "TAG_EVAL",
    "spawn",
    "stream_seed",
]

# Component tags. Frozen: changing one silently changes every derived stream.
TAG_ITEM_MEMORY = 1   # quantization bucket hypervectors
TAG_GRAM_BASIS = 2    # n-gram position vectors
TAG_TIE_BREAK = 3     # bundling tie-break hypervector
TAG_TM_WEIGHTS = 4    # clause weight initialisation
TAG_TM_FEEDBACK = 5   # in-kernel feedback decisions
TAG_TM_SHUFFLE = 6    # epoch sample order
TAG_TM_NEGATIVE = 7   # negative-class draw per training sample
TAG_SEARCH = 8        # hyperparameter search
TAG_GENERATOR = 9     # synthetic-series innovations
TAG_EVAL = 10         # per-repetition streams in forecast evaluation


def spawn(seed: int, *tags: int) -> np.random.Generator:
    """Return the PCG64 generator for the stream named by ``tags``.

    Args:
        seed: Master seed (any non-negative int).
        *tags: Stream name, e.g. ``(TAG_SEARCH, config_index)``.

    Returns:
        A fresh ``numpy.random.Generator`` positioned at the start of the
        stream.  Same ``(seed, tags)`` -> bit-identical draw sequence.
    """
    ss = np.random.SeedSequence(entropy=int(seed), spawn_key=tuple(int(t) for t in tags))
    return np.random.Generator(np.random.PCG64(ss))


def stream_seed(seed: int, *tags: int) -> int:
    """Collapse a named stream to a single uint64, for seeding kernels."""
    ss = np.random.SeedSequence(entropy=int(seed), spawn_key=tuple(int(t) for t in tags))
    return int(ss.generate_state(1, np.uint64)[0])
