"""Seeded random streams.

Every random choice draws from ``numpy.random.PCG64`` seeded through a
``SeedSequence(seed, spawn_key=key)``.  The spawn key names the consumer,
so two consumers never share a stream and adding a consumer does not
perturb the others:

    (0, sample)    dyadic rounding of the sample-th draw
    (1, sample)    dyadic cyclic shift of the sample-th draw
    (2,)           golden-ratio phase bits
    (3, attempt)   matching offsets, one stream per retry
    (4,)           i.i.d. visits
"""

from __future__ import annotations

from fractions import Fraction

import numpy as np

GENERATOR_NAME = "numpy.PCG64/SeedSequence-v1"

ROUNDING = 0
SHIFT = 1
GOLDEN_PHASE = 2
MATCHING = 3
IID = 4


def make_rng(seed: int, *key: int) -> np.random.Generator:
    return np.random.Generator(np.random.PCG64(np.random.SeedSequence(seed, spawn_key=tuple(key))))


def random_bits(rng: np.random.Generator, nbits: int) -> int:
    """A uniform integer in [0, 2**nbits)."""
    words = (nbits + 63) // 64
    raw = rng.integers(0, 2**64, size=words, dtype=np.uint64)
    value = 0
    for w in raw:
        value = (value << 64) | int(w)
    return value >> (64 * words - nbits)


def random_dyadic(rng: np.random.Generator, nbits: int = 64) -> Fraction:
    """A uniform dyadic fraction in [0, 1) with ``nbits`` random bits."""
    return Fraction(random_bits(rng, nbits), 1 << nbits)


def bernoulli(rng: np.random.Generator, prob: Fraction, nbits: int = 128) -> bool:
    """True with probability ``prob`` (bias below 2**-nbits)."""
    return random_dyadic(rng, nbits) < prob
