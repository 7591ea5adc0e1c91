"""Seed handling.

Every randomized routine takes a plain integer seed. Child seeds are derived
through :class:`numpy.random.SeedSequence` so that independent stages get
independent streams while the whole pipeline stays a function of one seed.
"""

from __future__ import annotations

import random

import numpy as np


def spawn(seed: int, n: int) -> list[int]:
    """Derive ``n`` independent 63-bit child seeds from ``seed``."""
    children = np.random.SeedSequence(int(seed) & ((1 << 128) - 1)).spawn(n)
    return [int(c.generate_state(1, dtype=np.uint64)[0] >> np.uint64(1)) for c in children]


def make_rng(seed: int) -> random.Random:
    return random.Random(int(seed))
