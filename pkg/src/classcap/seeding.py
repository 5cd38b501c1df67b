"""Deterministic RNG derivation.

Every stochastic operation takes an explicit seed so that results are
reproducible bit for bit.  Multi-part computations (packing restarts,
Monte Carlo chunks) derive one child state per part from (seed, index),
so the result does not depend on execution order.
"""

from __future__ import annotations

import numpy as np


def as_generator(seed) -> np.random.Generator:
    """Return a Generator for an int seed, SeedSequence, or Generator."""
    if isinstance(seed, np.random.Generator):
        return seed
    return np.random.default_rng(seed)


def spawn(seed, n: int):
    """Derive n independent child states indexed 0..n-1."""
    if isinstance(seed, np.random.Generator):
        return seed.spawn(n)
    if not isinstance(seed, np.random.SeedSequence):
        seed = np.random.SeedSequence(seed)
    return seed.spawn(n)
