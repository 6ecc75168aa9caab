"""Counter-based seed splitting.

Every stochastic step derives its generator from ``(seed, *path)`` so that a
whole run is reproducible from one integer, independently of call order.
"""
from __future__ import annotations

import numpy as np


def rng_for(seed: int, *path: int) -> np.random.Generator:
    return np.random.default_rng(np.random.SeedSequence([int(seed), *(int(p) for p in path)]))


def child_seed(seed: int, *path: int) -> int:
    """A fresh 63-bit integer seed for a sub-component."""
    return int(rng_for(seed, *path).integers(0, 2**63 - 1))
