"""
Derived random streams.

Every randomized stage takes a seed. Integer seeds are expanded with
``numpy.random.SeedSequence`` and a spawn key naming the stage, so the same
root seed always yields the same stream for the same stage regardless of
what ran before it.
"""

from typing import Optional, Union

import numpy as np

from ..core.exceptions import InputError

SeedLike = Optional[Union[int, np.integer, np.random.Generator]]


def derive_rng(seed: SeedLike, *keys: int) -> np.random.Generator:
    """Generator for ``seed`` specialised by ``keys``."""
    if isinstance(seed, np.random.Generator):
        if not keys:
            return seed
        child_entropy = int(seed.integers(0, 2**63 - 1))
        return np.random.default_rng(np.random.SeedSequence(child_entropy, spawn_key=tuple(int(k) for k in keys)))
    if seed is None:
        return np.random.default_rng()
    seed = int(seed)
    if seed < 0:
        raise InputError(f"Seed must be non-negative, got {seed}")
    return np.random.default_rng(np.random.SeedSequence(seed, spawn_key=tuple(int(k) for k in keys)))


def derive_seed(seed: SeedLike, *keys: int) -> int:
    """Integer seed for a sub-stage; stable for integer roots."""
    if isinstance(seed, np.random.Generator) or seed is None:
        return int(derive_rng(seed, *keys).integers(0, 2**63 - 1))
    seed = int(seed)
    if seed < 0:
        raise InputError(f"Seed must be non-negative, got {seed}")
    state = np.random.SeedSequence(seed, spawn_key=tuple(int(k) for k in keys)).generate_state(2, np.uint32)
    return int(state[0]) << 31 | int(state[1]) >> 1
