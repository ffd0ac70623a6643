"""Deterministic stream derivation from a single master seed.

Every random quantity is drawn from a generator keyed by
``(master_seed, stream, *indices)``.  Distinct keys give independent
``SeedSequence`` states, so probe, bootstrap, data and replication streams
never overlap, and results do not depend on execution order.
"""

import numpy as np

PROBES = 1
BOOTSTRAP = 2
DATA = 3
REPLICATION = 4


def seed_sequence(seed, *key) -> np.random.SeedSequence:
    if isinstance(seed, np.random.SeedSequence):
        if not key:
            return seed
        return np.random.SeedSequence(seed.entropy, spawn_key=tuple(seed.spawn_key) + key)
    if isinstance(seed, (int, np.integer)) and not isinstance(seed, bool):
        if seed < 0:
            raise ValueError(f"seeds must be non-negative, got {seed}")
        return np.random.SeedSequence(int(seed), spawn_key=key)
    raise TypeError(f"seed must be an int or SeedSequence, got {type(seed).__name__}")


def generator(seed, *key) -> np.random.Generator:
    """Generator for stream ``key`` under ``seed``; Generators pass through unchanged."""
    if isinstance(seed, np.random.Generator):
        if key:
            raise ValueError("cannot derive a keyed stream from a Generator")
        return seed
    return np.random.Generator(np.random.PCG64(seed_sequence(seed, *key)))


def derive_int(seed, *key) -> int:
    """A 63-bit integer seed for stream ``key``, suitable for recording."""
    return int(seed_sequence(seed, *key).generate_state(1, np.uint64)[0] >> np.uint64(1))
