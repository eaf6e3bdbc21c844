"""
Seed derivation helpers.

All randomness flows from one integer seed; independent substreams are
addressed by stable integer keys so results never depend on worker count
or scheduling order.
"""

import numpy as np


def child_rng(seed: int, *keys: int) -> np.random.Generator:
    """Generator for the substream identified by ``keys`` under ``seed``."""
    sequence = np.random.SeedSequence(entropy=int(seed), spawn_key=tuple(int(k) for k in keys))
    return np.random.default_rng(sequence)


def child_seed(seed: int, *keys: int) -> int:
    """Integer seed for the substream identified by ``keys`` under ``seed``."""
    sequence = np.random.SeedSequence(entropy=int(seed), spawn_key=tuple(int(k) for k in keys))
    return int(sequence.generate_state(1, dtype=np.uint32)[0])
