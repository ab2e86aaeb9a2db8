"""Seed derivation.

Every replication seed is expanded into independent per-purpose streams with
numpy's ``SeedSequence`` using a fixed spawn key per purpose, so adding a
stream (or a walk variant) never shifts the draws of another one. The bit
generator is PCG64 (numpy's default).
"""

from __future__ import annotations

import numpy as np

TOPOLOGY = 0
WALK_A = 1
WALK_B = 2
WORKLOAD = 3
RUMOR_AGENT = 4
RUMOR_QUERY = 5


def stream(seed: int, purpose: int) -> np.random.Generator:
    """Return the generator for ``purpose`` under replication ``seed``."""
    ss = np.random.SeedSequence(entropy=int(seed), spawn_key=(int(purpose),))
    return np.random.Generator(np.random.PCG64(ss))


def replication_seed(master_seed: int, index: int) -> int:
    """Seed of replication ``index``: ``master_seed + index``."""
    return int(master_seed) + int(index)
