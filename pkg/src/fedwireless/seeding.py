"""Deterministic derivation of independent random streams from one master seed.

Every source of randomness in an experiment (data partitioning, model
init, per-round channel draws, per-round training randomness, Monte Carlo
replicas) gets its own generator, keyed by a domain constant plus integer
indices.  Streams are derived with ``numpy.random.SeedSequence`` spawn keys,
so they are independent of each other and of how many sibling streams exist:
adding replicas or rounds never perturbs the draws of existing ones.
"""

from __future__ import annotations

import numpy as np

# Domain constants for spawn keys. Values are part of the reproducibility
# contract; do not renumber.
PARTITION = 0
MODEL_INIT = 1
CHANNEL = 2
ROUND = 3
REPLICA = 4


def stream(master_seed: int, *key: int) -> np.random.Generator:
    """Return the generator for stream ``key`` under ``master_seed``.

    ``key`` is a domain constant optionally followed by indices, e.g.
    ``stream(seed, CHANNEL, t)`` for round ``t``'s channel draw or
    ``stream(seed, REPLICA, v, r)`` for replica ``r`` of sweep series ``v``.
    The same (seed, key) pair always yields the same stream.
    """
    if master_seed < 0:
        raise ValueError(f"master_seed must be nonnegative, got {master_seed}")
    return np.random.default_rng(np.random.SeedSequence(master_seed, spawn_key=key))
