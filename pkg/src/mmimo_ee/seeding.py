"""Counter-based RNG streams.

Every random draw in the simulator comes from a stream derived from the
root seed plus a structured key (stream kind, drop index, block index,
entity index, ...).  Streams are independent of execution order, so a
sweep gives bit-identical results no matter how work is split across
workers.
"""

from __future__ import annotations

import numpy as np

# Stream kinds.  Keys must stay stable: changing them changes every result.
DROP = 1
ATTACH = 2
CLUSTER = 3
PHASE = 4
EST_NOISE = 5


def stream(root_seed: int, *key: int) -> np.random.Generator:
    """Generator for (root_seed, key).  Same inputs, same stream, always."""
    return np.random.default_rng(np.random.SeedSequence(root_seed, spawn_key=tuple(key)))
