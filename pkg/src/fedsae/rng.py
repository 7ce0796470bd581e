"""Keyed deterministic random streams.

Every stochastic draw in a run comes from a generator keyed by
``(seed, domain, *indices)``, so any per-client or per-round quantity can
be recomputed in isolation and nothing depends on the order in which
clients are processed.
"""

from __future__ import annotations

import numpy as np

# Stream domains. Values are part of what a seed means; keep them stable.
BASE_PARAMS = 0
CLIENT_MODEL = 1
CLIENT_SAMPLES = 2
PARTITION = 3
SPLIT = 4
PROFILE = 5
CAPACITY = 6
SELECTION = 7
TRAINING = 8


def stream(seed: int, *key: int) -> np.random.Generator:
    """Return an independent generator for ``(seed, *key)``."""
    if seed < 0:
        raise ValueError("seed must be non-negative")
    return np.random.default_rng([int(seed)] + [int(k) for k in key])
