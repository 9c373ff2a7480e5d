"""Seeded counter-based random streams.

Every randomized ensemble draws from a Philox generator keyed by
``(seed, stream)``. Trial ``t`` of a sweep uses stream ``t``, so results do
not depend on execution order or on how trials are split across workers.
"""

import numpy as np


def make_rng(seed: int, stream: int = 0) -> np.random.Generator:
    key = np.array([seed, stream], dtype=np.uint64)
    return np.random.Generator(np.random.Philox(key=key))
