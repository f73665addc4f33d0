"""Reproducible RNG streams.

Parallel or repeated work units draw from independent counter-based streams
keyed by (seed, stream); identical keys give identical streams on every
platform, which is what the CLI's byte-determinism contract relies on.
"""

import numpy as np


def rng_stream(seed: int, stream: int = 0) -> np.random.Generator:
    """Generator for logical stream `stream` under master `seed` (Philox keyed)."""
    if seed < 0 or stream < 0:
        raise ValueError("seed and stream must be nonnegative")
    return np.random.Generator(np.random.Philox(key=[seed, stream]))
