"""Seeded random streams: one independent substream per (seed, replicate)."""

import numpy as np

MAX_SEED = 2**64 - 1


def check_seed(seed: int) -> int:
    seed = int(seed)
    if not 0 <= seed <= MAX_SEED:
        raise ValueError(f"seed must be a 64-bit unsigned integer, got {seed}")
    return seed


def replicate_rng(seed: int, replicate: int = 0, stream: int = 0) -> np.random.Generator:
    """Counter-based generator for one replicate.

    The substream depends only on ``(seed, stream, replicate)``, so running
    ``k`` replicates reproduces the first ``k`` of a longer run exactly.
    """
    ss = np.random.SeedSequence(check_seed(seed), spawn_key=(int(stream), int(replicate)))
    return np.random.Generator(np.random.Philox(ss))
