"""
Counter-based random streams.

Every stream is a Philox generator keyed by (seed, index), so replicate i
sees the same numbers whichever worker runs it and in whatever order.
"""

from typing import Optional

import numpy as np


def make_rng(seed: Optional[int]) -> np.random.Generator:
    """Philox generator for a master seed."""
    return np.random.Generator(np.random.Philox(np.random.SeedSequence(seed)))


def replicate_rng(seed: int, index: int) -> np.random.Generator:
    """
    Independent substream for replicate `index` of a seeded study.
    
    Args:
        seed: Master seed
        index: Replicate index (>= 0)
    
    Returns:
        Generator whose output depends only on (seed, index)
    """
    if index < 0:
        raise ValueError(f"Replicate index must be >= 0, got {index}")
    return np.random.Generator(
        np.random.Philox(np.random.SeedSequence(seed, spawn_key=(index,)))
    )

