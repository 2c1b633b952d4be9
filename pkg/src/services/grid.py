"""
Grids on the unit ball.

A grid of n points discretizes the spherical uniform: nR radii r/(nR+1)
times nS antipodally paired directions, plus n0 tie-break points at radius
1/(2(nR+1)) standing in for copies of the origin.
"""

import logging
import math
from typing import Optional

import numpy as np
from scipy.special import ndtri
from scipy.stats import qmc

from src.models.domain import Grid, GridSpec, SphereArray
from src.models.errors import GridError
from src.utils.rng import make_rng

logger = logging.getLogger(__name__)

MIN_GRID_SIZE = 4

# Keeps Sobol coordinates away from 0 and 1 before the normal quantile map
_SOBOL_CLIP = 1e-12


def factorize(n: int, d: int = 2) -> GridSpec:
    """
    Factor n = nR * nS + n0 with nS even and 0 <= n0 < min(nR, nS).

    Among all valid (nR, nS) the rule minimizes n0, then |nR - nS|, and
    prefers nS >= nR on remaining ties. In dimension 1 the only sphere
    array is {+1, -1}, so nS = 2 is forced.

    Args:
        n: Sample size (>= 4)
        d: Dimension of the ball

    Returns:
        GridSpec for (n, d)

    Raises:
        GridError: If n < 4 or d < 1
    """
    if int(n) != n or n < MIN_GRID_SIZE:
        raise GridError(f"Grid size must be an integer >= {MIN_GRID_SIZE}, got {n}")
    if int(d) != d or d < 1:
        raise GridError(f"Dimension must be a positive integer, got {d}")
    n, d = int(n), int(d)

    if d == 1:
        return GridSpec(n=n, d=1, nR=n // 2, nS=2, n0=n % 2)

    # For fixed nR, n0 < nR forces nS = n // nR, which must then be even.
    best = None
    for n_r in range(1, n // 2 + 1):
        n_s = n // n_r
        if n_s % 2 != 0:
            continue
        n_0 = n - n_r * n_s
        if n_0 >= min(n_r, n_s):
            continue
        key = (n_0, abs(n_r - n_s), 0 if n_s >= n_r else 1)
        if best is None or key < best[0]:
            best = (key, n_r, n_s, n_0)

    # nR = n // 2, nS = 2 is always valid, so best is set
    _, n_r, n_s, n_0 = best
    return GridSpec(n=n, d=d, nR=n_r, nS=n_s, n0=n_0)


def sphere_array(d: int, n_s: int, seed: Optional[int] = None) -> SphereArray:
    """
    nS directions on the unit sphere in R^d, antipodally paired.

    d = 1 gives {+1, -1}. d = 2 gives equally spaced angles starting at 0.
    d >= 3 maps nS/2 scrambled Sobol points through the normal quantile
    and normalizes them; the second half is the exact negation of the first.

    Args:
        d: Dimension
        n_s: Even number of directions
        seed: Scrambling seed (used only for d >= 3)

    Returns:
        SphereArray

    Raises:
        GridError: For odd n_s, n_s < 2, or d = 1 with n_s != 2
    """
    if d < 1:
        raise GridError(f"Dimension must be >= 1, got {d}")
    if n_s < 2 or n_s % 2 != 0:
        raise GridError(f"Number of directions must be even and >= 2, got {n_s}")

    half = n_s // 2
    if d == 1:
        if n_s != 2:
            raise GridError(f"Dimension 1 admits only nS = 2, got {n_s}")
        first = np.array([[1.0]])
        seed = None
    elif d == 2:
        angles = 2.0 * np.pi * np.arange(half) / n_s
        first = np.column_stack([np.cos(angles), np.sin(angles)])
        seed = None
    else:
        sampler = qmc.Sobol(d=d, scramble=True, seed=seed)
        points = sampler.random_base2(m=max(0, math.ceil(math.log2(half))))[:half]
        gaussian = ndtri(np.clip(points, _SOBOL_CLIP, 1.0 - _SOBOL_CLIP))
        first = gaussian / np.linalg.norm(gaussian, axis=1, keepdims=True)

    return SphereArray(d=d, directions=np.vstack([first, -first]), seed=seed)


def build_grid(spec: GridSpec, seed: Optional[int] = 0) -> Grid:
    """
    Build the grid described by a factorization.

    Points are ordered radius by radius (r = 1..nR), each radius running
    through the sphere array in order; tie-break points come last, along
    n0 directions drawn without replacement.

    Args:
        spec: Validated factorization
        seed: Seed for the sphere array (d >= 3) and the tie-break directions

    Returns:
        Grid; its seed is kept only when it affects the points
    """
    sphere = sphere_array(spec.d, spec.nS, seed)

    radii = np.repeat(np.arange(1, spec.nR + 1) / (spec.nR + 1), spec.nS)
    directions = np.tile(sphere.directions, (spec.nR, 1))

    if spec.n0 > 0:
        if seed is None:
            raise GridError("A seed is required when the grid needs tie-break points")
        chosen = make_rng(seed).choice(spec.nS, size=spec.n0, replace=False)
        radii = np.concatenate([radii, np.full(spec.n0, 0.5 / (spec.nR + 1))])
        directions = np.vstack([directions, sphere.directions[np.sort(chosen)]])

    uses_seed = spec.n0 > 0 or spec.d >= 3
    grid = Grid(
        spec=spec,
        radii=radii,
        directions=directions,
        seed=seed if uses_seed else None,
    )
    logger.debug(
        f"Built grid n={spec.n} d={spec.d} nR={spec.nR} nS={spec.nS} n0={spec.n0}"
    )
    return grid


def make_grid(n: int, d: int, seed: Optional[int] = 0) -> Grid:
    """Factorize n and build the grid in one step."""
    return build_grid(factorize(n, d), seed)
