"""
Empirical center-outward distribution function.

The sample is paired with the grid by the assignment minimizing the total
squared Euclidean distance; ranks and signs are read off the paired grid
points.
"""

import logging
import math

import numpy as np
from scipy.optimize import linear_sum_assignment
from scipy.spatial import cKDTree
from scipy.spatial.distance import cdist

from src.models.domain import Assignment, Grid, RanksSigns
from src.models.errors import TransportError

logger = logging.getLogger(__name__)

# Nearest-neighbour distance (after standardization) below which a warning is logged
NEAR_DUPLICATE_TOLERANCE = 1e-9


def _as_sample(sample, grid: Grid) -> np.ndarray:
    sample = np.asarray(sample, dtype=float)
    if sample.ndim == 1 and grid.d == 1:
        sample = sample.reshape(-1, 1)
    if sample.ndim != 2:
        raise TransportError(f"Sample must be an (n, d) array, got shape {sample.shape}")
    if sample.shape != (grid.n, grid.d):
        raise TransportError(
            f"Sample shape {sample.shape} does not match grid ({grid.n}, {grid.d})"
        )
    if not np.all(np.isfinite(sample)):
        raise TransportError("Sample contains non-finite values")
    return sample


def cost_matrix(sample, grid: Grid) -> np.ndarray:
    """
    Squared Euclidean distances between sample points and grid points.

    Args:
        sample: n x d array
        grid: Grid with n points in R^d

    Returns:
        n x n matrix with entry (i, j) = |Z_i - grid_j|^2

    Raises:
        TransportError: On size or dimension mismatch
    """
    sample = _as_sample(sample, grid)
    return cdist(sample, grid.points, "sqeuclidean")


def solve_assignment(costs) -> Assignment:
    """
    Exact minimum-cost perfect matching (shortest augmenting path solver).

    Args:
        costs: Square matrix of finite nonnegative costs

    Returns:
        Assignment with perm[i] the column matched to row i

    Raises:
        TransportError: If the matrix is not square, finite and nonnegative
    """
    costs = np.asarray(costs, dtype=float)
    if costs.ndim != 2 or costs.shape[0] != costs.shape[1]:
        raise TransportError(f"Cost matrix must be square, got shape {costs.shape}")
    if costs.shape[0] == 0:
        raise TransportError("Cost matrix is empty")
    if not np.all(np.isfinite(costs)):
        raise TransportError("Cost matrix has non-finite entries")
    if np.any(costs < 0):
        raise TransportError("Cost matrix has negative entries")

    rows, cols = linear_sum_assignment(costs)
    perm = np.empty(costs.shape[0], dtype=np.intp)
    perm[rows] = cols
    return Assignment(perm=perm, total_cost=math.fsum(costs[rows, cols]))


def _standardize(sample: np.ndarray) -> np.ndarray:
    # Centering and positive rescaling leave the optimal pairing unchanged
    centered = sample - sample.mean(axis=0)
    scale = math.sqrt(np.mean(np.sum(centered * centered, axis=1)))
    return centered / scale if scale > 0 else centered


def _check_duplicates(sample: np.ndarray, standardized: np.ndarray) -> None:
    if np.unique(sample, axis=0).shape[0] < sample.shape[0]:
        raise TransportError("Sample has duplicate points; ranks need continuous data")

    distances, _ = cKDTree(standardized).query(standardized, k=2)
    closest = float(distances[:, 1].min())
    if closest < NEAR_DUPLICATE_TOLERANCE:
        logger.warning(
            f"Nearly coincident sample points (distance {closest:.3g}); "
            f"the pairing may be ill-conditioned"
        )


def center_outward(sample, grid: Grid) -> RanksSigns:
    """
    Center-outward ranks and signs of a sample with respect to a grid.

    Args:
        sample: n x d array of pairwise distinct points
        grid: Grid with n points in R^d

    Returns:
        RanksSigns with images, rescaled ranks, integer ranks and signs

    Raises:
        TransportError: On shape mismatch or duplicate points
    """
    sample = _as_sample(sample, grid)
    standardized = _standardize(sample)
    _check_duplicates(sample, standardized)

    assignment = solve_assignment(cost_matrix(standardized, grid))
    perm = assignment.perm
    logger.debug(
        f"Paired {grid.n} points in R^{grid.d}: total_cost={assignment.total_cost:.6g}"
    )

    spec = grid.spec
    regular = perm < spec.nR * spec.nS
    ranks = np.where(regular, perm // spec.nS + 1, 0.5).astype(float)

    return RanksSigns(
        images=grid.points[perm],
        rescaled_ranks=grid.radii[perm],
        ranks=ranks,
        signs=grid.directions[perm],
        perm=perm,
    )
