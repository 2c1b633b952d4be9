"""
Exact null distributions of the rank statistics.

Under independence the pairing of the two blocks' grid points is a uniform
random permutation, so the null law of every rank statistic depends only on
the two grids and can be simulated (or enumerated) without data.
"""

import itertools
import logging
import math
from multiprocessing import Pool
from typing import Callable, Iterable, List, Optional

import numpy as np

from src.models.domain import CrossCovMatrix, Grid, NullTable, TestKind, CrossCovKind
from src.models.errors import NullDistributionError
from src.services.stats import kendall_matrix, scores_for, t_statistic, weighted_signs
from src.utils.rng import replicate_rng

logger = logging.getLogger(__name__)

MIN_PERMUTATIONS = 100
MAX_EXHAUSTIVE_N = 8

# Table values within this relative distance below the observed value count as ties
_TIE_TOLERANCE = 1e-12


def _check_request(kind, grid1: Grid, grid2: Grid) -> TestKind:
    try:
        kind = TestKind(kind)
    except ValueError:
        raise NullDistributionError(f"Unknown statistic: {kind}")
    if not kind.is_rank_test:
        raise NullDistributionError(f"{kind.value} is not a rank statistic")
    if grid1.n != grid2.n:
        raise NullDistributionError(
            f"Grids have different sizes: {grid1.n} and {grid2.n}"
        )
    return kind


def _pairing_statistic(kind: TestKind, grid1: Grid, grid2: Grid) -> Callable[[np.ndarray], float]:
    """Map a pairing perm (grid1 point i with grid2 point perm[i]) to T."""
    n, d1, d2 = grid1.n, grid1.d, grid2.d

    if kind == TestKind.KENDALL:
        def kendall(perm: np.ndarray) -> float:
            w = CrossCovMatrix(
                w=kendall_matrix(grid1.points, grid2.points[perm]),
                kind=CrossCovKind.KENDALL,
            )
            return t_statistic(w, n, d1, d2).statistic
        return kendall

    J1, J2 = scores_for(kind, d1, d2)
    a1 = weighted_signs(grid1.radii, grid1.directions, J1)
    a2 = weighted_signs(grid2.radii, grid2.directions, J2)
    cross_kind = {
        TestKind.SIGN: CrossCovKind.SIGN,
        TestKind.SPEARMAN: CrossCovKind.SPEARMAN,
    }.get(kind, CrossCovKind.SCORE)

    def score(perm: np.ndarray) -> float:
        w = CrossCovMatrix(w=a1.T @ a2[perm] / n, kind=cross_kind, scores=(J1, J2))
        return t_statistic(w, n, d1, d2, J1, J2).statistic
    return score


def _null_chunk(args) -> List[float]:
    kind, grid1, grid2, seed, indices = args
    statistic = _pairing_statistic(kind, grid1, grid2)
    return [
        statistic(replicate_rng(seed, index).permutation(grid1.n))
        for index in indices
    ]


def _chunks(B: int, workers: int) -> Iterable[range]:
    size = math.ceil(B / workers)
    return [range(start, min(start + size, B)) for start in range(0, B, size)]


def simulate_null(
    kind: TestKind | str,
    grid1: Grid,
    grid2: Grid,
    B: int,
    seed: int,
    workers: int = 1,
) -> NullTable:
    """
    Monte Carlo null table from B uniform random grid pairings.

    Replicate b draws its permutation from the substream keyed by
    (seed, b), so the table does not depend on the number of workers.

    Args:
        kind: sign, spearman, kendall or vdw
        grid1, grid2: Grids of the two blocks (same n)
        B: Number of pairings (>= 100)
        seed: Master seed
        workers: Worker processes

    Returns:
        NullTable with sorted values

    Raises:
        NullDistributionError: For unknown kinds, mismatched grids or B < 100
    """
    kind = _check_request(kind, grid1, grid2)
    if B < MIN_PERMUTATIONS:
        raise NullDistributionError(f"Need B >= {MIN_PERMUTATIONS} pairings, got {B}")

    logger.info(
        f"Simulating {kind.value} null: n={grid1.n} d1={grid1.d} d2={grid2.d} "
        f"B={B} seed={seed}"
    )
    tasks = [(kind, grid1, grid2, seed, chunk) for chunk in _chunks(B, max(1, workers))]
    if workers > 1:
        with Pool(processes=workers) as pool:
            parts = pool.map(_null_chunk, tasks)
    else:
        parts = [_null_chunk(task) for task in tasks]

    values = np.sort(np.concatenate([np.asarray(part, dtype=float) for part in parts]))
    return NullTable(
        kind=kind,
        n=grid1.n,
        d1=grid1.d,
        d2=grid2.d,
        grid_seeds=(grid1.seed, grid2.seed),
        B=B,
        values=values,
        seed=seed,
    )


def enumerate_null(kind: TestKind | str, grid1: Grid, grid2: Grid) -> NullTable:
    """
    Exact null table over all n! pairings (n <= 8).

    Raises:
        NullDistributionError: If n > 8 or the request is invalid
    """
    kind = _check_request(kind, grid1, grid2)
    n = grid1.n
    if n > MAX_EXHAUSTIVE_N:
        raise NullDistributionError(
            f"Exhaustive enumeration is limited to n <= {MAX_EXHAUSTIVE_N}, got {n}"
        )

    statistic = _pairing_statistic(kind, grid1, grid2)
    values = np.sort(
        [statistic(np.array(perm)) for perm in itertools.permutations(range(n))]
    )
    logger.info(f"Enumerated {values.size} pairings for {kind.value} at n={n}")
    return NullTable(
        kind=kind,
        n=n,
        d1=grid1.d,
        d2=grid2.d,
        grid_seeds=(grid1.seed, grid2.seed),
        B=values.size,
        values=values,
        seed=None,
    )


def exact_pvalue(table: NullTable, observed: float) -> float:
    """
    Add-one Monte Carlo p-value (1 + #{values >= observed}) / (B + 1).

    For exhaustive tables the count runs over all n! pairings.
    """
    threshold = observed - _TIE_TOLERANCE * abs(observed)
    count = table.B - int(np.searchsorted(table.values, threshold, side="left"))
    return (1 + count) / (table.B + 1)


def null_quantile(table: NullTable, level: float) -> float:
    """Smallest table value whose empirical CDF reaches level."""
    if not 0.0 < level <= 1.0:
        raise NullDistributionError(f"Quantile level must be in (0, 1], got {level}")
    return float(np.quantile(table.values, level, method="inverted_cdf"))


def critical_values(table: NullTable, levels: Optional[Iterable[float]] = None) -> dict:
    """Null quantiles at the usual levels, keyed by level."""
    levels = levels if levels is not None else (0.90, 0.95, 0.99)
    return {level: null_quantile(table, level) for level in levels}
