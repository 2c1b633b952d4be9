"""
Cross-covariance matrices W, the rank statistics T built on them, and the
Gaussian Wilks benchmark.
"""

import logging
import math
from typing import Optional, Tuple

import numpy as np

from src.models.domain import (
    CrossCovKind,
    CrossCovMatrix,
    RanksSigns,
    ScoreFunction,
    ScoreKind,
    TestKind,
    TestResult,
)
from src.models.errors import DegenerateDataError, StatisticError
from src.services.scores import chi2_sf, make_score

logger = logging.getLogger(__name__)

# Upper bound on the number of sign entries held at once by the Kendall loop
_KENDALL_CHUNK_ENTRIES = 1 << 22


def scores_for(kind: TestKind, d1: int, d2: int) -> Tuple[ScoreFunction, ScoreFunction]:
    """Score functions (J1, J2) of a score-type rank test."""
    if kind == TestKind.SIGN:
        return make_score(ScoreKind.SIGN), make_score(ScoreKind.SIGN)
    if kind == TestKind.SPEARMAN:
        return make_score(ScoreKind.WILCOXON), make_score(ScoreKind.WILCOXON)
    if kind == TestKind.VDW:
        return make_score(ScoreKind.VDW, d1), make_score(ScoreKind.VDW, d2)
    raise StatisticError(f"{kind.value} is not a score test")


def weighted_signs(rescaled_ranks: np.ndarray, signs: np.ndarray, J: ScoreFunction) -> np.ndarray:
    """Rows J(R_i) * S_i."""
    return J(rescaled_ranks)[:, None] * signs


def _cross_kind(J1: ScoreFunction, J2: ScoreFunction) -> CrossCovKind:
    if J1.kind == J2.kind == ScoreKind.SIGN:
        return CrossCovKind.SIGN
    if J1.kind == J2.kind == ScoreKind.WILCOXON:
        return CrossCovKind.SPEARMAN
    return CrossCovKind.SCORE


def _check_pair(rs1: RanksSigns, rs2: RanksSigns) -> None:
    if rs1.n != rs2.n:
        raise StatisticError(f"Blocks have different sizes: {rs1.n} and {rs2.n}")


def w_score(
    rs1: RanksSigns,
    rs2: RanksSigns,
    J1: ScoreFunction,
    J2: ScoreFunction,
) -> CrossCovMatrix:
    """
    Score cross-covariance W_J = (1/n) sum_i J1(R1_i) J2(R2_i) S1_i S2_i'.

    Sign scores give the quadrant matrix and Wilcoxon scores give the
    Spearman matrix (1/n) sum_i F1(X1_i) F2(X2_i)'.

    Args:
        rs1, rs2: Ranks and signs of the two blocks, same observation order
        J1, J2: Score functions

    Returns:
        d1 x d2 CrossCovMatrix
    """
    _check_pair(rs1, rs2)
    a1 = weighted_signs(rs1.rescaled_ranks, rs1.signs, J1)
    a2 = weighted_signs(rs2.rescaled_ranks, rs2.signs, J2)
    return CrossCovMatrix(w=a1.T @ a2 / rs1.n, kind=_cross_kind(J1, J2), scores=(J1, J2))


def kendall_matrix(images1: np.ndarray, images2: np.ndarray) -> np.ndarray:
    """
    Average over ordered pairs i != j of sign(F1_i - F1_j) sign(F2_i - F2_j)'.

    The sums are integers, so they are exact in double precision.
    """
    n = images1.shape[0]
    if n < 2:
        raise StatisticError(f"Kendall matrix needs n >= 2, got {n}")

    d = max(images1.shape[1], images2.shape[1])
    chunk = max(1, _KENDALL_CHUNK_ENTRIES // (n * d))
    total = np.zeros((images1.shape[1], images2.shape[1]))
    for start in range(0, n, chunk):
        stop = min(start + chunk, n)
        s1 = np.sign(images1[start:stop, None, :] - images1[None, :, :])
        s2 = np.sign(images2[start:stop, None, :] - images2[None, :, :])
        total += np.einsum("cij,cil->jl", s1, s2)
    return total / (n * (n - 1))


def w_kendall(rs1: RanksSigns, rs2: RanksSigns) -> CrossCovMatrix:
    """
    Kendall cross-covariance matrix of the center-outward images.

    Raises:
        StatisticError: If the sizes differ or n < 2
    """
    _check_pair(rs1, rs2)
    return CrossCovMatrix(
        w=kendall_matrix(rs1.images, rs2.images),
        kind=CrossCovKind.KENDALL,
    )


def _statistic_name(w: CrossCovMatrix, J1: Optional[ScoreFunction], J2: Optional[ScoreFunction]) -> str:
    if w.kind != CrossCovKind.SCORE:
        return w.kind.value
    if J1.kind == J2.kind == ScoreKind.VDW:
        return TestKind.VDW.value
    return f"score({J1.label},{J2.label})"


def t_statistic(
    w: CrossCovMatrix,
    n: int,
    d1: int,
    d2: int,
    J1: Optional[ScoreFunction] = None,
    J2: Optional[ScoreFunction] = None,
) -> TestResult:
    """
    Scaled squared Frobenius norm of W.

    Kendall: (9n/4) |W|^2. Score kinds: n d1 d2 / (sigma1^2 sigma2^2) |W|^2,
    which is n d1 d2 |W|^2 for signs, 9 n d1 d2 |W|^2 for Spearman and
    n |W|^2 for van der Waerden scores.

    Args:
        w: Cross-covariance matrix
        n: Sample size
        d1, d2: Block dimensions
        J1, J2: Score functions (default: those stored on w)

    Returns:
        TestResult carrying the statistic and df = d1 * d2, without p-value
    """
    if w.shape != (d1, d2):
        raise StatisticError(f"W has shape {w.shape}, expected ({d1}, {d2})")
    if n < 1:
        raise StatisticError(f"Sample size must be >= 1, got {n}")

    squared_norm = math.fsum(float(v) ** 2 for v in w.w.ravel())

    if w.kind == CrossCovKind.KENDALL:
        statistic = 9.0 * n / 4.0 * squared_norm
    else:
        if J1 is None or J2 is None:
            if w.scores is None:
                raise StatisticError("Score statistics need the score functions")
            J1, J2 = w.scores
        statistic = n * d1 * d2 / (J1.sigma2 * J2.sigma2) * squared_norm

    return TestResult(name=_statistic_name(w, J1, J2), statistic=statistic, df=d1 * d2)


def p_value_asymptotic(statistic: float, df: int) -> float:
    """Chi-square upper tail probability with df degrees of freedom."""
    if not statistic >= 0:
        raise StatisticError(f"Statistic must be >= 0, got {statistic}")
    return chi2_sf(statistic, df)


def rank_statistic(kind: TestKind, rs1: RanksSigns, rs2: RanksSigns) -> TestResult:
    """Statistic of a center-outward rank test on given ranks and signs."""
    kind = TestKind(kind)
    d1, d2 = rs1.d, rs2.d
    if kind == TestKind.KENDALL:
        return t_statistic(w_kendall(rs1, rs2), rs1.n, d1, d2)
    J1, J2 = scores_for(kind, d1, d2)
    return t_statistic(w_score(rs1, rs2, J1, J2), rs1.n, d1, d2, J1, J2)


def wilks(sample1, sample2) -> TestResult:
    """
    Gaussian likelihood-ratio test T = n log(det S1 det S2 / det S).

    Covariances use the 1/(n-1) normalization; the statistic does not
    depend on it.

    Args:
        sample1: n x d1 array
        sample2: n x d2 array

    Returns:
        TestResult with asymptotic chi-square p-value

    Raises:
        StatisticError: On size mismatch or n <= d1 + d2
        DegenerateDataError: If a sample covariance is singular
    """
    x1 = np.asarray(sample1, dtype=float)
    x2 = np.asarray(sample2, dtype=float)
    x1 = x1.reshape(-1, 1) if x1.ndim == 1 else x1
    x2 = x2.reshape(-1, 1) if x2.ndim == 1 else x2
    if x1.shape[0] != x2.shape[0]:
        raise StatisticError(f"Blocks have different sizes: {x1.shape[0]} and {x2.shape[0]}")

    n, d1 = x1.shape
    d2 = x2.shape[1]
    if n <= d1 + d2:
        raise StatisticError(f"Wilks test needs n > d1 + d2, got n={n}, d1 + d2={d1 + d2}")

    joint = np.atleast_2d(np.cov(np.hstack([x1, x2]), rowvar=False, ddof=1))
    log_dets = []
    for block in (joint[:d1, :d1], joint[d1:, d1:], joint):
        sign, log_det = np.linalg.slogdet(block)
        if sign <= 0 or not np.isfinite(log_det):
            raise DegenerateDataError("Sample covariance matrix is singular")
        log_dets.append(log_det)

    log_v = log_dets[0] + log_dets[1] - log_dets[2]
    statistic = n * max(log_v, 0.0)
    df = d1 * d2
    return TestResult(
        name=TestKind.WILKS.value,
        statistic=statistic,
        df=df,
        pvalue=p_value_asymptotic(statistic, df),
        method="asymptotic",
    )
