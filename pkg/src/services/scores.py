"""
Score functions and the chi-square special functions behind them.

Scores are evaluated at rescaled ranks, which are always < 1, so van der
Waerden scores never hit their singularity at u = 1.
"""

import logging

import numpy as np
from scipy import special

from src.models.domain import ScoreFunction, ScoreKind
from src.models.errors import ScoreError

logger = logging.getLogger(__name__)


def _check_df(d: int) -> None:
    if int(d) != d or d < 1:
        raise ScoreError(f"Degrees of freedom must be a positive integer, got {d}")


def chi2_cdf(x, d: int):
    """
    Chi-square distribution function, P(d/2, x/2).
    
    Args:
        x: Nonnegative real (scalar or array)
        d: Degrees of freedom
    
    Returns:
        Probability with the shape of x
    
    Raises:
        ScoreError: If any x is negative or d is invalid
    """
    _check_df(d)
    x = np.asarray(x, dtype=float)
    if np.any(x < 0) or np.any(np.isnan(x)):
        raise ScoreError(f"chi2_cdf needs x >= 0, got {x}")
    result = special.gammainc(d / 2.0, x / 2.0)
    return float(result) if result.ndim == 0 else result


def chi2_quantile(p, d: int):
    """
    Chi-square quantile function, the inverse of chi2_cdf.
    
    Raises:
        ScoreError: If any p lies outside [0, 1)
    """
    _check_df(d)
    p = np.asarray(p, dtype=float)
    if np.any(p < 0) or np.any(p >= 1) or np.any(np.isnan(p)):
        raise ScoreError(f"chi2_quantile needs 0 <= p < 1, got {p}")
    result = 2.0 * special.gammaincinv(d / 2.0, p)
    return float(result) if result.ndim == 0 else result


def _sign_score(u: np.ndarray) -> np.ndarray:
    return np.ones_like(u)


def _wilcoxon_score(u: np.ndarray) -> np.ndarray:
    return u.copy()


def make_score(kind: ScoreKind | str, d: int | None = None) -> ScoreFunction:
    """
    Build a score function.
    
    Args:
        kind: sign (J = 1), wilcoxon (J(u) = u) or vdw (square root of the
            chi-square quantile with d degrees of freedom)
        d: Dimension, required for vdw
    
    Returns:
        ScoreFunction with its variance
    """
    try:
        kind = ScoreKind(kind)
    except ValueError:
        raise ScoreError(f"Unknown score kind: {kind}")

    if kind == ScoreKind.SIGN:
        return ScoreFunction(kind=kind, sigma2=1.0, fn=_sign_score)
    if kind == ScoreKind.WILCOXON:
        return ScoreFunction(kind=kind, sigma2=1.0 / 3.0, fn=_wilcoxon_score)

    if d is None:
        raise ScoreError("van der Waerden scores need a dimension d")
    _check_df(d)

    def vdw(u: np.ndarray) -> np.ndarray:
        return np.sqrt(2.0 * special.gammaincinv(d / 2.0, u))

    return ScoreFunction(kind=kind, sigma2=float(d), fn=vdw, d=int(d))


def chi2_sf(x, d: int):
    """Chi-square upper tail 1 - chi2_cdf(x, d), accurate far in the tail."""
    _check_df(d)
    x = np.asarray(x, dtype=float)
    if np.any(x < 0) or np.any(np.isnan(x)):
        raise ScoreError(f"chi2_sf needs x >= 0, got {x}")
    result = special.gammaincc(d / 2.0, x / 2.0)
    return float(result) if result.ndim == 0 else result
