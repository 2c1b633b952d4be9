"""
Generalized Konijn families.

Two independent blocks X*_1 (d1) and X*_2 (d2) are mixed linearly:
    X_1 = (1 - delta) X*_1 + delta M1 X*_2
    X_2 = delta M2 X*_1 + (1 - delta) X*_2
delta = 0 is independence; local alternatives use delta = tau / sqrt(n).
"""

import logging
import math
from pathlib import Path
from typing import Dict, Optional, Tuple

import numpy as np
import yaml

from src.models.domain import KonijnConfig, MarginalKind
from src.models.errors import KonijnError
from src.utils.rng import make_rng

logger = logging.getLogger(__name__)

T_DEGREES_OF_FREEDOM = 3


def sample_marginal(kind: MarginalKind | str, d: int, n: int, rng: np.random.Generator) -> np.ndarray:
    """
    Draw n i.i.d. rows from one of the marginal laws.

    gaussian: standard normal vector.
    elliptical_t: spherical t(3), a normal vector over sqrt(chi2_3 / 3).
    independent_t: independent t(3) components.
    chi2_1_components: independent squared standard normals.

    Args:
        kind: Marginal law
        d: Dimension
        n: Number of rows
        rng: Generator to draw from

    Returns:
        n x d array

    Raises:
        KonijnError: For unknown kinds or n, d < 1
    """
    try:
        kind = MarginalKind(kind)
    except ValueError:
        raise KonijnError(f"Unsupported marginal: {kind}")
    if n < 1 or d < 1:
        raise KonijnError(f"Need n >= 1 and d >= 1, got n={n}, d={d}")

    if kind == MarginalKind.GAUSSIAN:
        return rng.standard_normal((n, d))
    if kind == MarginalKind.ELLIPTICAL_T:
        z = rng.standard_normal((n, d))
        w = rng.chisquare(T_DEGREES_OF_FREEDOM, size=n)
        return z / np.sqrt(w / T_DEGREES_OF_FREEDOM)[:, None]
    if kind == MarginalKind.INDEPENDENT_T:
        return rng.standard_t(T_DEGREES_OF_FREEDOM, size=(n, d))
    return rng.standard_normal((n, d)) ** 2


def mix(x_star, config: KonijnConfig) -> np.ndarray:
    """
    Apply the mixing matrix M_delta row by row.

    Raises:
        KonijnError: If x_star does not have d1 + d2 columns
    """
    x_star = np.asarray(x_star, dtype=float)
    if x_star.ndim != 2 or x_star.shape[1] != config.dim:
        raise KonijnError(
            f"Expected {config.dim} columns (d1 + d2), got shape {x_star.shape}"
        )
    if config.delta == 0.0:
        return x_star.copy()

    delta = config.delta
    x1, x2 = x_star[:, :config.d1], x_star[:, config.d1:]
    mixed1 = (1.0 - delta) * x1 + delta * (x2 @ config.M1.T)
    mixed2 = delta * (x1 @ config.M2.T) + (1.0 - delta) * x2
    return np.hstack([mixed1, mixed2])


def sample_independent(config: KonijnConfig, n: int, rng: np.random.Generator) -> np.ndarray:
    """Unmixed sample (X*_1, X*_2) as an n x (d1 + d2) array."""
    return np.hstack([
        sample_marginal(config.marginal1, config.d1, n, rng),
        sample_marginal(config.marginal2, config.d2, n, rng),
    ])


def generate(config: KonijnConfig, n: int, seed: Optional[int]) -> Tuple[np.ndarray, np.ndarray]:
    """
    Sample n observations of the mixed vector.

    Returns:
        (n x d1 block, n x d2 block), identical for identical (config, n, seed)
    """
    if n < 1:
        raise KonijnError(f"Sample size must be >= 1, got {n}")
    x = mix(sample_independent(config, n, make_rng(seed)), config)
    return x[:, :config.d1], x[:, config.d1:]


def local_delta(tau: float, n: int) -> float:
    """Mixing parameter tau / sqrt(n) of a local alternative."""
    return tau / math.sqrt(n)


def default_config(
    d1: int,
    d2: int,
    marginal1: MarginalKind | str = MarginalKind.GAUSSIAN,
    marginal2: Optional[MarginalKind | str] = None,
    delta: float = 0.0,
) -> KonijnConfig:
    """
    Konijn family with M1 = I (d1 x d2, ones on the diagonal) and M2 = M1'.
    """
    m1 = np.eye(d1, d2)
    try:
        return KonijnConfig(
            d1=d1,
            d2=d2,
            marginal1=marginal1,
            marginal2=marginal2 if marginal2 is not None else marginal1,
            M1=m1,
            M2=m1.T,
            delta=delta,
        )
    except ValueError as e:
        raise KonijnError(str(e))


def load_cases(path: str | Path) -> Dict[str, dict]:
    """
    Read simulation cases from YAML.

    Each case maps its letter to {description, marginal1, marginal2}.

    Raises:
        KonijnError: If the file is missing or malformed
    """
    path = Path(path)
    try:
        with open(path, encoding="utf-8") as f:
            raw = yaml.safe_load(f)
    except FileNotFoundError:
        raise KonijnError(f"Simulation cases file not found: {path}")
    except yaml.YAMLError as e:
        raise KonijnError(f"Malformed simulation cases file {path}: {e}")

    cases = (raw or {}).get("cases")
    if not isinstance(cases, dict) or not cases:
        raise KonijnError(f"{path} defines no cases")

    for name, case in cases.items():
        for field in ("marginal1", "marginal2"):
            try:
                MarginalKind(case[field])
            except (KeyError, TypeError, ValueError):
                raise KonijnError(f"Case {name!r} has an invalid {field}")
    return {str(name): case for name, case in cases.items()}


def config_for_case(case: dict, d1: int, d2: int, delta: float = 0.0) -> KonijnConfig:
    """KonijnConfig of a simulation case with the default mixing matrices."""
    return default_config(d1, d2, case["marginal1"], case["marginal2"], delta)
