"""
Asymptotic relative efficiencies and local power.

Covers the ARE of center-outward score tests with respect to Wilks' test
under elliptical Konijn alternatives, its lower bound Omega(d1, d2) for
Wilcoxon scores, and the noncentral chi-square local power curves.
"""

import logging
import math
import warnings
from typing import Iterable, List, Tuple

import numpy as np
from scipy import special
from scipy.integrate import IntegrationWarning, quad
from scipy.linalg import eigh
from scipy.optimize import brentq
from scipy.stats import ncx2

from src.models.domain import (
    EfficiencyReport,
    PowerCurve,
    RadialFamily,
    RadialKind,
    ScoreFunction,
    ScoreKind,
)
from src.models.errors import (
    BracketingError,
    EfficiencyError,
    QuadratureError,
    ScoreError,
)
from src.services.scores import chi2_cdf, chi2_quantile, make_score

logger = logging.getLogger(__name__)

MAX_BESSEL_ORDER = 10.0
MAX_BESSEL_ARGUMENT = 60.0
MAX_DIMENSION = 50

QUADRATURE_EPS = 1e-10
QUADRATURE_TOLERANCE = 1e-8

_ROOT_SCAN_START = 1e-3
_ROOT_SCAN_STEP = 0.05


def bessel_j(a: float, x: float) -> float:
    """
    Bessel function of the first kind J_a(x).

    Raises:
        ScoreError: Unless 0 <= a <= 10 and 0 < x <= 60
    """
    if not 0.0 <= a <= MAX_BESSEL_ORDER:
        raise ScoreError(f"Bessel order must be in [0, {MAX_BESSEL_ORDER}], got {a}")
    if not 0.0 < x <= MAX_BESSEL_ARGUMENT:
        raise ScoreError(f"Bessel argument must be in (0, {MAX_BESSEL_ARGUMENT}], got {x}")
    return float(special.jv(a, x))


def bessel_order(d: int) -> float:
    """Order sqrt(2d - 1) / 2 entering c_d."""
    return math.sqrt(2 * d - 1) / 2.0


def sqrt_x_bessel_derivative(a: float, x: float) -> float:
    """Derivative of g(x) = sqrt(x) J_a(x)."""
    return float(special.jv(a, x) / (2.0 * math.sqrt(x)) + math.sqrt(x) * special.jvp(a, x))


def c_d(d: int) -> float:
    """
    First positive stationary point of sqrt(x) J_a(x), a = sqrt(2d - 1) / 2.

    The derivative is scanned upward from near zero for its first sign
    change, then refined with Brent's method.

    Raises:
        EfficiencyError: Unless 1 <= d <= 50
        BracketingError: If no sign change is found below x = 60
    """
    if int(d) != d or not 1 <= d <= MAX_DIMENSION:
        raise EfficiencyError(f"Dimension must be an integer in [1, {MAX_DIMENSION}], got {d}")
    a = bessel_order(d)

    lo = _ROOT_SCAN_START
    f_lo = sqrt_x_bessel_derivative(a, lo)
    while lo < MAX_BESSEL_ARGUMENT:
        hi = min(lo + _ROOT_SCAN_STEP, MAX_BESSEL_ARGUMENT)
        f_hi = sqrt_x_bessel_derivative(a, hi)
        if f_lo == 0.0:
            return lo
        if f_lo * f_hi < 0.0:
            return brentq(lambda x: sqrt_x_bessel_derivative(a, x), lo, hi, xtol=1e-14, rtol=1e-14)
        lo, f_lo = hi, f_hi

    raise BracketingError(f"No stationary point of sqrt(x) J_{a:.4g}(x) below {MAX_BESSEL_ARGUMENT}")


def _omega_from(c1: float, c2: float, d1: int, d2: int) -> float:
    numerator = 9.0 * (2 * c1**2 + d1 - 1) ** 2 * (2 * c2**2 + d2 - 1) ** 2
    return numerator / (1024.0 * d1 * d2 * c1**2 * c2**2)


def omega(d1: int, d2: int) -> float:
    """
    Lower bound on the ARE of the Spearman-type (Wilcoxon score) test
    with respect to Wilks' test over elliptical alternatives.
    """
    return _omega_from(c_d(d1), c_d(d2), d1, d2)


def omega_table(max_d: int = 10) -> List[Tuple[int, int, float]]:
    """(d1, d2, Omega) for all 1 <= d1, d2 <= max_d."""
    constants = {d: c_d(d) for d in range(1, max_d + 1)}
    rows = []
    for d1 in range(1, max_d + 1):
        for d2 in range(1, max_d + 1):
            rows.append((d1, d2, _omega_from(constants[d1], constants[d2], d1, d2)))
    return rows


def radial_quantile(family: RadialFamily, d: int, u):
    """
    Quantile function of |X| for a unit-covariance spherical law in R^d.

    Gaussian: sqrt of the chi-square(d) quantile. t(nu): |X|^2 / d is
    F(d, nu) up to the factor (nu - 2) / nu.
    """
    u = np.asarray(u, dtype=float)
    if family.kind == RadialKind.GAUSSIAN:
        return np.sqrt(2.0 * special.gammaincinv(d / 2.0, u))
    nu = family.nu
    return np.sqrt((nu - 2.0) / nu * d * special.fdtri(d, nu, u))


def radial_score(family: RadialFamily, d: int, r):
    """Location score rho = -phi'/phi of the radial density at r."""
    r = np.asarray(r, dtype=float)
    if family.kind == RadialKind.GAUSSIAN:
        return r
    nu = family.nu
    return (nu + d) * r / ((nu - 2.0) + r * r)


def _quad_unit_interval(integrand, limit: int, tol: float, breaks: Tuple[float, ...]) -> float:
    """
    Integral over (eps, 1 - eps), the upper half in s = -log(1 - u) so that
    power singularities at u = 1 become exponentially decaying tails.
    """
    def upper(s: float) -> float:
        return integrand(-math.expm1(-s)) * math.exp(-s)

    s_max = -math.log(QUADRATURE_EPS)
    lower_part, _ = quad(integrand, QUADRATURE_EPS, 0.5, limit=limit, epsabs=tol, epsrel=tol)
    upper_part, _ = quad(
        upper, math.log(2.0), s_max, points=breaks or None, limit=limit, epsabs=tol, epsrel=tol
    )
    return lower_part + upper_part


def _integrate(integrand, label: str) -> float:
    """Integrate at two refinement levels and insist they agree."""
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", IntegrationWarning)
        coarse = _quad_unit_interval(integrand, limit=100, tol=1e-10, breaks=())
        fine = _quad_unit_interval(integrand, limit=500, tol=1e-13, breaks=(2.0, 5.0, 10.0))

    gap = abs(fine - coarse)
    if gap > QUADRATURE_TOLERANCE * max(1.0, abs(fine)):
        raise QuadratureError(f"Quadrature for {label} did not converge (levels differ by {gap:.3g})")
    if gap > 0.1 * QUADRATURE_TOLERANCE:
        logger.warning(f"Quadrature for {label}: refinement levels differ by {gap:.3g}")
    return fine


def cross_moments(J: ScoreFunction, family: RadialFamily, d: int) -> Tuple[float, float]:
    """
    C = int J(u) rho(Q(u)) du and D = int J(u) Q(u) du over (0, 1),
    Q the radial quantile function.
    """
    def c_integrand(u: float) -> float:
        return float(J(u) * radial_score(family, d, radial_quantile(family, d, u)))

    def d_integrand(u: float) -> float:
        return float(J(u) * radial_quantile(family, d, u))

    C = _integrate(c_integrand, f"C({J.label}, {family.label})")
    D = _integrate(d_integrand, f"D({J.label}, {family.label})")
    return C, D


def _spd_roots(sigma: np.ndarray, name: str) -> Tuple[np.ndarray, np.ndarray]:
    """Symmetric square root and inverse square root of an SPD matrix."""
    if sigma.ndim != 2 or sigma.shape[0] != sigma.shape[1]:
        raise EfficiencyError(f"{name} must be square, got shape {sigma.shape}")
    if not np.allclose(sigma, sigma.T, rtol=1e-10, atol=1e-12):
        raise EfficiencyError(f"{name} is not symmetric")
    values, vectors = eigh(sigma)
    if np.any(values <= 0.0):
        raise EfficiencyError(f"{name} is not positive definite")
    root = (vectors * np.sqrt(values)) @ vectors.T
    inverse_root = (vectors / np.sqrt(values)) @ vectors.T
    return root, inverse_root


def _alternative_terms(Sigma1, Sigma2, M1, M2, d1: int, d2: int) -> Tuple[np.ndarray, np.ndarray]:
    """
    A = Sigma1^(1/2) M2' Sigma2^(-1/2) and B = Sigma1^(-1/2) M1 Sigma2^(1/2).
    """
    sigma1 = np.eye(d1) if Sigma1 is None else np.atleast_2d(np.asarray(Sigma1, dtype=float))
    sigma2 = np.eye(d2) if Sigma2 is None else np.atleast_2d(np.asarray(Sigma2, dtype=float))
    m1 = np.eye(d1, d2) if M1 is None else np.atleast_2d(np.asarray(M1, dtype=float))
    m2 = m1.T if M2 is None else np.atleast_2d(np.asarray(M2, dtype=float))

    if sigma1.shape != (d1, d1) or sigma2.shape != (d2, d2):
        raise EfficiencyError(f"Sigma1 must be {d1}x{d1} and Sigma2 {d2}x{d2}")
    if m1.shape != (d1, d2) or m2.shape != (d2, d1):
        raise EfficiencyError(f"M1 must be {d1}x{d2} and M2 {d2}x{d1}")

    root1, inverse_root1 = _spd_roots(sigma1, "Sigma1")
    root2, inverse_root2 = _spd_roots(sigma2, "Sigma2")
    return root1 @ m2.T @ inverse_root2, inverse_root1 @ m1 @ root2


def _squared_norm(matrix: np.ndarray) -> float:
    return math.fsum(float(v) ** 2 for v in matrix.ravel())


def wilks_noncentrality(Sigma1, Sigma2, M1=None, M2=None, tau: float = 1.0) -> float:
    """
    Noncentrality tau^2 |A + B|^2 of Wilks' test under the elliptical
    Konijn alternative delta = tau / sqrt(n).

    Args:
        Sigma1, Sigma2: Block covariance matrices (they fix d1 and d2)
        M1, M2: Mixing matrices (default M1 = I, M2 = M1')
        tau: Local parameter
    """
    d1 = np.atleast_2d(Sigma1).shape[0]
    d2 = np.atleast_2d(Sigma2).shape[0]
    A, B = _alternative_terms(Sigma1, Sigma2, M1, M2, d1, d2)
    return tau**2 * _squared_norm(A + B)


def _as_score(score, d: int) -> ScoreFunction:
    if isinstance(score, ScoreFunction):
        return score
    return make_score(ScoreKind(score), d)


def are_elliptical(
    score1: ScoreFunction | ScoreKind | str,
    score2: ScoreFunction | ScoreKind | str,
    radial1: RadialFamily,
    radial2: RadialFamily,
    d1: int,
    d2: int,
    Sigma1=None,
    Sigma2=None,
    M1=None,
    M2=None,
) -> EfficiencyReport:
    """
    ARE of a center-outward score test with respect to Wilks' test.

    ARE = |D1 C2 A + D2 C1 B|^2 / (d1 d2 s1 s2 |A + B|^2) with s_k the
    score variances, A and B the alternative terms and C_k, D_k the score
    cross moments of each block's radial law.

    Args:
        score1, score2: Score functions or kinds (vdw uses d1 / d2)
        radial1, radial2: Radial families of the two blocks
        d1, d2: Block dimensions
        Sigma1, Sigma2: Block covariance matrices (default identity)
        M1, M2: Mixing matrices (default M1 = I, M2 = M1')

    Returns:
        EfficiencyReport

    Raises:
        EfficiencyError: For invalid matrices or a vanishing alternative
        QuadratureError: If the cross moments do not converge
    """
    if d1 < 1 or d2 < 1:
        raise EfficiencyError(f"Dimensions must be >= 1, got d1={d1}, d2={d2}")
    J1, J2 = _as_score(score1, d1), _as_score(score2, d2)
    A, B = _alternative_terms(Sigma1, Sigma2, M1, M2, d1, d2)

    wilks_unit = _squared_norm(A + B)
    if wilks_unit == 0.0:
        raise EfficiencyError("The alternative has A + B = 0; Wilks' noncentrality vanishes")

    C1, D1 = cross_moments(J1, radial1, d1)
    C2, D2 = cross_moments(J2, radial2, d2)

    score_unit = _squared_norm(D1 * C2 * A + D2 * C1 * B) / (d1 * d2 * J1.sigma2 * J2.sigma2)
    are = score_unit / wilks_unit
    logger.debug(f"ARE({J1.label}, {J2.label} | {radial1.label}, {radial2.label}) = {are:.10g}")

    return EfficiencyReport(
        score1=J1.label,
        score2=J2.label,
        radial1=radial1.label,
        radial2=radial2.label,
        d1=d1,
        d2=d2,
        C1=C1,
        C2=C2,
        D1=D1,
        D2=D2,
        are=are,
        score_ncp_unit=score_unit,
        wilks_ncp_unit=wilks_unit,
    )


def score_noncentrality(report: EfficiencyReport, tau: float) -> float:
    """Noncentrality of the score test at tau: ARE times Wilks' noncentrality."""
    return tau**2 * report.score_ncp_unit


def noncentral_chi2_cdf(x: float, df: int, ncp: float) -> float:
    """
    Noncentral chi-square distribution function.

    Raises:
        EfficiencyError: If x < 0 or ncp < 0
    """
    if not x >= 0:
        raise EfficiencyError(f"x must be >= 0, got {x}")
    if not ncp >= 0:
        raise EfficiencyError(f"Noncentrality must be >= 0, got {ncp}")
    if ncp == 0:
        return chi2_cdf(x, df)
    return float(ncx2.cdf(x, df, ncp))


def local_power(df: int, ncp: float, alpha: float) -> float:
    """
    Limiting rejection probability of a chi-square test at level alpha
    under a noncentral chi-square(df, ncp) statistic.
    """
    if not 0.0 < alpha < 1.0:
        raise EfficiencyError(f"alpha must be in (0, 1), got {alpha}")
    if not ncp >= 0:
        raise EfficiencyError(f"Noncentrality must be >= 0, got {ncp}")
    if ncp == 0:
        return alpha
    critical = chi2_quantile(1.0 - alpha, df)
    power = 1.0 - noncentral_chi2_cdf(critical, df, ncp)
    return min(1.0, max(alpha, power))


def _score_test_name(report: EfficiencyReport) -> str:
    if report.score1.startswith("vdw") and report.score2.startswith("vdw"):
        return "vdw"
    if report.score1 == report.score2 == ScoreKind.WILCOXON.value:
        return "spearman"
    if report.score1 == report.score2 == ScoreKind.SIGN.value:
        return "sign"
    return f"score({report.score1},{report.score2})"


def power_curve(report: EfficiencyReport, taus: Iterable[float], alpha: float) -> List[PowerCurve]:
    """
    Local power of the score test and of Wilks' test along a tau grid.

    Returns:
        One PowerCurve row per (test, tau), score test first
    """
    rows = []
    name = _score_test_name(report)
    for tau in taus:
        for test, ncp in (
            (name, score_noncentrality(report, tau)),
            ("wilks", tau**2 * report.wilks_ncp_unit),
        ):
            rows.append(
                PowerCurve(
                    test=test,
                    tau=float(tau),
                    df=report.df,
                    ncp=ncp,
                    alpha=alpha,
                    power=local_power(report.df, ncp, alpha),
                )
            )
    return rows
