"""
Unit tests for score functions and chi-square helpers.
"""

import numpy as np
import pytest
from scipy.integrate import quad
from scipy.stats import norm

from src.models.domain import ScoreKind
from src.models.errors import ScoreError
from src.services.scores import chi2_cdf, chi2_quantile, chi2_sf, make_score

pytestmark = pytest.mark.unit


class TestChiSquare:
    """Tests for chi-square distribution helpers."""

    def test_cdf_at_quantile(self):
        """Test the 95% point of chi-square(4)."""
        assert chi2_cdf(9.487729037, 4) == pytest.approx(0.95, abs=1e-9)

    def test_quantile(self):
        """Test the inverse at the same point."""
        assert chi2_quantile(0.95, 4) == pytest.approx(9.4877290368, abs=1e-8)

    def test_cdf_at_zero(self):
        """Test that the distribution function vanishes at zero."""
        assert chi2_cdf(0.0, 3) == 0.0

    def test_sf_complements_cdf(self):
        """Test sf = 1 - cdf."""
        x = np.array([0.5, 2.0, 7.5])
        np.testing.assert_allclose(chi2_sf(x, 2), 1.0 - chi2_cdf(x, 2), atol=1e-15)

    def test_vectorized(self):
        """Test that arrays give arrays."""
        result = chi2_cdf(np.array([1.0, 2.0]), 1)
        assert isinstance(result, np.ndarray) and result.shape == (2,)

    @pytest.mark.parametrize("df", range(1, 21))
    def test_round_trip(self, df):
        """Test chi2_cdf(chi2_quantile(p)) = p across the unit interval."""
        for p in (0.001, 0.01, 0.1, 0.5, 0.9, 0.95, 0.99, 0.999):
            assert chi2_cdf(chi2_quantile(p, df), df) == pytest.approx(p, abs=1e-8)

    def test_negative_argument(self):
        """Test that x < 0 is rejected."""
        with pytest.raises(ScoreError, match="x >= 0"):
            chi2_cdf(-1.0, 2)

    def test_quantile_at_one(self):
        """Test that p = 1 is rejected."""
        with pytest.raises(ScoreError):
            chi2_quantile(1.0, 2)

    def test_invalid_df(self):
        """Test that df must be a positive integer."""
        with pytest.raises(ScoreError, match="Degrees of freedom"):
            chi2_cdf(1.0, 0)


class TestMakeScore:
    """Tests for score construction."""

    def test_sign(self):
        """Test J = 1 with unit variance."""
        J = make_score("sign")
        np.testing.assert_array_equal(J([0.1, 0.9]), [1.0, 1.0])
        assert J.sigma2 == 1.0
        assert J.label == "sign"

    def test_wilcoxon(self):
        """Test J(u) = u with variance 1/3."""
        J = make_score(ScoreKind.WILCOXON)
        np.testing.assert_array_equal(J([0.25, 0.5]), [0.25, 0.5])
        assert J.sigma2 == pytest.approx(1.0 / 3.0)

    def test_van_der_waerden_one_dimension(self):
        """Test that d = 1 scores are half-normal quantiles."""
        J = make_score("vdw", 1)
        u = np.array([0.1, 0.5, 0.95])
        np.testing.assert_allclose(J(u), norm.ppf((1.0 + u) / 2.0), rtol=1e-10)
        assert J.sigma2 == 1.0

    def test_van_der_waerden_variance(self):
        """Test that the variance of vdw scores is d."""
        J = make_score("vdw", 3)
        assert J.sigma2 == 3.0
        assert J.label == "vdw(3)"
        u = (np.arange(200000) + 0.5) / 200000
        assert np.mean(J(u) ** 2) == pytest.approx(3.0, rel=1e-3)

    @pytest.mark.parametrize(
        "kind, d", [("sign", None), ("wilcoxon", None), ("vdw", 1), ("vdw", 2), ("vdw", 5)]
    )
    def test_variance_matches_quadrature(self, kind, d):
        """Test sigma2 against the integral of J(u)^2 over (0, 1)."""
        J = make_score(kind, d)
        integral, _ = quad(lambda u: float(J(u)) ** 2, 0.0, 1.0, limit=200, epsabs=1e-11)
        assert J.sigma2 == pytest.approx(integral, abs=1e-8)

    def test_van_der_waerden_needs_dimension(self):
        """Test that vdw without d is rejected."""
        with pytest.raises(ScoreError, match="dimension"):
            make_score("vdw")

    def test_unknown_kind(self):
        """Test that unknown score kinds are rejected."""
        with pytest.raises(ScoreError, match="Unknown score kind"):
            make_score("normal")
