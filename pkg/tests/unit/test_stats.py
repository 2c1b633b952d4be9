"""
Unit tests for cross-covariance matrices and test statistics.
"""

import math

import numpy as np
import pytest

from src.models.domain import CrossCovKind, CrossCovMatrix, ScoreKind, TestKind
from src.models.errors import DegenerateDataError, StatisticError
from src.services.grid import make_grid
from src.services.scores import make_score
from src.services.stats import (
    kendall_matrix,
    p_value_asymptotic,
    rank_statistic,
    t_statistic,
    w_kendall,
    w_score,
    wilks,
)
from src.services.transport import center_outward

pytestmark = pytest.mark.unit


def _ranks_1d(values):
    return center_outward(np.asarray(values, dtype=float).reshape(-1, 1), make_grid(4, 1))


@pytest.fixture
def increasing():
    return _ranks_1d([1, 2, 3, 4])


@pytest.fixture
def swapped():
    return _ranks_1d([2, 1, 4, 3])


class TestScoreMatrices:
    """Tests for sign, Spearman and general score matrices."""

    def test_sign_identical_blocks(self, increasing):
        """Test W = 1 for identical one-dimensional blocks."""
        sign = make_score("sign")
        w = w_score(increasing, increasing, sign, sign)
        assert w.kind == CrossCovKind.SIGN
        assert w.w[0, 0] == pytest.approx(1.0)

    def test_spearman_identical_blocks(self, increasing):
        """Test W = 5/18 for the Spearman matrix of identical blocks."""
        wilcoxon = make_score("wilcoxon")
        w = w_score(increasing, increasing, wilcoxon, wilcoxon)
        assert w.kind == CrossCovKind.SPEARMAN
        assert w.w[0, 0] == pytest.approx(5.0 / 18.0)

    def test_spearman_swapped_pairs(self, increasing, swapped):
        """Test W = 2/9 when adjacent observations are swapped."""
        wilcoxon = make_score("wilcoxon")
        w = w_score(increasing, swapped, wilcoxon, wilcoxon)
        assert w.w[0, 0] == pytest.approx(2.0 / 9.0)

    def test_size_mismatch(self, increasing):
        """Test that blocks of different sizes are rejected."""
        other = center_outward(np.arange(6.0), make_grid(6, 1))
        sign = make_score("sign")
        with pytest.raises(StatisticError, match="different sizes"):
            w_score(increasing, other, sign, sign)


class TestKendall:
    """Tests for the Kendall matrix."""

    def test_concordant(self, increasing):
        """Test W = 1 when all pairs are concordant."""
        assert w_kendall(increasing, increasing).w[0, 0] == pytest.approx(1.0)

    def test_discordant(self, increasing):
        """Test W = -1 for reversed data."""
        reversed_ = _ranks_1d([4, 3, 2, 1])
        assert w_kendall(increasing, reversed_).w[0, 0] == pytest.approx(-1.0)

    def test_classical_tau(self, increasing, swapped):
        """Test W = 1/3 with four concordant and two discordant pairs."""
        assert w_kendall(increasing, swapped).w[0, 0] == pytest.approx(1.0 / 3.0)

    def test_matches_pairwise_loop(self, rng):
        """Test the vectorized matrix against an explicit loop over pairs."""
        a = rng.standard_normal((25, 2))
        b = rng.standard_normal((25, 3))
        expected = np.zeros((2, 3))
        for i in range(25):
            for j in range(25):
                if i != j:
                    expected += np.outer(np.sign(a[i] - a[j]), np.sign(b[i] - b[j]))
        expected /= 25 * 24
        np.testing.assert_allclose(kendall_matrix(a, b), expected, atol=1e-15)

    def test_needs_two_observations(self):
        """Test that n < 2 is rejected."""
        with pytest.raises(StatisticError, match="n >= 2"):
            kendall_matrix(np.zeros((1, 1)), np.zeros((1, 1)))


class TestTStatistic:
    """Tests for the scaled squared norms."""

    def test_sign(self):
        """Test T = n d1 d2 |W|^2 for signs."""
        sign = make_score("sign")
        w = CrossCovMatrix(w=[[1.0]], kind=CrossCovKind.SIGN, scores=(sign, sign))
        result = t_statistic(w, 4, 1, 1)
        assert result.statistic == pytest.approx(4.0)
        assert result.df == 1
        assert result.name == "sign"

    @pytest.mark.parametrize("kind", list(CrossCovKind))
    def test_zero_matrix(self, kind):
        """Test that W = 0 gives T = 0."""
        J = make_score("vdw", 2) if kind == CrossCovKind.SCORE else make_score("sign")
        scores = None if kind == CrossCovKind.KENDALL else (J, J)
        w = CrossCovMatrix(w=np.zeros((2, 2)), kind=kind, scores=scores)
        assert t_statistic(w, 50, 2, 2).statistic == 0.0

    def test_kendall_scaling(self):
        """Test T = 9n/4 |W|^2 for Kendall."""
        w = CrossCovMatrix(w=[[0.5]], kind=CrossCovKind.KENDALL)
        assert t_statistic(w, 8, 1, 1).statistic == pytest.approx(9 * 8 / 4 * 0.25)

    def test_van_der_waerden_reduces_to_n_norm(self, gaussian_pair, grids_40):
        """Test that vdw scaling n d1 d2 / (d1 d2) gives n |W|^2."""
        rs1 = center_outward(gaussian_pair[0], grids_40[0])
        rs2 = center_outward(gaussian_pair[1], grids_40[1])
        J = make_score(ScoreKind.VDW, 2)
        w = w_score(rs1, rs2, J, J)
        result = t_statistic(w, 40, 2, 2)
        assert result.name == "vdw"
        assert result.statistic == pytest.approx(40 * np.sum(w.w**2), rel=1e-12)

    def test_shape_mismatch(self):
        """Test that a W of the wrong shape is rejected."""
        w = CrossCovMatrix(w=[[0.1]], kind=CrossCovKind.KENDALL)
        with pytest.raises(StatisticError, match="shape"):
            t_statistic(w, 8, 2, 1)


class TestAsymptoticPValue:
    """Tests for chi-square p-values."""

    def test_zero_statistic(self):
        """Test p = 1 at T = 0."""
        assert p_value_asymptotic(0.0, 3) == 1.0

    def test_critical_value(self):
        """Test p = 0.05 at the 95% point of chi-square(4)."""
        assert p_value_asymptotic(9.4877290368, 4) == pytest.approx(0.05, abs=1e-9)

    def test_normal_tail(self):
        """Test p = 2 (1 - Phi(2)) for one degree of freedom."""
        assert p_value_asymptotic(4.0, 1) == pytest.approx(math.erfc(2 / math.sqrt(2)), rel=1e-10)

    def test_negative_statistic(self):
        """Test that negative statistics are rejected."""
        with pytest.raises(StatisticError):
            p_value_asymptotic(-1.0, 1)


class TestRankStatistic:
    """Tests for rank_statistic dispatch."""

    @pytest.mark.parametrize("kind", [TestKind.SIGN, TestKind.SPEARMAN, TestKind.KENDALL, TestKind.VDW])
    def test_names_and_df(self, kind, gaussian_pair, grids_40):
        """Test that each kind reports its name and d1 * d2 degrees of freedom."""
        rs1 = center_outward(gaussian_pair[0], grids_40[0])
        rs2 = center_outward(gaussian_pair[1], grids_40[1])
        result = rank_statistic(kind, rs1, rs2)
        assert result.name == kind.value
        assert result.df == 4
        assert result.statistic >= 0.0
        assert result.pvalue is None

    def test_wilks_is_not_a_rank_statistic(self, increasing):
        """Test that Wilks cannot be computed from ranks."""
        with pytest.raises(StatisticError, match="not a score test"):
            rank_statistic(TestKind.WILKS, increasing, increasing)


class TestWilks:
    """Tests for the Gaussian likelihood-ratio benchmark."""

    def test_uncorrelated_blocks(self):
        """Test T = 0 when the sample cross-covariance vanishes."""
        x1 = np.array([1, -1, 1, -1, 1, -1, 1, -1], dtype=float)
        x2 = np.array([1, 1, -1, -1, 1, 1, -1, -1], dtype=float)
        result = wilks(x1, x2)
        assert result.statistic == pytest.approx(0.0, abs=1e-12)
        assert result.pvalue == pytest.approx(1.0)

    def test_correlation_formula(self, rng):
        """Test T = -n log(1 - r^2) in one dimension."""
        x1 = rng.standard_normal(30)
        x2 = 0.5 * x1 + rng.standard_normal(30)
        r = np.corrcoef(x1, x2)[0, 1]
        result = wilks(x1, x2)
        assert result.statistic == pytest.approx(-30 * math.log(1 - r**2), rel=1e-10)
        assert result.method == "asymptotic"
        assert result.df == 1

    def test_needs_enough_observations(self, rng):
        """Test that n <= d1 + d2 is rejected."""
        with pytest.raises(StatisticError, match="n > d1 \\+ d2"):
            wilks(rng.standard_normal((4, 2)), rng.standard_normal((4, 2)))

    def test_singular_covariance(self, rng):
        """Test that a singular block covariance is reported."""
        x1 = rng.standard_normal((20, 1))
        with pytest.raises(DegenerateDataError, match="singular"):
            wilks(np.hstack([x1, x1]), rng.standard_normal((20, 1)))
