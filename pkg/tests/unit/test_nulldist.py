"""
Unit tests for null tables, exact p-values and the complete rank tests.
"""

import math

import numpy as np
import pytest

from src.models.domain import NullTable, TestKind
from src.models.errors import NullDistributionError, StatisticError
from src.services.grid import make_grid
from src.services.nulldist import (
    _pairing_statistic,
    critical_values,
    enumerate_null,
    exact_pvalue,
    null_quantile,
    simulate_null,
)
from src.services.rank_test import permutation_label, run_rank_test
from src.services.stats import rank_statistic
from src.services.transport import center_outward
from src.utils.rng import make_rng

pytestmark = pytest.mark.unit


def _table(values, seed=7):
    values = np.sort(np.asarray(values, dtype=float))
    return NullTable(
        kind=TestKind.VDW, n=10, d1=1, d2=1, grid_seeds=(None, None),
        B=values.size, values=values, seed=seed,
    )


class TestSimulateNull:
    """Tests for Monte Carlo null tables."""

    def test_reproducible(self, grids_40):
        """Test that the same seed gives the same table."""
        first = simulate_null("vdw", *grids_40, B=150, seed=11)
        second = simulate_null("vdw", *grids_40, B=150, seed=11)
        np.testing.assert_array_equal(first.values, second.values)
        assert first.B == 150 and first.seed == 11
        assert np.all(np.diff(first.values) >= 0)

    def test_independent_of_workers(self, grids_40):
        """Test that splitting across processes leaves the table unchanged."""
        serial = simulate_null("sign", *grids_40, B=120, seed=3, workers=1)
        parallel = simulate_null("sign", *grids_40, B=120, seed=3, workers=2)
        np.testing.assert_array_equal(serial.values, parallel.values)

    def test_prefix_stability(self, grids_40):
        """Test that replicate b does not depend on B."""
        small = simulate_null("spearman", *grids_40, B=100, seed=5)
        large = simulate_null("spearman", *grids_40, B=200, seed=5)
        assert np.all(np.isin(small.values, large.values))

    @pytest.mark.parametrize("kind", [TestKind.SIGN, TestKind.SPEARMAN, TestKind.KENDALL, TestKind.VDW])
    def test_pairing_statistic_matches_sample_statistic(self, rng, kind):
        """Test that a sample's statistic is the statistic of its grid pairing."""
        grid1, grid2 = make_grid(12, 2), make_grid(12, 3, seed=4)
        rs1 = center_outward(rng.standard_normal((12, 2)), grid1)
        rs2 = center_outward(rng.standard_normal((12, 3)), grid2)
        pairing = np.empty(12, dtype=int)
        pairing[rs1.perm] = rs2.perm

        observed = rank_statistic(kind, rs1, rs2).statistic
        assert _pairing_statistic(kind, grid1, grid2)(pairing) == pytest.approx(observed, rel=1e-12)

    def test_too_few_pairings(self, grids_40):
        """Test that B < 100 is rejected."""
        with pytest.raises(NullDistributionError, match="B >= 100"):
            simulate_null("vdw", *grids_40, B=99, seed=1)

    def test_wilks_has_no_table(self, grids_40):
        """Test that Wilks tables are refused."""
        with pytest.raises(NullDistributionError, match="not a rank statistic"):
            simulate_null("wilks", *grids_40, B=100, seed=1)

    def test_grid_sizes_must_match(self):
        """Test that grids of different sizes are refused."""
        with pytest.raises(NullDistributionError, match="different sizes"):
            simulate_null("vdw", make_grid(10, 2), make_grid(12, 2), B=100, seed=1)


class TestEnumerateNull:
    """Tests for exhaustive null tables."""

    def test_all_pairings(self):
        """Test that n = 4 enumerates 4! pairings."""
        grid = make_grid(4, 1)
        table = enumerate_null("sign", grid, grid)
        assert table.B == math.factorial(4)
        assert table.exhaustive and table.seed is None

    def test_sign_values(self):
        """Test that the n = 4 sign statistic takes only the values 0 and 4."""
        grid = make_grid(4, 1)
        table = enumerate_null("sign", grid, grid)
        np.testing.assert_allclose(np.unique(table.values.round(12)), [0.0, 4.0])

    def test_exact_uniform_pvalue(self):
        """Test that the smallest observed value has p-value one."""
        grid = make_grid(4, 1)
        table = enumerate_null("spearman", grid, grid)
        assert exact_pvalue(table, table.values[0]) == 1.0

    def test_size_limit(self):
        """Test that n > 8 is refused."""
        grid = make_grid(9, 1)
        with pytest.raises(NullDistributionError, match="n <= 8"):
            enumerate_null("sign", grid, grid)


class TestExactPValue:
    """Tests for add-one p-values."""

    def test_above_all_values(self):
        """Test p = 1 / (B + 1) beyond the largest value."""
        table = _table(np.arange(100.0))
        assert exact_pvalue(table, 1000.0) == pytest.approx(1 / 101)

    def test_counts_ties(self):
        """Test that values equal to the observation count as exceedances."""
        table = _table(np.arange(100.0))
        assert exact_pvalue(table, 90.0) == pytest.approx(11 / 101)

    def test_relative_tie_tolerance(self):
        """Test that values a hair below the observation still count."""
        table = _table(np.arange(100.0))
        assert exact_pvalue(table, 90.0 * (1 + 1e-14)) == pytest.approx(11 / 101)

    def test_below_all_values(self):
        """Test p = 1 below the smallest value."""
        assert exact_pvalue(_table(np.arange(1.0, 101.0)), 0.0) == 1.0


class TestQuantiles:
    """Tests for null quantiles."""

    def test_inverted_cdf(self):
        """Test that quantiles are table values."""
        table = _table(np.arange(1.0, 101.0))
        assert null_quantile(table, 0.95) == 95.0
        assert null_quantile(table, 0.951) == 96.0

    def test_critical_values(self):
        """Test the default levels."""
        values = critical_values(_table(np.arange(1.0, 101.0)))
        assert values == {0.90: 90.0, 0.95: 95.0, 0.99: 99.0}

    def test_invalid_level(self):
        """Test that levels outside (0, 1] are rejected."""
        with pytest.raises(NullDistributionError):
            null_quantile(_table(np.arange(100.0)), 0.0)


class TestRunRankTest:
    """Tests for complete rank tests."""

    def test_asymptotic(self, gaussian_pair, grids_40):
        """Test the asymptotic method label and p-value range."""
        rs1 = center_outward(gaussian_pair[0], grids_40[0])
        rs2 = center_outward(gaussian_pair[1], grids_40[1])
        result = run_rank_test("vdw", rs1, rs2)
        assert result.method == "asymptotic"
        assert 0.0 <= result.pvalue <= 1.0

    def test_permutation(self, gaussian_pair, grids_40):
        """Test p-values from a matching null table."""
        rs1 = center_outward(gaussian_pair[0], grids_40[0])
        rs2 = center_outward(gaussian_pair[1], grids_40[1])
        table = simulate_null("vdw", *grids_40, B=199, seed=4)
        result = run_rank_test("vdw", rs1, rs2, "permutation", table)
        assert result.method == "permutation(B=199, seed=4)"
        assert result.pvalue == pytest.approx(exact_pvalue(table, result.statistic))
        assert result.pvalue >= 1 / 200

    def test_permutation_needs_table(self, gaussian_pair, grids_40):
        """Test that the permutation method requires a table."""
        rs1 = center_outward(gaussian_pair[0], grids_40[0])
        with pytest.raises(StatisticError, match="null table"):
            run_rank_test("sign", rs1, rs1, "permutation")

    def test_mismatched_table(self, gaussian_pair, grids_40):
        """Test that a table for another statistic is refused."""
        rs1 = center_outward(gaussian_pair[0], grids_40[0])
        rs2 = center_outward(gaussian_pair[1], grids_40[1])
        table = simulate_null("sign", *grids_40, B=100, seed=4)
        with pytest.raises(StatisticError, match="does not match"):
            run_rank_test("vdw", rs1, rs2, "permutation", table)

    def test_unknown_method(self, gaussian_pair, grids_40):
        """Test that unknown methods are refused."""
        rs1 = center_outward(gaussian_pair[0], grids_40[0])
        with pytest.raises(StatisticError, match="Unknown p-value method"):
            run_rank_test("sign", rs1, rs1, "bootstrap")

    def test_exhaustive_label(self):
        """Test the label of enumerated tables."""
        grid = make_grid(4, 1)
        assert permutation_label(enumerate_null("sign", grid, grid)) == "exhaustive(B=24)"


class TestNullValidity:
    """Tests that simulated tables reproduce the null law of the statistics."""

    @pytest.fixture(scope="class")
    def sign_table_432(self):
        grid = make_grid(432, 2, 0)
        return simulate_null("sign", grid, grid, B=5000, seed=11)

    def test_rejection_rate_at_five_percent(self, grids_40):
        """Test the permutation test level over 1000 independent null datasets with B = 999."""
        table = simulate_null("vdw", *grids_40, B=999, seed=21)
        rng = make_rng(22)
        rejections = 0
        for _ in range(1000):
            rs1 = center_outward(rng.standard_normal((40, 2)), grids_40[0])
            rs2 = center_outward(rng.standard_normal((40, 2)), grids_40[1])
            rejections += run_rank_test("vdw", rs1, rs2, "permutation", table).pvalue <= 0.05
        # Binomial spread of the datasets plus that of the table's own 0.95 quantile
        band = 3 * math.sqrt(0.05 * 0.95 * (1 / 1000 + 1 / 999))
        assert abs(rejections / 1000 - 0.05) <= band

    def test_mean_close_to_degrees_of_freedom(self, sign_table_432):
        """Test that simulated sign statistics average d1 d2 n / (n - 1)."""
        assert np.mean(sign_table_432.values) == pytest.approx(4 * 432 / 431, rel=0.04)

    def test_upper_quantile_matches_chi_square(self, sign_table_432):
        """Test that the simulated 0.95 quantile at n = 432 is within 5% of 9.4877."""
        assert null_quantile(sign_table_432, 0.95) == pytest.approx(9.4877, rel=0.05)

    def test_pvalue_non_increasing(self, rng):
        """Test that larger observed values never get larger p-values."""
        table = _table(rng.chisquare(4, size=500))
        observed = np.concatenate([np.linspace(-1.0, 25.0, 400), table.values[::7], [1e3]])
        pvalues = [exact_pvalue(table, t) for t in np.sort(observed)]
        assert all(a >= b for a, b in zip(pvalues, pvalues[1:]))
        assert pvalues[0] == 1.0 and pvalues[-1] == 1 / 501
