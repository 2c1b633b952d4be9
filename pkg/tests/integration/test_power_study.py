"""
Full-scale Monte Carlo rejection rates at n = 432, d1 = d2 = 2.
"""

import pytest

from src.config import SimulationSettings
from src.models.domain import TestKind
from src.services.konijn import config_for_case, load_cases
from src.tasks import PowerStudy, run_power_study

pytestmark = [pytest.mark.integration, pytest.mark.slow]

WORKERS = 4


def _run(case, taus, tests):
    cases = load_cases(SimulationSettings().SIM_CASES_FILE)
    study = PowerStudy(
        case=case,
        config=config_for_case(cases[case], 2, 2),
        n=432,
        taus=taus,
        tests=tests,
        replications=1000,
        alpha=0.05,
        data_seed=1,
        grid_seed=0,
    )
    table = run_power_study(study, workers=WORKERS)
    return {test: table.frequencies[i] for i, test in enumerate(table.tests)}


class TestGaussianCase:
    """Tests for case (a)."""

    def test_size_and_power(self):
        """Test the 5% level at tau = 0 and the power of sign, vdw and Wilks at tau = 0.8."""
        freq = _run("a", [0.0, 0.8], list(TestKind))

        for test, row in freq.items():
            assert 0.035 <= row[0] <= 0.065, test
        assert freq["vdw"][1] == pytest.approx(0.394, abs=0.05)
        assert freq["wilks"][1] == pytest.approx(0.427, abs=0.05)
        assert freq["sign"][1] == pytest.approx(0.263, abs=0.05)


class TestNonGaussianCases:
    """Tests for heavy-tailed and skewed marginals."""

    def test_elliptical_t(self):
        """Test that vdw beats Wilks under elliptical t(3) marginals."""
        freq = _run("b", [0.8], [TestKind.VDW, TestKind.WILKS])
        assert freq["vdw"][0] == pytest.approx(0.538, abs=0.05)
        assert freq["wilks"][0] == pytest.approx(0.464, abs=0.05)
        assert freq["vdw"][0] > freq["wilks"][0]

    def test_chi_square_components(self):
        """Test the gap between vdw and Wilks under skewed marginals."""
        freq = _run("d", [0.4], [TestKind.VDW, TestKind.WILKS])
        assert freq["vdw"][0] == pytest.approx(0.943, abs=0.03)
        assert freq["wilks"][0] == pytest.approx(0.131, abs=0.04)
