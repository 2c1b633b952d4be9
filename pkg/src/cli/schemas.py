"""Pydantic schemas for command-line run configuration and reports."""

from pathlib import Path
from typing import Dict, List, Literal, Optional

from pydantic import BaseModel, Field, field_serializer, model_validator

from src.models.domain import EfficiencyReport, PowerCurve, TestKind, TestResult

SIGNIFICANT_DIGITS = 15

CommandName = Literal["test", "power", "critval", "are", "omega-table", "generate", "grid"]


def _round_significant(value: Optional[float]) -> Optional[float]:
    if value is None:
        return None
    return float(f"{value:.{SIGNIFICANT_DIGITS}g}")


class RunConfig(BaseModel):
    """Validated configuration of one CLI invocation."""
    command: CommandName
    input: Optional[Path] = None
    d1: Optional[int] = Field(default=None, ge=1)
    d2: Optional[int] = Field(default=None, ge=1)
    block1: Optional[List[str]] = None
    block2: Optional[List[str]] = None
    tests: List[TestKind] = Field(default_factory=lambda: list(TestKind))
    alpha: float = Field(default=0.05, gt=0.0, lt=1.0)
    method: Literal["asymptotic", "permutation"] = "asymptotic"
    B: int = Field(default=999, ge=1)
    exhaustive: bool = False
    grid_seed: int = 0
    data_seed: int = 1
    null_seed: int = 2
    reps: int = Field(default=1000, ge=1)
    taus: List[float] = Field(default_factory=lambda: [0.0, 0.2, 0.4, 0.6, 0.8])
    case: str = "a"
    n: List[int] = Field(default_factory=list)
    out: Optional[Path] = None
    threads: int = Field(default=1, ge=1)
    ranks_out: Optional[Path] = None

    # critval
    kinds: List[TestKind] = Field(default_factory=lambda: [TestKind.VDW])

    # are / omega-table
    score: Literal["sign", "wilcoxon", "vdw"] = "vdw"
    radial: Literal["gaussian", "t"] = "gaussian"
    nu: Optional[float] = None
    radial2: Optional[Literal["gaussian", "t"]] = None
    nu2: Optional[float] = None
    matrices: Optional[Path] = None
    max_d: int = Field(default=10, ge=1, le=50)

    # generate / grid
    tau: float = Field(default=0.0, ge=0.0)
    d: Optional[int] = Field(default=None, ge=1)

    @model_validator(mode="after")
    def check_invariants(self) -> "RunConfig":
        """Permutation p-values need B >= 100 unless the null is enumerated."""
        if self.method == "permutation" and not self.exhaustive and self.B < 100:
            raise ValueError(f"Permutation method needs B >= 100, got {self.B}")
        if any(n < 4 for n in self.n):
            raise ValueError(f"Sample sizes must be >= 4, got {self.n}")
        if any(tau < 0 for tau in self.taus):
            raise ValueError(f"Taus must be nonnegative, got {self.taus}")
        if any(not kind.is_rank_test for kind in self.kinds):
            raise ValueError("Null tables exist only for rank statistics")
        return self


class TestResultResponse(BaseModel):
    """One test outcome in a report."""
    __test__ = False  # not a pytest class

    name: str = Field(..., description="Test name")
    statistic: float = Field(..., description="Test statistic")
    df: int = Field(..., description="Degrees of freedom d1 * d2")
    pvalue: Optional[float] = Field(None, description="P-value")
    method: Optional[str] = Field(None, description="asymptotic or permutation(B=..., seed=...)")

    @field_serializer("statistic", "pvalue")
    def serialize_number(self, value: Optional[float]) -> Optional[float]:
        return _round_significant(value)

    @classmethod
    def from_result(cls, result: TestResult) -> "TestResultResponse":
        return cls(
            name=result.name,
            statistic=result.statistic,
            df=result.df,
            pvalue=result.pvalue,
            method=result.method,
        )


class TestReport(BaseModel):
    """Report of the `test` command."""
    __test__ = False  # not a pytest class

    n: int
    d1: int
    d2: int
    results: List[TestResultResponse]


class CriticalValuesResponse(BaseModel):
    """Summary of one null table."""
    kind: str
    n: int
    d1: int
    d2: int
    B: int
    seed: Optional[int]
    method: str
    quantiles: Dict[str, float]
    cache_key: str

    @field_serializer("quantiles")
    def serialize_quantiles(self, value: Dict[str, float]) -> Dict[str, float]:
        return {level: _round_significant(q) for level, q in value.items()}


class PowerCurveResponse(BaseModel):
    """Local asymptotic power at one tau."""
    test: str
    tau: float
    df: int
    ncp: float
    alpha: float
    power: float

    @field_serializer("ncp", "power")
    def serialize_number(self, value: float) -> float:
        return _round_significant(value)

    @classmethod
    def from_curve(cls, curve: PowerCurve) -> "PowerCurveResponse":
        return cls(
            test=curve.test,
            tau=curve.tau,
            df=curve.df,
            ncp=curve.ncp,
            alpha=curve.alpha,
            power=curve.power,
        )


class EfficiencyResponse(BaseModel):
    """Report of the `are` command."""
    score1: str
    score2: str
    radial1: str
    radial2: str
    d1: int
    d2: int
    C1: float
    C2: float
    D1: float
    D2: float
    are: float
    power: Optional[List[PowerCurveResponse]] = None

    @field_serializer("C1", "C2", "D1", "D2", "are")
    def serialize_number(self, value: float) -> float:
        return _round_significant(value)

    @classmethod
    def from_report(
        cls,
        report: EfficiencyReport,
        curves: Optional[List[PowerCurve]] = None,
    ) -> "EfficiencyResponse":
        return cls(
            score1=report.score1,
            score2=report.score2,
            radial1=report.radial1,
            radial2=report.radial2,
            d1=report.d1,
            d2=report.d2,
            C1=report.C1,
            C2=report.C2,
            D1=report.D1,
            D2=report.D2,
            are=report.are,
            power=[PowerCurveResponse.from_curve(c) for c in curves] if curves else None,
        )
