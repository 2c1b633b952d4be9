from .domain import (
    Assignment,
    CrossCovKind,
    CrossCovMatrix,
    EfficiencyReport,
    Grid,
    GridSpec,
    KonijnConfig,
    MarginalKind,
    NullTable,
    PowerCurve,
    PowerTable,
    RadialFamily,
    RadialKind,
    RanksSigns,
    ScoreFunction,
    ScoreKind,
    SphereArray,
    TestKind,
    TestResult,
)
from .errors import (
    CorankError,
    InputError,
    NumericalError,
)
