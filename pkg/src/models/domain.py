from dataclasses import dataclass, field
from enum import Enum
from typing import Callable, Optional, Tuple

import numpy as np


class ScoreKind(str, Enum):
    """Score functions J: [0, 1) -> R applied to rescaled ranks."""
    SIGN = "sign"
    WILCOXON = "wilcoxon"
    VDW = "vdw"


class TestKind(str, Enum):
    """
    Tests offered by the library.

    SIGN, SPEARMAN, KENDALL and VDW are center-outward rank tests;
    WILKS is the Gaussian likelihood-ratio benchmark.
    """
    __test__ = False  # not a pytest class

    SIGN = "sign"
    SPEARMAN = "spearman"
    KENDALL = "kendall"
    VDW = "vdw"
    WILKS = "wilks"

    @property
    def is_rank_test(self) -> bool:
        return self is not TestKind.WILKS


RANK_TESTS = (TestKind.SIGN, TestKind.SPEARMAN, TestKind.KENDALL, TestKind.VDW)


class CrossCovKind(str, Enum):
    """Flavours of the cross-covariance matrix W."""
    SIGN = "sign"
    SPEARMAN = "spearman"
    KENDALL = "kendall"
    SCORE = "score"


class MarginalKind(str, Enum):
    """Marginal laws of the independent blocks X*_1, X*_2."""
    GAUSSIAN = "gaussian"
    ELLIPTICAL_T = "elliptical_t"
    INDEPENDENT_T = "independent_t"
    CHI2_1 = "chi2_1_components"


class RadialKind(str, Enum):
    """Radial density families for elliptical efficiency computations."""
    GAUSSIAN = "gaussian"
    T = "t"


def _frozen_array(values, dtype=float) -> np.ndarray:
    arr = np.array(values, dtype=dtype)
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True)
class GridSpec:
    """
    Factorization n = nR * nS + n0 of the sample size.

    Attributes:
        n: Sample size
        d: Dimension of the unit ball
        nR: Number of radii
        nS: Number of directions (even)
        n0: Remainder, replaced by tie-break points
    """
    n: int
    d: int
    nR: int
    nS: int
    n0: int

    def __post_init__(self):
        """Validate the factorization."""
        if self.d < 1:
            raise ValueError(f"Dimension must be >= 1, got {self.d}")
        if self.nR < 1 or self.nS < 2:
            raise ValueError(f"Need nR >= 1 and nS >= 2, got nR={self.nR}, nS={self.nS}")
        if self.nS % 2 != 0:
            raise ValueError(f"nS must be even, got {self.nS}")
        if self.n != self.nR * self.nS + self.n0:
            raise ValueError(
                f"n={self.n} does not factor as nR*nS + n0 = "
                f"{self.nR}*{self.nS} + {self.n0}"
            )
        if not 0 <= self.n0 < min(self.nR, self.nS):
            raise ValueError(
                f"n0 must satisfy 0 <= n0 < min(nR, nS), got n0={self.n0}"
            )
        if self.d == 1 and self.nS != 2:
            raise ValueError(f"Dimension 1 admits only nS = 2, got {self.nS}")


@dataclass(frozen=True, eq=False)
class SphereArray:
    """
    nS unit directions on the sphere, antipodally paired.

    Direction k + nS/2 is the exact negation of direction k.
    """
    d: int
    directions: np.ndarray
    seed: Optional[int] = None

    def __post_init__(self):
        directions = _frozen_array(self.directions)
        object.__setattr__(self, "directions", directions)
        if directions.ndim != 2 or directions.shape[1] != self.d:
            raise ValueError(
                f"Directions must have shape (nS, {self.d}), got {directions.shape}"
            )
        n_s = directions.shape[0]
        if n_s % 2 != 0:
            raise ValueError(f"Sphere array size must be even, got {n_s}")
        norms = np.linalg.norm(directions, axis=1)
        if np.any(np.abs(norms - 1.0) > 1e-12):
            raise ValueError("Sphere array directions must have unit norm")
        half = n_s // 2
        if not np.array_equal(directions[half:], -directions[:half]):
            raise ValueError("Sphere array must be antipodally paired")

    @property
    def nS(self) -> int:
        return self.directions.shape[0]


@dataclass(frozen=True, eq=False)
class Grid:
    """
    n-point discretization of the spherical uniform on the unit ball.

    Points are stored in polar form so that ranks and signs are read off
    exactly: point i is radii[i] * directions[i].

    Attributes:
        spec: The factorization the grid was built from
        radii: n radii r/(nR+1), or 1/(2(nR+1)) for tie-break points
        directions: n unit vectors
        seed: Seed of the sphere array and tie-break draw (None when unused)
    """
    spec: GridSpec
    radii: np.ndarray
    directions: np.ndarray
    seed: Optional[int] = None

    def __post_init__(self):
        radii = _frozen_array(self.radii)
        directions = _frozen_array(self.directions)
        object.__setattr__(self, "radii", radii)
        object.__setattr__(self, "directions", directions)
        if radii.shape != (self.spec.n,):
            raise ValueError(f"Expected {self.spec.n} radii, got {radii.shape}")
        if directions.shape != (self.spec.n, self.spec.d):
            raise ValueError(
                f"Expected directions of shape {(self.spec.n, self.spec.d)}, "
                f"got {directions.shape}"
            )
        if np.any(radii <= 0.0) or np.any(radii >= 1.0):
            raise ValueError("Grid radii must lie in (0, 1)")
        points = radii[:, None] * directions
        points.setflags(write=False)
        object.__setattr__(self, "_points", points)

    def __len__(self) -> int:
        return self.spec.n

    @property
    def n(self) -> int:
        return self.spec.n

    @property
    def d(self) -> int:
        return self.spec.d

    @property
    def points(self) -> np.ndarray:
        """Grid points as an (n, d) array."""
        return self._points

    def rotated(self, orthogonal: np.ndarray) -> "Grid":
        """Return the grid O * G_n for an orthogonal matrix O."""
        orthogonal = np.asarray(orthogonal, dtype=float)
        if orthogonal.shape != (self.d, self.d):
            raise ValueError(
                f"Rotation must be {self.d}x{self.d}, got {orthogonal.shape}"
            )
        if not np.allclose(orthogonal @ orthogonal.T, np.eye(self.d), atol=1e-10):
            raise ValueError("Rotation matrix is not orthogonal")
        return Grid(
            spec=self.spec,
            radii=self.radii,
            directions=self.directions @ orthogonal.T,
            seed=self.seed,
        )


@dataclass(frozen=True, eq=False)
class Assignment:
    """
    Optimal pairing of sample points to grid points.

    Attributes:
        perm: perm[i] is the grid index paired with sample point i
        total_cost: Sum of squared distances of the pairing
    """
    perm: np.ndarray
    total_cost: float

    def __post_init__(self):
        perm = _frozen_array(self.perm, dtype=np.intp)
        object.__setattr__(self, "perm", perm)
        n = perm.shape[0]
        if not np.array_equal(np.sort(perm), np.arange(n)):
            raise ValueError("Assignment is not a permutation")
        if self.total_cost < 0:
            raise ValueError(f"Total cost must be >= 0, got {self.total_cost}")


@dataclass(frozen=True, eq=False)
class RanksSigns:
    """
    Center-outward ranks and signs of a sample.

    Attributes:
        images: Grid points paired with each observation, shape (n, d)
        rescaled_ranks: Norms of the images, in (0, 1)
        ranks: (nR + 1) * rescaled_ranks
        signs: Unit directions of the images, shape (n, d)
        perm: Grid indices of the images
    """
    images: np.ndarray
    rescaled_ranks: np.ndarray
    ranks: np.ndarray
    signs: np.ndarray
    perm: np.ndarray

    def __post_init__(self):
        for name in ("images", "rescaled_ranks", "ranks", "signs"):
            object.__setattr__(self, name, _frozen_array(getattr(self, name)))
        object.__setattr__(self, "perm", _frozen_array(self.perm, dtype=np.intp))
        n = self.rescaled_ranks.shape[0]
        if self.images.shape[0] != n or self.signs.shape != self.images.shape:
            raise ValueError("Images, ranks and signs must describe the same n points")

    @property
    def n(self) -> int:
        return self.rescaled_ranks.shape[0]

    @property
    def d(self) -> int:
        return self.images.shape[1]


@dataclass(frozen=True)
class ScoreFunction:
    """
    Square-integrable score J: [0, 1) -> R.

    Attributes:
        kind: Score family
        sigma2: Integral of J^2 over [0, 1)
        fn: Vectorized evaluation
        d: Dimension (van der Waerden scores only)
    """
    kind: ScoreKind
    sigma2: float
    fn: Callable[[np.ndarray], np.ndarray] = field(repr=False, compare=False)
    d: Optional[int] = None

    def __post_init__(self):
        if not 0.0 < self.sigma2 < np.inf:
            raise ValueError(f"Score variance must be in (0, inf), got {self.sigma2}")
        if self.kind == ScoreKind.VDW and (self.d is None or self.d < 1):
            raise ValueError("van der Waerden scores need a dimension d >= 1")

    def __call__(self, u):
        return self.fn(np.asarray(u, dtype=float))

    @property
    def label(self) -> str:
        if self.kind == ScoreKind.VDW:
            return f"vdw({self.d})"
        return self.kind.value


@dataclass(frozen=True, eq=False)
class CrossCovMatrix:
    """
    d1 x d2 cross-covariance measurement between ranks and signs.

    Attributes:
        w: The matrix
        kind: Which W it is
        scores: (J1, J2) for sign/spearman/score kinds, None for kendall
    """
    w: np.ndarray
    kind: CrossCovKind
    scores: Optional[Tuple[ScoreFunction, ScoreFunction]] = None

    def __post_init__(self):
        w = _frozen_array(np.atleast_2d(self.w))
        object.__setattr__(self, "w", w)
        if not np.all(np.isfinite(w)):
            raise ValueError("Cross-covariance matrix has non-finite entries")
        if self.kind in (CrossCovKind.SIGN, CrossCovKind.KENDALL):
            if np.any(np.abs(w) > 1.0 + 1e-12):
                raise ValueError(f"{self.kind.value} entries must lie in [-1, 1]")

    @property
    def shape(self) -> Tuple[int, int]:
        return self.w.shape


@dataclass(frozen=True)
class TestResult:
    """
    Outcome of one independence test.

    Attributes:
        name: Test name (sign, spearman, kendall, vdw, wilks)
        statistic: Nonnegative test statistic
        df: Degrees of freedom d1 * d2
        pvalue: P-value, None while only the statistic is known
        method: "asymptotic" or "permutation(B=..., seed=...)"
    """
    __test__ = False  # not a pytest class

    name: str
    statistic: float
    df: int
    pvalue: Optional[float] = None
    method: Optional[str] = None

    def __post_init__(self):
        if not self.statistic >= 0.0:
            raise ValueError(f"Statistic must be >= 0, got {self.statistic}")
        if self.df < 1:
            raise ValueError(f"Degrees of freedom must be >= 1, got {self.df}")
        if self.pvalue is not None and not 0.0 <= self.pvalue <= 1.0:
            raise ValueError(f"P-value must be in [0, 1], got {self.pvalue}")

    def rejects(self, alpha: float) -> bool:
        """Whether the test rejects independence at level alpha."""
        if self.pvalue is None:
            raise ValueError(f"Test {self.name} has no p-value yet")
        return self.pvalue <= alpha


@dataclass(frozen=True, eq=False)
class NullTable:
    """
    Sorted Monte Carlo (or exhaustive) null values of a rank statistic.

    Attributes:
        kind: Statistic
        n, d1, d2: Sample size and block dimensions
        grid_seeds: Seeds of the two grids
        B: Number of pairings
        values: Sorted statistic values, length B
        seed: Master seed (None for exhaustive tables)
    """
    kind: TestKind
    n: int
    d1: int
    d2: int
    grid_seeds: Tuple[Optional[int], Optional[int]]
    B: int
    values: np.ndarray
    seed: Optional[int] = None

    def __post_init__(self):
        values = _frozen_array(self.values)
        object.__setattr__(self, "values", values)
        if values.shape != (self.B,):
            raise ValueError(f"Expected {self.B} values, got shape {values.shape}")
        if self.B < 1:
            raise ValueError("Null table must be nonempty")
        if np.any(np.diff(values) < 0):
            raise ValueError("Null table values must be sorted ascending")

    @property
    def exhaustive(self) -> bool:
        return self.seed is None


@dataclass(frozen=True, eq=False)
class KonijnConfig:
    """
    Generalized Konijn family X = M_delta (X*_1, X*_2).

    Attributes:
        d1, d2: Block dimensions
        marginal1, marginal2: Laws of X*_1 and X*_2
        M1: d1 x d2 mixing matrix
        M2: d2 x d1 mixing matrix
        delta: Mixing parameter (0 is independence)
    """
    d1: int
    d2: int
    marginal1: MarginalKind
    marginal2: MarginalKind
    M1: np.ndarray
    M2: np.ndarray
    delta: float = 0.0

    def __post_init__(self):
        object.__setattr__(self, "marginal1", MarginalKind(self.marginal1))
        object.__setattr__(self, "marginal2", MarginalKind(self.marginal2))
        m1 = _frozen_array(np.atleast_2d(self.M1))
        m2 = _frozen_array(np.atleast_2d(self.M2))
        object.__setattr__(self, "M1", m1)
        object.__setattr__(self, "M2", m2)
        if self.d1 < 1 or self.d2 < 1:
            raise ValueError(f"Dimensions must be >= 1, got d1={self.d1}, d2={self.d2}")
        if m1.shape != (self.d1, self.d2):
            raise ValueError(f"M1 must be {self.d1}x{self.d2}, got {m1.shape}")
        if m2.shape != (self.d2, self.d1):
            raise ValueError(f"M2 must be {self.d2}x{self.d1}, got {m2.shape}")
        if self.delta != 0.0 and not (np.any(m1) or np.any(m2)):
            raise ValueError("M1 and M2 cannot both be zero when delta != 0")

    @property
    def dim(self) -> int:
        return self.d1 + self.d2

    def with_delta(self, delta: float) -> "KonijnConfig":
        """Same family at another value of delta."""
        return KonijnConfig(
            d1=self.d1,
            d2=self.d2,
            marginal1=self.marginal1,
            marginal2=self.marginal2,
            M1=self.M1,
            M2=self.M2,
            delta=delta,
        )


@dataclass(frozen=True)
class RadialFamily:
    """
    Radial density of an elliptical law, standardized to unit covariance.

    Attributes:
        kind: gaussian or t
        nu: Degrees of freedom for t (must exceed 2 for finite variance)
    """
    kind: RadialKind
    nu: Optional[float] = None

    def __post_init__(self):
        object.__setattr__(self, "kind", RadialKind(self.kind))
        if self.kind == RadialKind.T:
            if self.nu is None or not self.nu > 2.0:
                raise ValueError(f"t radial family needs nu > 2, got {self.nu}")
        elif self.nu is not None:
            raise ValueError("Gaussian radial family takes no nu")

    @property
    def label(self) -> str:
        if self.kind == RadialKind.T:
            return f"t({self.nu:g})"
        return self.kind.value


@dataclass(frozen=True)
class EfficiencyReport:
    """
    ARE of a center-outward score test relative to Wilks' test.

    Attributes:
        score1, score2: Score labels
        radial1, radial2: Radial family labels
        d1, d2: Block dimensions
        C1, C2: E[J_k(U) rho_k(F*_k^{-1}(U))]
        D1, D2: E[J_k(U) F*_k^{-1}(U)]
        are: Asymptotic relative efficiency
        score_ncp_unit: Score-test noncentrality at tau = 1
        wilks_ncp_unit: Wilks noncentrality at tau = 1
    """
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
    score_ncp_unit: float
    wilks_ncp_unit: float

    def __post_init__(self):
        if not self.are >= 0.0:
            raise ValueError(f"ARE must be >= 0, got {self.are}")

    @property
    def df(self) -> int:
        return self.d1 * self.d2


@dataclass(frozen=True)
class PowerCurve:
    """
    Local asymptotic power at one noncentrality.

    Attributes:
        test: Test name
        tau: Local parameter
        df: Degrees of freedom
        ncp: Noncentrality parameter
        alpha: Nominal level
        power: Limiting rejection probability
    """
    test: str
    tau: float
    df: int
    ncp: float
    alpha: float
    power: float

    def __post_init__(self):
        if self.ncp < 0:
            raise ValueError(f"Noncentrality must be >= 0, got {self.ncp}")
        if not self.alpha - 1e-12 <= self.power <= 1.0 + 1e-12:
            raise ValueError(
                f"Power must lie in [alpha, 1], got {self.power} at alpha={self.alpha}"
            )


@dataclass(frozen=True, eq=False)
class PowerTable:
    """
    Empirical rejection frequencies of a power study at one sample size.

    Attributes:
        n: Sample size
        case: Simulation case name
        tests: Test names (rows)
        taus: Local parameters (columns)
        frequencies: len(tests) x len(taus) rejection frequencies
        replications: Number of simulated datasets
        alpha: Nominal level
    """
    n: int
    case: str
    tests: Tuple[str, ...]
    taus: Tuple[float, ...]
    frequencies: np.ndarray
    replications: int
    alpha: float

    def __post_init__(self):
        frequencies = _frozen_array(self.frequencies)
        object.__setattr__(self, "frequencies", frequencies)
        if frequencies.shape != (len(self.tests), len(self.taus)):
            raise ValueError(
                f"Frequencies must be {len(self.tests)}x{len(self.taus)}, "
                f"got {frequencies.shape}"
            )
        if np.any(frequencies < 0.0) or np.any(frequencies > 1.0):
            raise ValueError("Rejection frequencies must lie in [0, 1]")

    def frequency(self, test: str, tau: float) -> float:
        """Rejection frequency of one test at one tau."""
        return float(self.frequencies[self.tests.index(test), self.taus.index(tau)])
