"""
Core data models for the stable-limit simulation library.
Provides validated, immutable structures for measures, samplers, paths and reports.
"""
import math
from enum import Enum
from pathlib import Path
from typing import Annotated, Any, Callable, Dict, List, Optional, Tuple, Union

import numpy as np
from pydantic import (
    AfterValidator,
    BaseModel,
    ConfigDict,
    Field,
    field_validator,
    model_validator,
)

from ..exceptions import ParameterDomainError

# alpha = 1 and alpha = 2 are outside the SDE regime; values are rejected, never clamped
ALPHA_MIN = 1.0 + 1e-6
ALPHA_MAX = 2.0 - 1e-9
DIVERGENCE_LIMIT = 1e-3
UINT64_MAX = 2**64 - 1


def check_alpha(value: float, field: str = "alpha") -> float:
    """Reject stability indices outside [1+1e-6, 2-1e-9]"""
    value = float(value)
    if not (ALPHA_MIN <= value <= ALPHA_MAX):
        raise ParameterDomainError(field, value, "(1, 2)")
    return value


def check_beta(value: float, field: str = "beta") -> float:
    value = float(value)
    if not (-1.0 <= value <= 1.0):
        raise ParameterDomainError(field, value, "[-1, 1]")
    return value


def check_positive(value: float, field: str) -> float:
    value = float(value)
    if not (value > 0.0 and math.isfinite(value)):
        raise ParameterDomainError(field, value, "(0, inf)")
    return value


StabilityIndex = Annotated[float, AfterValidator(check_alpha)]
Skewness = Annotated[float, AfterValidator(check_beta)]


class SamplerMode(str, Enum):
    """How stable increments are produced"""
    EXACT_TRANSFORM = "exact_transform"
    DECOMPOSITION = "decomposition"
    GAUSSIAN_LIMIT = "gaussian_limit"


class Region(str, Enum):
    """Integration region relative to the cutoff delta"""
    INNER = "inner"
    OUTER = "outer"


class DistanceMetric(str, Enum):
    KS = "ks"
    WASSERSTEIN1 = "wasserstein1"


class Pairing(str, Enum):
    """How the alpha ensemble and the Brownian ensemble share randomness"""
    INDEPENDENT = "independent"
    COMMON = "common"


class ExperimentName(str, Enum):
    LEMMA22_SUITE = "lemma22_suite"
    SAMPLER_VALIDATION = "sampler_validation"
    GENERATOR_RATE = "generator_rate"
    SDE_WEAK_RATE = "sde_weak_rate"
    EXAMPLE41 = "example41"
    KOLMOGOROV_RESIDUAL = "kolmogorov_residual"
    WEAK_CONVERGENCE = "weak_convergence"
    SUP_MOMENT = "sup_moment"


class CoefficientPreset(str, Enum):
    PURE_NOISE = "pure_noise"
    OU_TYPE = "ou_type"
    BOUNDED_SMOOTH = "bounded_smooth"
    POLYNOMIAL = "polynomial"


class TestFunctionKind(str, Enum):
    __test__ = False

    COS = "cos"
    GAUSSIAN_BUMP = "gaussian_bump"


# ---------------------------------------------------------------------------
# Levy measure
# ---------------------------------------------------------------------------

class LevyMeasureSpec(BaseModel):
    """One-dimensional power-law Levy measure with skewness beta"""
    model_config = ConfigDict(frozen=True)

    alpha: StabilityIndex
    beta: Skewness
    kappa: float = Field(gt=0)
    c_plus: float = Field(ge=0)
    c_minus: float = Field(ge=0)

    @model_validator(mode="after")
    def _constants_consistent(self):
        if not math.isclose(self.c_plus + self.c_minus, self.kappa, rel_tol=1e-12):
            raise ValueError("c_plus + c_minus must equal kappa")
        return self


class CylindricalNoiseSpec(BaseModel):
    """d independent stable components sharing one stability index"""
    model_config = ConfigDict(frozen=True)

    alpha: StabilityIndex
    betas: Tuple[Skewness, ...]
    components: Tuple[LevyMeasureSpec, ...]

    @model_validator(mode="after")
    def _components_match(self):
        if len(self.betas) < 1:
            raise ValueError("noise dimension must be at least 1")
        if len(self.components) != len(self.betas):
            raise ValueError("one component per skewness is required")
        for beta, component in zip(self.betas, self.components):
            if component.alpha != self.alpha or component.beta != beta:
                raise ValueError("component parameters disagree with alpha/betas")
        return self

    @property
    def dimension(self) -> int:
        return len(self.components)


# ---------------------------------------------------------------------------
# Sampling
# ---------------------------------------------------------------------------

class RngStreamKey(BaseModel):
    """(seed, stream_id) address of one counter-based random stream"""
    model_config = ConfigDict(frozen=True)

    seed: int = Field(ge=0, le=UINT64_MAX)
    stream_id: int = Field(default=0, ge=0, le=UINT64_MAX)


class IncrementSamplerMode(BaseModel):
    model_config = ConfigDict(frozen=True)

    mode: SamplerMode = SamplerMode.EXACT_TRANSFORM
    # small-jump cutoff; None means min(1, dt^(1/alpha)) at sampling time
    delta: Optional[float] = None

    @model_validator(mode="after")
    def _delta_range(self):
        if self.delta is not None and not (0.0 < self.delta <= 1.0):
            raise ParameterDomainError("delta", self.delta, "(0, 1]")
        return self


class StableIncrement(BaseModel):
    model_config = ConfigDict(frozen=True, arbitrary_types_allowed=True)

    value: Union[float, np.ndarray]
    dt: float = Field(gt=0)


# ---------------------------------------------------------------------------
# Coefficients, test functions, paths
# ---------------------------------------------------------------------------

class CoefficientField(BaseModel):
    """
    Drift and diffusion of an SDE on R^d.

    Both callables are vectorised: drift maps (n, d) -> (n, d) and
    diffusion maps (n, d) -> (n, d, d).
    """
    model_config = ConfigDict(frozen=True, arbitrary_types_allowed=True)

    dimension: int = Field(ge=1)
    drift: Callable[[np.ndarray], np.ndarray]
    diffusion: Callable[[np.ndarray], np.ndarray]
    growth_exponent_r: float = Field(default=0.0, ge=0)
    lipschitz_sigma: Optional[float] = Field(default=None, gt=0)
    bounded: bool = False
    bound: Optional[float] = Field(default=None, gt=0)
    name: str = "custom"

    def drift_at(self, x: np.ndarray) -> np.ndarray:
        return np.asarray(self.drift(np.atleast_2d(x)), dtype=float)

    def diffusion_at(self, x: np.ndarray) -> np.ndarray:
        return np.asarray(self.diffusion(np.atleast_2d(x)), dtype=float)


class PlaneWave(BaseModel):
    """amplitude * cos(wave_vector . x + phase)"""
    model_config = ConfigDict(frozen=True)

    amplitude: float = 1.0
    wave_vector: Tuple[float, ...]
    phase: float = 0.0


class TestFunction(BaseModel):
    """
    A C^{2,gamma} function with analytic derivatives.

    eval maps (m, d) -> (m,), gradient (m, d) -> (m, d), hessian (m, d) -> (m, d, d).
    """
    __test__ = False  # not a pytest class

    model_config = ConfigDict(frozen=True, arbitrary_types_allowed=True)

    dimension: int = Field(ge=1)
    eval: Callable[[np.ndarray], np.ndarray]
    gradient: Callable[[np.ndarray], np.ndarray]
    hessian: Callable[[np.ndarray], np.ndarray]
    holder_gamma: float = Field(default=1.0, gt=0, le=1)
    bounded: bool = True
    sup_norm: Optional[float] = Field(default=None, ge=0)
    wave: Optional[PlaneWave] = None
    name: str = "custom"


class TimeGrid(BaseModel):
    """Uniform grid on [0, T]; the horizon is stored as h * n_steps"""
    model_config = ConfigDict(frozen=True)

    horizon_T: float = Field(gt=0)
    n_steps: int = Field(ge=1)
    h: float = Field(default=0.0)

    @model_validator(mode="before")
    @classmethod
    def _derive_step(cls, data: Any) -> Any:
        if isinstance(data, dict) and "horizon_T" in data and "n_steps" in data:
            data = dict(data)
            h = float(data["horizon_T"]) / int(data["n_steps"])
            data["h"] = h
            data["horizon_T"] = h * int(data["n_steps"])
        return data

    def times(self) -> np.ndarray:
        return np.arange(self.n_steps + 1) * self.h


class SamplePath(BaseModel):
    model_config = ConfigDict(frozen=True, arbitrary_types_allowed=True)

    grid: TimeGrid
    states: np.ndarray  # shape (n_steps + 1, d)
    key: RngStreamKey

    @field_validator("states")
    @classmethod
    def _two_dimensional(cls, v: np.ndarray) -> np.ndarray:
        if v.ndim != 2:
            raise ValueError("states must have shape (n_steps + 1, d)")
        return v

    @property
    def terminal(self) -> np.ndarray:
        return self.states[-1]


class PathEnsemble(BaseModel):
    """Terminal states of many paths, with divergence bookkeeping"""
    model_config = ConfigDict(frozen=True, arbitrary_types_allowed=True)

    terminal: np.ndarray  # (n_paths, d); diverged paths hold their last finite state
    diverged: np.ndarray  # (n_paths,) bool
    running_sup: np.ndarray  # (n_paths,) sup over the grid of |X_k|
    states: Optional[np.ndarray] = None  # (n_steps + 1, n_paths, d) when recorded

    @property
    def n_paths(self) -> int:
        return int(self.diverged.size)

    @property
    def divergence_fraction(self) -> float:
        return float(np.mean(self.diverged)) if self.diverged.size else 0.0

    def finite_terminal(self) -> np.ndarray:
        return self.terminal[~self.diverged]


# ---------------------------------------------------------------------------
# Reports
# ---------------------------------------------------------------------------

class GeneratorEvalReport(BaseModel):
    """Alpha generator versus limit generator at one point, split by term"""
    model_config = ConfigDict(frozen=True)

    alpha_value: float
    limit_value: float
    gap: float
    quadrature_error_bound: float = Field(ge=0)
    delta_split: float
    drift_term: float = 0.0
    small_jump_term: float = 0.0
    band_term: float = 0.0
    large_jump_term: float = 0.0


class ResidualEstimate(BaseModel):
    """Monte Carlo estimate of the backward Kolmogorov residual at (t, x)"""
    model_config = ConfigDict(frozen=True)

    residual: float
    std_error: float = Field(ge=0)
    u_value: float
    time_derivative: float
    generator_value: float
    n_paths: int
    inconclusive: bool = False


class WeakErrorPoint(BaseModel):
    model_config = ConfigDict(frozen=True)

    alpha_value: float
    estimate: float
    std_error: float = Field(ge=0)
    n_paths: int = Field(ge=1)
    h: float = Field(gt=0)
    divergence_fraction: float = Field(default=0.0, ge=0, le=1)

    @property
    def valid(self) -> bool:
        return self.divergence_fraction <= DIVERGENCE_LIMIT

    @property
    def significant(self) -> bool:
        return abs(self.estimate) > 3.0 * self.std_error


class WeakErrorReport(BaseModel):
    model_config = ConfigDict(frozen=True)

    points: List[WeakErrorPoint]
    slope: float
    intercept: float
    slope_ci: Tuple[float, float]
    used_alphas: List[float] = Field(default_factory=list)


class AcceptanceCheck(BaseModel):
    name: str
    passed: bool
    detail: str = ""
    # smoke runs record Monte Carlo checks without enforcing them
    enforced: bool = True


class ExperimentResult(BaseModel):
    """Tabular rows, a nested summary and named acceptance checks"""
    experiment: ExperimentName
    rows: List[Dict[str, Any]] = Field(default_factory=list)
    summary: Dict[str, Any] = Field(default_factory=dict)
    checks: List[AcceptanceCheck] = Field(default_factory=list)

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.checks if c.enforced)

    def failed_checks(self) -> List[str]:
        return [c.name for c in self.checks if c.enforced and not c.passed]


# ---------------------------------------------------------------------------
# Configuration and manifests
# ---------------------------------------------------------------------------

DEFAULT_SEED = 20240229


class ExperimentConfig(BaseModel):
    """Fully resolved configuration of one experiment run"""
    model_config = ConfigDict(frozen=True, extra="forbid")

    experiment: ExperimentName
    alpha_grid: Tuple[float, ...] = (1.6, 1.8, 1.9, 1.95)
    beta: Union[float, Tuple[float, ...]] = 0.0
    dimension: int = Field(default=1, ge=1)
    coefficients: CoefficientPreset = CoefficientPreset.OU_TYPE
    T: float = Field(default=1.0, gt=0)
    n_steps: int = Field(default=1024, ge=1)
    n_paths: int = Field(default=100_000, ge=100)
    seed: int = Field(default=DEFAULT_SEED, ge=0, le=UINT64_MAX)
    workers: int = Field(default=1, ge=1)
    output_dir: Path = Path("results")

    test_function: TestFunctionKind = TestFunctionKind.COS
    frequency: float = Field(default=1.0, gt=0)
    x0: float = 0.0
    sampler: SamplerMode = SamplerMode.EXACT_TRANSFORM
    delta: Optional[float] = Field(default=None, gt=0, le=1)
    pairing: Pairing = Pairing.COMMON
    taming: bool = False
    shard_size: int = Field(default=10_000, ge=100)
    delta_split: float = Field(default=0.5, gt=0, le=1)
    tol: float = Field(default=1e-9, gt=0)
    t: float = Field(default=0.5, ge=0)
    x: float = 0.3
    fd_step: float = Field(default=0.05, gt=0)
    theta: float = Field(default=0.5, gt=0, lt=1)
    n_bootstrap: int = Field(default=1000, ge=10)

    @field_validator("alpha_grid")
    @classmethod
    def _grid_in_range(cls, v: Tuple[float, ...]) -> Tuple[float, ...]:
        if not v:
            raise ValueError("alpha_grid must not be empty")
        for a in v:
            if not (ALPHA_MIN <= a <= ALPHA_MAX):
                raise ValueError(f"alpha_grid value {a} outside the legal range [{ALPHA_MIN}, {ALPHA_MAX}]")
        if any(b <= a for a, b in zip(v, v[1:])):
            raise ValueError("alpha_grid must be strictly increasing")
        return v

    @field_validator("beta")
    @classmethod
    def _beta_in_range(cls, v):
        values = v if isinstance(v, tuple) else (v,)
        for b in values:
            if not (-1.0 <= b <= 1.0):
                raise ValueError(f"beta value {b} outside the closed interval [-1, 1]")
        return v

    @model_validator(mode="after")
    def _consistent(self):
        if isinstance(self.beta, tuple) and len(self.beta) != self.dimension:
            raise ValueError("beta list length must equal dimension")
        if self.t >= self.T:
            raise ValueError("t must lie in [0, T)")
        return self

    def betas(self) -> Tuple[float, ...]:
        if isinstance(self.beta, tuple):
            return self.beta
        return (float(self.beta),) * self.dimension


class RunManifest(BaseModel):
    config_echo: Dict[str, Any]
    library_version: str
    wall_time: float = Field(ge=0)
    started_at: str
    result_files: Dict[str, str] = Field(default_factory=dict)
    seed: int
    passed: bool = True
    failed_checks: List[str] = Field(default_factory=list)
