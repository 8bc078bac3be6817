"""Data models for the QEI laboratory."""

import math
from enum import Enum
from typing import Any, Optional

from pydantic import BaseModel, ConfigDict, Field, field_validator, model_validator

# =============================================================================
# TAXONOMIES
# =============================================================================

# Built-in integrable models (one species of scalar bosons, no bound states)
MODEL_KINDS = {
    "free": "Free Bose field (S₂ = 1, F_min = 1)",
    "ising": "Massive Ising model (S₂ = −1, F_min(ζ) = −i sinh(ζ/2))",
    "sinh_gordon": "sinh-Gordon model with coupling B ∈ (0, 2)",
    "custom": "Externally supplied minimal solution",
}

# Test function kinds
TEST_FUNCTION_KINDS = {
    "gaussian": "exp(−(t−t₀)²/(2σ²))",
    "bump": "exp(−1/(1−x²)) on [t₀−σ, t₀+σ]",
    "tabulated": "Uniformly sampled values, trapezoid rule",
}

# Fourier transform conventions
CONVENTIONS = {
    "plain": "f̃(ω) = ∫dt e^{iωt} f(t)",
    "normalized": "f̃(ω) = (2π)^{-1/2} ∫dt e^{iωt} f(t)",
}


class Verdict(str, Enum):
    """Outcome of the QEI growth classification."""

    HOLDS = "Holds"
    NO_GO = "NoGo"
    INCONCLUSIVE = "Inconclusive"


class AsymptoteKind(str, Enum):
    """Behaviour of F_min(θ + iπ) as θ → ∞."""

    FINITE = "finite"
    INFINITE = "infinite"
    INCONCLUSIVE = "inconclusive"


# =============================================================================
# DOMAIN RECORDS
# =============================================================================


class TestFunction(BaseModel):
    """A real smearing function g of time.

    The representation only ever stores real numbers, so sampled values are
    real by construction.
    """

    __test__ = False  # not a pytest class

    model_config = ConfigDict(frozen=True)

    kind: str = "gaussian"
    sigma: float = 1.0  # width (time units)
    center: float = 0.0  # t₀ (time units)
    amplitude: float = 1.0
    samples: Optional[tuple[float, ...]] = None  # tabulated kind only
    t_start: float = 0.0
    t_step: float = 0.0

    @field_validator("kind")
    @classmethod
    def _known_kind(cls, value: str) -> str:
        if value not in TEST_FUNCTION_KINDS:
            raise ValueError(f"Unknown test function kind: {value!r}")
        return value

    @field_validator("sigma")
    @classmethod
    def _positive_width(cls, value: float) -> float:
        if not value > 0 or not math.isfinite(value):
            raise ValueError(f"Width sigma must be positive, got {value}")
        return value

    @model_validator(mode="after")
    def _tabulated_fields(self) -> "TestFunction":
        if self.kind == "tabulated":
            if not self.samples or len(self.samples) < 2:
                raise ValueError("Tabulated test function needs at least two samples")
            if not self.t_step > 0:
                raise ValueError("Tabulated test function needs a positive spacing")
        return self

    @property
    def is_zero(self) -> bool:
        """True for the degenerate function g ≡ 0."""
        if self.amplitude == 0.0:
            return True
        return self.kind == "tabulated" and not any(self.samples or ())

    @property
    def compact_support(self) -> bool:
        """Whether g has compact support (required by the Ising bound)."""
        return self.kind in ("bump", "tabulated")

    def label(self) -> str:
        """Short identifier used in report rows."""
        if self.kind == "tabulated":
            return f"tabulated(n={len(self.samples or ())}, dt={self.t_step:g})"
        return f"{self.kind}(sigma={self.sigma:g}, t0={self.center:g}, A={self.amplitude:g})"


class PolynomialP(BaseModel):
    """Real polynomial P in x = cosh(θ−η) with P(1) = 1.

    Coefficients are stored lowest degree first.
    """

    model_config = ConfigDict(frozen=True)

    coefficients: tuple[float, ...] = (1.0,)

    @field_validator("coefficients")
    @classmethod
    def _normalized(cls, value: tuple[float, ...]) -> tuple[float, ...]:
        if not value:
            raise ValueError("Polynomial needs at least one coefficient")
        if not all(math.isfinite(c) for c in value):
            raise ValueError("Polynomial coefficients must be finite")
        total = math.fsum(value)
        if abs(total - 1.0) > 1e-12:
            raise ValueError(f"Polynomial must satisfy P(1) = 1, got P(1) = {total!r}")
        # Trim vanishing leading coefficients
        trimmed = list(value)
        while len(trimmed) > 1 and trimmed[-1] == 0.0:
            trimmed.pop()
        return tuple(float(c) for c in trimmed)

    @property
    def degree(self) -> int:
        return len(self.coefficients) - 1

    def __call__(self, x: Any) -> Any:
        """Evaluate P at x (scalar or numpy array) by Horner's scheme."""
        result = self.coefficients[-1] + 0.0 * x
        for c in reversed(self.coefficients[:-1]):
            result = result * x + c
        return result

    def label(self) -> str:
        terms = [f"{c:g}x^{k}" if k else f"{c:g}" for k, c in enumerate(self.coefficients)]
        return " + ".join(terms)


class Asymptote(BaseModel):
    """Limit F_min(∞ + iπ); the infinite case is a tag, never a float infinity."""

    model_config = ConfigDict(frozen=True)

    kind: AsymptoteKind
    value: Optional[float] = None

    @model_validator(mode="after")
    def _value_matches_kind(self) -> "Asymptote":
        if self.kind == AsymptoteKind.FINITE:
            if self.value is None or not math.isfinite(self.value):
                raise ValueError("Finite asymptote needs a finite value")
        elif self.value is not None:
            raise ValueError(f"{self.kind.value} asymptote carries no value")
        return self

    @property
    def is_finite(self) -> bool:
        return self.kind == AsymptoteKind.FINITE

    @classmethod
    def finite(cls, value: float) -> "Asymptote":
        return cls(kind=AsymptoteKind.FINITE, value=float(value))

    @classmethod
    def infinite(cls) -> "Asymptote":
        return cls(kind=AsymptoteKind.INFINITE)

    @classmethod
    def inconclusive(cls) -> "Asymptote":
        return cls(kind=AsymptoteKind.INCONCLUSIVE)


class ModelSpec(BaseModel):
    """JSON registration record for an integrable model."""

    name: str = ""
    kind: str = "free"
    mass: float = 1.0
    coupling: Optional[float] = None  # sinh-Gordon B
    table_path: Optional[str] = None  # custom: CSV θ, Re, Im of F_min(θ + iπ)
    asymptote: Optional[float] = None  # custom: declared F_min(∞ + iπ), None for ∞

    def model_post_init(self, __context) -> None:
        """Default the name to the kind."""
        if not self.name:
            self.name = self.kind


class QEIVerdict(BaseModel):
    """Result of the growth classification of F_P."""

    verdict: Verdict
    c: float = Field(ge=0.0)  # growth constant estimate
    theta_max: float
    margin: float
    pointwise_sup_ratio: Optional[float] = None  # sup |F_P(θ)|/cosh θ on the scan grid
    real_part_ratio: Optional[float] = None  # Re F_P(Θ_max)/cosh Θ_max
    reason: str = "tail ratio"

    @model_validator(mode="after")
    def _consistent(self) -> "QEIVerdict":
        if self.verdict == Verdict.HOLDS and not self.c < 0.5 - self.margin:
            raise ValueError("Holds verdict requires c < 1/2 − margin")
        if self.verdict == Verdict.NO_GO and not self.c > 0.5 + self.margin:
            raise ValueError("NoGo verdict requires c > 1/2 + margin")
        return self


class NegativityWitness(BaseModel):
    """A rapidity θ_P with |F_P(θ_P)| > 1, optionally with a negative-energy state."""

    model_config = ConfigDict(arbitrary_types_allowed=True)

    theta_p: float
    abs_fp: float = Field(gt=1.0)
    witness_energy: Optional[float] = None
    witness_sigma: Optional[float] = None  # width of the test function used
    witness_state: Optional[Any] = Field(default=None, exclude=True, repr=False)

    @model_validator(mode="after")
    def _negative_if_present(self) -> "NegativityWitness":
        if self.witness_energy is not None and not self.witness_energy < 0:
            raise ValueError("Attached witness state must have negative energy")
        return self


class BoundResult(BaseModel):
    """Value of the state-independent Ising bound for one test function."""

    value: float = Field(le=0.0)
    error: float = Field(ge=0.0)
    omega_cutoff: float = Field(gt=0.0)
    mass: float = Field(gt=0.0)
    extrapolated: bool = False  # g not compactly supported

    @field_validator("value")
    @classmethod
    def _finite(cls, value: float) -> float:
        if not math.isfinite(value):
            raise ValueError("Bound value must be finite")
        return value


class LadderStage(BaseModel):
    """One (Θ, n) stage of a grid-refinement ladder."""

    theta: float
    n: int
    lam: float
    hermiticity_defect: float = 0.0
    boundary_mass: float = 0.0
    cutoff_extensions: int = 0


class Provenance(BaseModel):
    """Reproducibility record embedded in every report."""

    config_hash: str
    version: str
    convention: str
    tolerances: dict[str, float] = Field(default_factory=dict)
    ladder: list[tuple[float, int]] = Field(default_factory=list)
