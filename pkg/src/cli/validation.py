"""Run configuration and its validation.

Every referenced spec is built through its module constructor before any
computation starts, so a bad config fails fast with ConfigValidationError.
"""

import json
import math
from dataclasses import dataclass
from pathlib import Path
from typing import Any, Literal, Optional

from pydantic import BaseModel, ConfigDict, Field, ValidationError, model_validator

from ..config import get_settings
from ..services.integrable import IntegrableModel, ModelRegistrationError, model_from_spec
from ..services.kernel import monomial_polynomial, polynomial_from_alpha
from ..services.models import CONVENTIONS, ModelSpec, PolynomialP, TestFunction
from ..services.numerics import QEILabError
from ..services.testfn import bump, gaussian, load_tabulated_csv

# Default gaussian widths (in units of 1/μ) checked by verify
DEFAULT_FAMILY = (0.5, 1.0, 2.0)


class ConfigValidationError(QEILabError):
    """Raised when a run configuration is invalid."""

    def __init__(self, message: str, field: Optional[str] = None):
        super().__init__(message if field is None else f"{field}: {message}")
        self.field = field


class PolynomialSpec(BaseModel):
    """Explicit coefficients (lowest degree first), a linear-family α, or a monomial degree."""

    model_config = ConfigDict(extra="forbid")

    coefficients: Optional[list[float]] = None
    alpha: Optional[float] = None
    degree: Optional[int] = None

    @model_validator(mode="after")
    def _at_most_one(self) -> "PolynomialSpec":
        given = [x for x in (self.coefficients, self.alpha, self.degree) if x is not None]
        if len(given) > 1:
            raise ValueError("Give only one of coefficients, alpha or degree")
        return self


class TestFunctionSpec(BaseModel):
    """Smearing function: gaussian, bump, or a tabulated CSV file."""

    __test__ = False  # not a pytest class

    model_config = ConfigDict(extra="forbid")

    kind: str = "gaussian"
    sigma: float = 1.0
    center: float = 0.0
    amplitude: float = 1.0
    path: Optional[str] = None  # tabulated kind only


class RunConfig(BaseModel):
    """Per-run configuration loaded from JSON; unset fields fall back to Settings."""

    model_config = ConfigDict(extra="forbid")

    model: ModelSpec = Field(default_factory=ModelSpec)
    polynomial: PolynomialSpec = Field(default_factory=PolynomialSpec)
    test_function: TestFunctionSpec = Field(default_factory=TestFunctionSpec)
    family: list[float] = Field(default_factory=lambda: list(DEFAULT_FAMILY))
    alphas: list[float] = Field(default_factory=list)
    ladder: Optional[list[tuple[float, int]]] = None
    tolerance: Optional[float] = None
    theta_max: Optional[float] = None
    margin: Optional[float] = None
    samples: Optional[int] = None
    epsilon: Optional[float] = None
    witness: bool = False
    output_dir: Optional[str] = None
    convention: Optional[Literal["plain", "normalized"]] = None


@dataclass
class ResolvedRun:
    """A validated configuration with every object built and every default filled in."""

    config: RunConfig
    model: IntegrableModel
    polynomial: PolynomialP
    test_function: TestFunction
    family: list[float]
    ladder: list[tuple[float, int]]
    tolerance: float
    theta_max: float
    margin: float
    samples: int
    epsilon: float
    convention: str
    output_dir: Path

    def describe(self) -> dict:
        """Canonical record used for the config hash."""
        return {
            "config": self.config.model_dump(mode="json"),
            "model": self.model.describe(),
            "polynomial": list(self.polynomial.coefficients),
            "test_function": self.test_function.model_dump(mode="json"),
            "ladder": [[theta, n] for theta, n in self.ladder],
            "tolerance": self.tolerance,
            "theta_max": self.theta_max,
            "margin": self.margin,
            "samples": self.samples,
            "epsilon": self.epsilon,
            "convention": self.convention,
        }


# =============================================================================
# FIELD VALIDATORS
# =============================================================================


def validate_positive(value: Any, field_name: str) -> float:
    """Validate a finite positive number."""
    try:
        result = float(value)
    except (TypeError, ValueError):
        raise ConfigValidationError(f"expected a number, got {value!r}", field_name)
    if not result > 0 or not math.isfinite(result):
        raise ConfigValidationError(f"must be positive, got {value!r}", field_name)
    return result


def validate_count(value: Any, field_name: str, minimum: int = 2) -> int:
    """Validate an integer count with a lower bound."""
    if isinstance(value, bool) or not isinstance(value, int):
        raise ConfigValidationError(f"expected an integer, got {value!r}", field_name)
    if value < minimum:
        raise ConfigValidationError(f"must be at least {minimum}, got {value}", field_name)
    return value


def validate_convention(value: Any) -> str:
    """Validate the transform convention name."""
    if value not in CONVENTIONS:
        raise ConfigValidationError(
            f"must be one of {sorted(CONVENTIONS)}, got {value!r}", "convention"
        )
    return value


def validate_ladder(value: Any) -> list[tuple[float, int]]:
    """Validate a grid ladder: positive cutoffs, n ≥ 2, n doubling, Θ non-decreasing."""
    if not value:
        raise ConfigValidationError("needs at least one stage", "ladder")
    stages = []
    for i, stage in enumerate(value):
        theta, n = stage
        stages.append(
            (validate_positive(theta, f"ladder[{i}].theta"), validate_count(n, f"ladder[{i}].n"))
        )
    for (theta_a, n_a), (theta_b, n_b) in zip(stages, stages[1:]):
        if n_b != 2 * n_a or theta_b < theta_a:
            raise ConfigValidationError(
                "each stage must double n and keep Θ non-decreasing", "ladder"
            )
    return stages


# =============================================================================
# BUILDERS
# =============================================================================


def build_polynomial(spec: PolynomialSpec) -> PolynomialP:
    """PolynomialP from its spec; P ≡ 1 when the spec is empty."""
    try:
        if spec.coefficients is not None:
            return PolynomialP(coefficients=tuple(spec.coefficients))
        if spec.alpha is not None:
            return polynomial_from_alpha(spec.alpha)
        if spec.degree is not None:
            return monomial_polynomial(spec.degree)
        return PolynomialP()
    except (ValueError, ValidationError) as e:
        raise ConfigValidationError(str(e), "polynomial") from e


def build_test_function(spec: TestFunctionSpec, base_dir: Optional[Path] = None) -> TestFunction:
    """TestFunction from its spec."""
    try:
        if spec.kind == "gaussian":
            return gaussian(spec.sigma, spec.center, spec.amplitude)
        if spec.kind == "bump":
            return bump(spec.sigma, spec.center, spec.amplitude)
        if spec.kind == "tabulated":
            if not spec.path:
                raise ValueError("tabulated test function needs a path")
            path = Path(spec.path)
            if base_dir is not None and not path.is_absolute():
                path = base_dir / path
            loaded = load_tabulated_csv(path)
            return loaded.model_copy(update={"amplitude": spec.amplitude})
        raise ValueError(f"unknown kind {spec.kind!r}")
    except (ValueError, ValidationError, OSError) as e:
        raise ConfigValidationError(str(e), "test_function") from e


def build_model(spec: ModelSpec, base_dir: Optional[Path] = None) -> IntegrableModel:
    """IntegrableModel from its registration record."""
    try:
        return model_from_spec(spec, base_dir)
    except (ModelRegistrationError, ValueError, OSError) as e:
        raise ConfigValidationError(str(e), "model") from e


# =============================================================================
# LOADING AND RESOLUTION
# =============================================================================


def load_run_config(path: Optional[Path]) -> RunConfig:
    """Read a RunConfig from JSON; no path gives the all-defaults config."""
    if path is None:
        return RunConfig()
    try:
        with open(path, "r", encoding="utf-8") as f:
            data = json.load(f)
    except OSError as e:
        raise ConfigValidationError(f"cannot read config file: {e}", "config") from e
    except json.JSONDecodeError as e:
        raise ConfigValidationError(f"invalid JSON: {e}", "config") from e
    if not isinstance(data, dict):
        raise ConfigValidationError("config file must hold a JSON object", "config")
    try:
        return RunConfig(**data)
    except ValidationError as e:
        first = e.errors()[0]
        location = ".".join(str(part) for part in first["loc"]) or "config"
        raise ConfigValidationError(first["msg"], location) from e


def apply_overrides(config: RunConfig, **overrides: Any) -> RunConfig:
    """Command-line overrides; None values leave the config unchanged."""
    update = {key: value for key, value in overrides.items() if value is not None}
    if not update:
        return config
    try:
        return RunConfig(**{**config.model_dump(), **update})
    except ValidationError as e:
        first = e.errors()[0]
        raise ConfigValidationError(first["msg"], ".".join(str(p) for p in first["loc"])) from e


def resolve(config: RunConfig, base_dir: Optional[Path] = None) -> ResolvedRun:
    """Build every object of a configuration and fill defaults from Settings."""
    settings = get_settings()

    model = build_model(config.model, base_dir)
    polynomial = build_polynomial(config.polynomial)
    test_function = build_test_function(config.test_function, base_dir)

    ladder = validate_ladder(
        config.ladder if config.ladder is not None else settings.effective_ladder
    )
    tolerance = validate_positive(
        config.tolerance if config.tolerance is not None else settings.bound_tolerance, "tolerance"
    )
    theta_max = validate_positive(
        config.theta_max if config.theta_max is not None else settings.scan_theta_max, "theta_max"
    )
    margin = validate_positive(
        config.margin if config.margin is not None else settings.classify_margin, "margin"
    )
    if margin >= 0.5:
        raise ConfigValidationError(f"must be below 1/2, got {margin}", "margin")
    samples = validate_count(
        config.samples if config.samples is not None else settings.scan_samples, "samples"
    )
    epsilon = validate_positive(
        config.epsilon if config.epsilon is not None else settings.scan_epsilon, "epsilon"
    )
    convention = validate_convention(config.convention or settings.transform_convention)
    family = [validate_positive(width, "family") for width in config.family]
    if not family:
        raise ConfigValidationError("needs at least one width", "family")

    return ResolvedRun(
        config=config,
        model=model,
        polynomial=polynomial,
        test_function=test_function,
        family=family,
        ladder=ladder,
        tolerance=tolerance,
        theta_max=theta_max,
        margin=margin,
        samples=samples,
        epsilon=epsilon,
        convention=convention,
        output_dir=Path(config.output_dir) if config.output_dir else settings.output_dir,
    )
