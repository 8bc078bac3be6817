"""Registry of integrable models and their minimal solutions.

A model is fixed by its mass μ and two-particle scattering function S₂; the
minimal solution F_min enters the stress-tensor kernel on the line ζ = θ + iπ.

sinh-Gordon uses the integral representation

    F_min(ζ) = exp( 8 ∫₀^∞ dt/t · f_B(t) · sin²(t(iπ−ζ)/(2π)) ),
    f_B(t) = sinh(tB/4) sinh(t(2−B)/4) sinh(t/2) / sinh²t,

normalized so that F_min(iπ) = 1. With h(t) = 4 f_B(t)/t this gives

    log F_min(θ + iπ) = A − ∫ h(t) cos(tθ/π) dt,           A = ∫ h(t) dt,
    log F_min(θ)      = A − ∫ h cosh(t) cos(tθ/π) dt − i ∫ h sinh(t) sin(tθ/π) dt.

On the real line h·cosh t and h·sinh t tend to 1/t; the piece (1−e^{−t})/t is
transformed in closed form so the remaining integrals converge absolutely.
"""

import csv
import json
import logging
import math
from dataclasses import dataclass, field
from functools import lru_cache
from pathlib import Path
from typing import Callable, Optional

import numpy as np
from scipy.interpolate import CubicSpline

from ..config import get_settings
from .models import MODEL_KINDS, Asymptote, ModelSpec
from .numerics import QEILabError, QuadratureConfig, integrate

logger = logging.getLogger(__name__)

# Points where custom evaluators are sampled at registration time
REGISTRATION_SAMPLES = 1000
REGISTRATION_RANGE = 20.0
REGISTRATION_TOLERANCE = 1e-10

# Successive θ used to estimate an undeclared asymptote
ASYMPTOTE_SAMPLES = (10.0, 20.0, 40.0)
ASYMPTOTE_TOLERANCE = 1e-6

# Gauss–Legendre rule for the vectorized sinh-Gordon table: h(t) decays like
# e^{−t}, so [0, 50] loses nothing at double precision.
TABLE_T_MAX = 50.0
TABLE_NODES = 2400

# Below this t the integrands are replaced by their t → 0 limits
SMALL_T = 1e-8


class ModelRegistrationError(QEILabError):
    """Raised when a model fails its invariants or has invalid parameters."""


@dataclass(frozen=True)
class CustomEvaluator:
    """Externally supplied model data.

    fmin_shifted must accept a numpy array of θ and return F_min(θ + iπ).
    """

    fmin_shifted: Callable[[np.ndarray], np.ndarray]
    asymptote: Optional[Asymptote] = None
    s2: Optional[Callable[[float], complex]] = None
    fmin_real: Optional[Callable[[float], complex]] = None
    source: str = "plug-in"


@dataclass(frozen=True)
class IntegrableModel:
    """An integrable model with one species of scalar bosons."""

    name: str
    kind: str
    mass: float
    coupling: Optional[float] = None
    custom: Optional[CustomEvaluator] = field(default=None, compare=False, repr=False)

    def describe(self) -> dict:
        """Provenance record of the model."""
        record: dict = {"name": self.name, "kind": self.kind, "mass": self.mass}
        if self.coupling is not None:
            record["coupling"] = self.coupling
        if self.custom is not None:
            record["source"] = self.custom.source
        return record


# =============================================================================
# sinh-Gordon internals
# =============================================================================


def _sg_h(t, coupling: float):
    """h(t) = 4 f_B(t)/t written with expm1 so it is stable for all t ≥ 0."""
    t = np.asarray(t, dtype=float)
    safe = np.where(t > SMALL_T, t, 1.0)
    product = (
        -np.expm1(-safe * coupling / 2.0)
        * -np.expm1(-safe * (2.0 - coupling) / 2.0)
        * -np.expm1(-safe)
        / np.expm1(-2.0 * safe) ** 2
    )
    value = 2.0 * np.exp(-safe) * product / safe
    limit = coupling * (2.0 - coupling) / 8.0
    out = np.where(t > SMALL_T, value, limit)
    return float(out) if out.ndim == 0 else out


def _sg_tail_parts(t: float, coupling: float) -> tuple[float, float]:
    """h·cosh t − (1−e^{−t})/t and h·sinh t − (1−e^{−t})/t."""
    if t <= SMALL_T:
        base = coupling * (2.0 - coupling) / 8.0
        return base - 1.0, -1.0
    product = (
        -math.expm1(-t * coupling / 2.0)
        * -math.expm1(-t * (2.0 - coupling) / 2.0)
        * -math.expm1(-t)
        / math.expm1(-2.0 * t) ** 2
    )
    reference = -math.expm1(-t) / t
    cosh_part = (1.0 + math.exp(-2.0 * t)) * product / t
    sinh_part = -math.expm1(-2.0 * t) * product / t
    return cosh_part - reference, sinh_part - reference


@lru_cache(maxsize=64)
def _sg_log_asymptote(coupling: float) -> float:
    """A = ∫₀^∞ h(t) dt, the logarithm of F_min(∞ + iπ)."""
    res = integrate(
        lambda t: _sg_h(t, coupling), 0.0, math.inf, label=f"sinh-Gordon asymptote B={coupling:g}"
    )
    return res.value


def _sg_log_shifted(
    theta: float, coupling: float, config: Optional[QuadratureConfig] = None
) -> tuple[float, float]:
    """log F_min(θ + iπ) and its error estimate."""
    a = abs(theta) / math.pi
    if a == 0.0:
        return 0.0, 0.0
    res = integrate(
        lambda t: _sg_h(t, coupling),
        0.0,
        math.inf,
        config=config,
        weight="cos",
        wvar=a,
        label=f"sinh-Gordon F_min(θ+iπ) θ={theta:g}",
    )
    return _sg_log_asymptote(coupling) - res.value, res.error


def _sg_log_real(
    theta: float, coupling: float, config: Optional[QuadratureConfig] = None
) -> complex:
    """log F_min(θ) on the real line, θ ≠ 0."""
    a = abs(theta) / math.pi
    cos_part = integrate(
        lambda t: _sg_tail_parts(t, coupling)[0],
        0.0,
        math.inf,
        config=config,
        weight="cos",
        wvar=a,
        label=f"sinh-Gordon Re log F_min θ={theta:g}",
    )
    sin_part = integrate(
        lambda t: _sg_tail_parts(t, coupling)[1],
        0.0,
        math.inf,
        config=config,
        weight="sin",
        wvar=a,
        label=f"sinh-Gordon Im log F_min θ={theta:g}",
    )
    c = cos_part.value + 0.5 * math.log1p(1.0 / (a * a))
    s = sin_part.value + math.atan(1.0 / a)
    if theta < 0:
        s = -s
    return complex(_sg_log_asymptote(coupling) - c, -s)


@lru_cache(maxsize=16)
def _sg_table(coupling: float, step: float, theta_max: float) -> CubicSpline:
    """Cubic spline of F_min(θ + iπ) on [0, theta_max] (real and even in θ)."""
    nodes, weights = np.polynomial.legendre.leggauss(TABLE_NODES)
    t = 0.5 * TABLE_T_MAX * (nodes + 1.0)
    w = 0.5 * TABLE_T_MAX * weights * _sg_h(t, coupling)
    thetas = np.arange(0.0, theta_max + step, step)
    logs = np.empty_like(thetas)
    for start in range(0, len(thetas), 512):
        chunk = thetas[start : start + 512]
        logs[start : start + 512] = np.cos(np.outer(chunk / math.pi, t)) @ w
    values = np.exp(_sg_log_asymptote(coupling) - logs)
    values[0] = 1.0
    logger.info(f"Built sinh-Gordon F_min table for B={coupling:g} ({len(thetas)} points)")
    return CubicSpline(thetas, values)


def reset_model_caches() -> None:
    """Clear cached sinh-Gordon integrals and tables (useful for testing)."""
    _sg_log_asymptote.cache_clear()
    _sg_table.cache_clear()


# =============================================================================
# REGISTRY
# =============================================================================


def make_model(
    kind: str,
    mass: float = 1.0,
    coupling: Optional[float] = None,
    name: Optional[str] = None,
    custom: Optional[CustomEvaluator] = None,
) -> IntegrableModel:
    """Create a model from its kind, mass and parameters.

    Raises:
        ModelRegistrationError: Unknown kind, non-positive mass, coupling outside (0, 2),
            or a custom evaluator violating the minimal-solution invariants
    """
    if kind not in MODEL_KINDS:
        raise ModelRegistrationError(f"Unknown model kind: {kind!r}")
    if not mass > 0 or not math.isfinite(mass):
        raise ModelRegistrationError(f"Mass must be positive, got {mass}")

    if kind == "sinh_gordon":
        if coupling is None or not 0.0 < coupling < 2.0:
            raise ModelRegistrationError(
                f"sinh-Gordon coupling B must lie in (0, 2), got {coupling}"
            )
    elif coupling is not None:
        raise ModelRegistrationError(f"Model kind {kind!r} takes no coupling")

    if kind == "custom":
        if custom is None:
            raise ModelRegistrationError("Custom model needs an evaluator")
        try:
            check_custom_evaluator(custom)
        except ValueError as e:
            raise ModelRegistrationError(f"Custom evaluator failed while sampling: {e}") from e
    elif custom is not None:
        raise ModelRegistrationError(f"Model kind {kind!r} does not accept a custom evaluator")

    model = IntegrableModel(
        name=name or kind, kind=kind, mass=float(mass), coupling=coupling, custom=custom
    )
    logger.debug(f"Registered model {model.describe()}")
    return model


def check_custom_evaluator(custom: CustomEvaluator) -> None:
    """Enforce normalization, conjugation symmetry and asymptote consistency by sampling."""
    at_zero = complex(np.asarray(custom.fmin_shifted(np.array([0.0])))[0])
    if abs(at_zero - 1.0) > REGISTRATION_TOLERANCE:
        raise ModelRegistrationError(f"Custom F_min(iπ) must be 1, got {at_zero}")

    thetas = np.linspace(0.0, REGISTRATION_RANGE, REGISTRATION_SAMPLES // 2)
    plus = np.asarray(custom.fmin_shifted(thetas), dtype=complex)
    minus = np.asarray(custom.fmin_shifted(-thetas), dtype=complex)
    defect = np.abs(minus - np.conj(plus)) / np.maximum(1.0, np.abs(plus))
    if np.max(defect) > REGISTRATION_TOLERANCE:
        raise ModelRegistrationError(
            f"Custom F_min violates conjugation symmetry (defect {np.max(defect):.3e})"
        )

    if custom.asymptote is not None and custom.asymptote.is_finite:
        value = complex(np.asarray(custom.fmin_shifted(np.array([40.0])))[0])
        target = custom.asymptote.value or 0.0
        if abs(value - target) >= 1e-5 * abs(target):
            raise ModelRegistrationError(
                f"Custom F_min(40 + iπ) = {value} is inconsistent with declared asymptote {target}"
            )


def fmin_shifted(m: IntegrableModel, theta: float) -> complex:
    """F_min(θ + iπ).

    Raises:
        QuadratureError: sinh-Gordon quadrature failure, with error estimate
    """
    if m.kind == "free":
        return complex(1.0)
    if m.kind == "ising":
        # −i sinh((θ + iπ)/2) = cosh(θ/2)
        return complex(math.cosh(theta / 2.0))
    if m.kind == "sinh_gordon":
        assert m.coupling is not None
        log_value, _ = _sg_log_shifted(theta, m.coupling)
        return complex(math.exp(log_value))
    assert m.custom is not None
    return complex(np.asarray(m.custom.fmin_shifted(np.array([theta])))[0])


def fmin_shifted_array(m: IntegrableModel, theta: np.ndarray) -> np.ndarray:
    """Vectorized F_min(θ + iπ) used for matrix assembly."""
    theta = np.asarray(theta, dtype=float)
    if m.kind == "free":
        return np.ones(theta.shape, dtype=complex)
    if m.kind == "ising":
        return np.cosh(theta / 2.0).astype(complex)
    if m.kind == "sinh_gordon":
        assert m.coupling is not None
        settings = get_settings()
        table_max = settings.sinh_gordon_table_max
        spline = _sg_table(m.coupling, settings.sinh_gordon_table_step, table_max)
        absolute = np.abs(theta)
        inside = absolute <= settings.sinh_gordon_table_max
        tail = math.exp(_sg_log_asymptote(m.coupling))
        values = np.where(inside, spline(np.minimum(absolute, table_max)), tail)
        return values.astype(complex)
    assert m.custom is not None
    return np.asarray(m.custom.fmin_shifted(theta), dtype=complex)


def fmin_real(m: IntegrableModel, theta: float) -> complex:
    """F_min(θ) on the real line.

    Raises:
        ValueError: For custom models without a real-line evaluator
    """
    if m.kind == "free":
        return complex(1.0)
    if m.kind == "ising":
        return complex(0.0, -math.sinh(theta / 2.0))
    if m.kind == "sinh_gordon":
        assert m.coupling is not None
        if theta == 0.0:
            return complex(0.0)  # S₂(0) = −1 forces a zero
        return complex(np.exp(_sg_log_real(theta, m.coupling)))
    assert m.custom is not None
    if m.custom.fmin_real is None:
        raise ValueError(f"Model {m.name!r} has no real-line minimal solution")
    return complex(m.custom.fmin_real(theta))


def fmin_asymptote(m: IntegrableModel) -> Asymptote:
    """F_min(∞ + iπ), with a tagged sentinel for unbounded growth."""
    if m.kind == "free":
        return Asymptote.finite(1.0)
    if m.kind == "ising":
        return Asymptote.infinite()
    if m.kind == "sinh_gordon":
        assert m.coupling is not None
        return Asymptote.finite(math.exp(_sg_log_asymptote(m.coupling)))

    assert m.custom is not None
    if m.custom.asymptote is not None:
        return m.custom.asymptote

    far = np.abs(np.asarray(m.custom.fmin_shifted(np.array(ASYMPTOTE_SAMPLES)), dtype=complex))
    spread = max(abs(far[1] - far[0]), abs(far[2] - far[1]))
    if spread > ASYMPTOTE_TOLERANCE * abs(far[2]):
        logger.warning(f"Asymptote of {m.name!r} inconclusive (spread {spread:.3e})")
        return Asymptote.inconclusive()
    return Asymptote.finite(float(far[2]))


def s2(m: IntegrableModel, theta: float) -> complex:
    """Two-particle scattering function S₂(θ)."""
    if m.kind == "free":
        return complex(1.0)
    if m.kind == "ising":
        return complex(-1.0)
    if m.kind == "sinh_gordon":
        assert m.coupling is not None
        s = math.sin(math.pi * m.coupling / 2.0)
        sh = math.sinh(theta)
        return complex(sh, -s) / complex(sh, s)
    assert m.custom is not None
    if m.custom.s2 is None:
        raise ValueError(f"Model {m.name!r} has no scattering function")
    return complex(m.custom.s2(theta))


def watson_defect(m: IntegrableModel, theta: float) -> float:
    """|F_min(θ) − S₂(θ)F_min(−θ)| / max(1, |F_min(θ)|) on the real line."""
    forward = fmin_real(m, theta)
    backward = fmin_real(m, -theta)
    return abs(forward - s2(m, theta) * backward) / max(1.0, abs(forward))


# =============================================================================
# EXTERNAL INTERFACES
# =============================================================================


def load_custom_table(
    path: Path,
    asymptote: Optional[float],
    name: str = "custom",
    mass: float = 1.0,
) -> IntegrableModel:
    """Register a custom model from a CSV table (θ, Re, Im) of F_min(θ + iπ).

    Tables covering only θ ≥ 0 are extended by conjugation symmetry. Outside the
    tabulated range the declared asymptote is used; an unbounded model must
    supply a table wide enough for every evaluation.
    """
    thetas: list[float] = []
    values: list[complex] = []
    with open(path, "r", encoding="utf-8", newline="") as f:
        rows = [row for row in csv.reader(f) if row and row[0].strip()]
    for index, row in enumerate(rows):
        try:
            theta, value = float(row[0]), complex(float(row[1]), float(row[2]))
        except (ValueError, IndexError):
            if index == 0:
                continue  # optional header
            raise ModelRegistrationError(f"Malformed row {index + 1} in {path}: {row}")
        thetas.append(theta)
        values.append(value)

    if len(thetas) < 4:
        raise ModelRegistrationError(f"Custom table {path} needs at least four rows")
    grid = np.asarray(thetas)
    steps = np.diff(grid)
    if np.any(steps <= 0) or np.max(np.abs(steps - steps.mean())) > 1e-9:
        raise ModelRegistrationError(f"Custom table {path} must use a uniform θ grid")

    table = np.asarray(values)
    if grid[0] >= 0.0:
        mirror = grid[1:][::-1] if grid[0] == 0.0 else grid[::-1]
        mirror_values = table[1:][::-1] if grid[0] == 0.0 else table[::-1]
        grid = np.concatenate([-mirror, grid])
        table = np.concatenate([np.conj(mirror_values), table])

    re_spline = CubicSpline(grid, table.real)
    im_spline = CubicSpline(grid, table.imag)
    lo, hi = float(grid[0]), float(grid[-1])
    declared = Asymptote.finite(asymptote) if asymptote is not None else Asymptote.infinite()

    def evaluator(theta: np.ndarray) -> np.ndarray:
        theta = np.asarray(theta, dtype=float)
        outside = (theta < lo) | (theta > hi)
        if np.any(outside) and not declared.is_finite:
            raise ValueError(f"θ outside the tabulated range [{lo:g}, {hi:g}] of {path}")
        clipped = np.clip(theta, lo, hi)
        inside_values = re_spline(clipped) + 1j * im_spline(clipped)
        return np.where(outside, complex(declared.value or 0.0), inside_values)

    custom = CustomEvaluator(fmin_shifted=evaluator, asymptote=declared, source=str(path))
    return make_model("custom", mass=mass, name=name, custom=custom)


def model_from_spec(spec: ModelSpec, base_dir: Optional[Path] = None) -> IntegrableModel:
    """Build a model from its JSON registration record."""
    if spec.kind == "custom":
        if not spec.table_path:
            raise ModelRegistrationError("Custom model spec needs a table_path")
        path = Path(spec.table_path)
        if base_dir is not None and not path.is_absolute():
            path = base_dir / path
        return load_custom_table(path, spec.asymptote, name=spec.name, mass=spec.mass)
    return make_model(spec.kind, mass=spec.mass, coupling=spec.coupling, name=spec.name)


def load_models_json(path: Path) -> list[IntegrableModel]:
    """Register every model listed in a JSON file (one record or a list)."""
    with open(path, "r", encoding="utf-8") as f:
        data = json.load(f)
    records = data if isinstance(data, list) else [data]
    return [model_from_spec(ModelSpec(**record), base_dir=path.parent) for record in records]
