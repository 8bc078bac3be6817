"""One-particle stress-tensor kernel and its Hermitian discretization.

F^{αβ}(θ,η) = F^{αβ}_free(θ,η) · P(cosh(θ−η)) F_min(θ−η+iπ) · (g²)~(μcoshθ − μcoshη)

Only the energy density (α = β = 0) is assembled into matrices. On a
rapidity grid with weights w_i the quadratic form ∫∫ φ̄ F φ becomes φ*Mφ with
M_ij = √(w_i w_j) F^{00}(θ_i, θ_j) and state coefficients φ_i = φ(θ_i)√w_i.
"""

import csv
import json
import logging
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable, Optional

import numpy as np

from ..config import get_settings
from .integrable import IntegrableModel, fmin_shifted, fmin_shifted_array
from .models import PolynomialP, TestFunction
from .numerics import QEILabError
from .testfn import fourier_gsq, fourier_gsq_array

logger = logging.getLogger(__name__)


class HermiticityError(QEILabError):
    """Raised when an assembled kernel is not Hermitian to tolerance."""

    def __init__(self, message: str, asymmetry: float):
        super().__init__(f"{message} (relative asymmetry {asymmetry:.3e})")
        self.asymmetry = asymmetry


@dataclass(frozen=True)
class RapidityGrid:
    """Quadrature nodes and weights on [−Θ, Θ]."""

    nodes: np.ndarray
    weights: np.ndarray
    cutoff: float

    def __post_init__(self) -> None:
        if self.nodes.shape != self.weights.shape or self.nodes.ndim != 1:
            raise ValueError("Grid nodes and weights must be matching 1-d arrays")
        if len(self.nodes) > 1 and np.any(np.diff(self.nodes) <= 0):
            raise ValueError("Grid nodes must be strictly increasing")
        if np.any(self.weights <= 0):
            raise ValueError("Grid weights must be positive")
        if np.any(np.abs(self.nodes) > self.cutoff * (1.0 + 1e-14)):
            raise ValueError("Grid nodes must lie within [−Θ, Θ]")
        if np.max(np.abs(self.nodes + self.nodes[::-1])) > 1e-12 * max(1.0, self.cutoff):
            raise ValueError("Grid nodes must be symmetric about 0")

    @property
    def n(self) -> int:
        return len(self.nodes)

    def describe(self) -> dict:
        return {"cutoff": self.cutoff, "n": self.n}


@dataclass(frozen=True)
class StateVector:
    """One-particle state on a grid; coefficients are φ(θ_i)·√w_i."""

    coefficients: np.ndarray

    @property
    def norm_squared(self) -> float:
        return float(np.vdot(self.coefficients, self.coefficients).real)

    @property
    def norm(self) -> float:
        return math.sqrt(self.norm_squared)

    def normalized(self) -> "StateVector":
        """Unit-norm copy (the zero vector is returned unchanged)."""
        norm = self.norm
        if norm == 0.0:
            return self
        return StateVector(self.coefficients / norm)


@dataclass(frozen=True)
class KernelMatrix:
    """Hermitian discretization of the T^{00}(g²) quadratic form."""

    matrix: np.ndarray
    grid: RapidityGrid
    asymmetry: float = 0.0  # relative, before symmetrization
    provenance: dict = field(default_factory=dict)

    @property
    def n(self) -> int:
        return self.matrix.shape[0]

    @property
    def norm(self) -> float:
        """Frobenius norm, an upper bound for the operator norm."""
        return float(np.linalg.norm(self.matrix))


# =============================================================================
# KERNEL FACTORS
# =============================================================================


def f_free(mu: float, alpha: int, beta: int, theta, eta):
    """Entry (α, β) of the free Bose field kernel; accepts scalars or arrays."""
    if alpha not in (0, 1) or beta not in (0, 1):
        raise ValueError(f"Tensor indices must be 0 or 1, got ({alpha}, {beta})")
    s = np.asarray(theta, dtype=float) + np.asarray(eta, dtype=float)
    prefactor = mu**2 / (2.0 * math.pi)
    if alpha == 0 and beta == 0:
        out = prefactor * np.cosh(s / 2.0) ** 2
    elif alpha == 1 and beta == 1:
        out = prefactor * np.sinh(s / 2.0) ** 2
    else:
        out = prefactor * 0.5 * np.sinh(s)
    return float(out) if np.ndim(out) == 0 else out


def f_p(m: IntegrableModel, p: PolynomialP, theta: float) -> complex:
    """F_P(θ) = P(cosh θ) · F_min(θ + iπ)."""
    return complex(p(math.cosh(theta)) * fmin_shifted(m, theta))


def f_p_array(m: IntegrableModel, p: PolynomialP, theta: np.ndarray) -> np.ndarray:
    """Vectorized F_P."""
    theta = np.asarray(theta, dtype=float)
    return p(np.cosh(theta)) * fmin_shifted_array(m, theta)


def kernel_element(
    m: IntegrableModel,
    p: PolynomialP,
    g: TestFunction,
    alpha: int,
    beta: int,
    theta: float,
    eta: float,
    convention: Optional[str] = None,
) -> complex:
    """F^{αβ}(θ, η) as the product of its three factors."""
    k = m.mass * (math.cosh(theta) - math.cosh(eta))
    return (
        f_free(m.mass, alpha, beta, theta, eta)
        * f_p(m, p, theta - eta)
        * fourier_gsq(g, k, convention=convention)
    )


def polynomial_from_alpha(alpha: float) -> PolynomialP:
    """The linear family P(x) = (1−α) + αx."""
    return PolynomialP(coefficients=(1.0 - alpha, alpha))


def monomial_polynomial(degree: int) -> PolynomialP:
    """P(x) = x^degree."""
    if degree < 0:
        raise ValueError(f"Degree must be non-negative, got {degree}")
    return PolynomialP(coefficients=tuple([0.0] * degree + [1.0]))


# =============================================================================
# ASSEMBLY
# =============================================================================


def assemble(
    m: IntegrableModel,
    p: PolynomialP,
    g: TestFunction,
    grid: RapidityGrid,
    convention: Optional[str] = None,
    tolerance: Optional[float] = None,
) -> KernelMatrix:
    """Build the Hermitian matrix M_ij = √(w_i w_j) F^{00}(θ_i, θ_j).

    Raises:
        HermiticityError: If the raw matrix is asymmetric beyond tolerance, which
            signals a broken model evaluator
    """
    settings = get_settings()
    _tolerance = settings.hermiticity_tolerance if tolerance is None else tolerance
    _convention = convention or settings.transform_convention

    theta = grid.nodes[:, None]
    eta = grid.nodes[None, :]
    raw = (
        f_free(m.mass, 0, 0, theta, eta)
        * f_p_array(m, p, theta - eta)
        * fourier_gsq_array(g, m.mass * (np.cosh(theta) - np.cosh(eta)), convention=_convention)
    )
    sqrt_w = np.sqrt(grid.weights)
    raw = raw * sqrt_w[:, None] * sqrt_w[None, :]

    scale = float(np.max(np.abs(raw))) if raw.size else 0.0
    asymmetry = float(np.max(np.abs(raw - raw.conj().T))) / scale if scale > 0 else 0.0
    if asymmetry > _tolerance:
        raise HermiticityError(f"Kernel for model {m.name!r} is not Hermitian", asymmetry)

    matrix = 0.5 * (raw + raw.conj().T)
    logger.debug(f"Assembled {grid.n}x{grid.n} kernel for {m.name!r} (asymmetry {asymmetry:.2e})")
    provenance = {
        "model": m.describe(),
        "polynomial": list(p.coefficients),
        "test_function": g.model_dump(mode="json"),
        "grid": grid.describe(),
        "convention": _convention,
    }
    return KernelMatrix(matrix=matrix, grid=grid, asymmetry=asymmetry, provenance=provenance)


def quadratic_form(k: KernelMatrix, phi: StateVector) -> float:
    """φ*Mφ.

    Raises:
        ValueError: On dimension mismatch, or if the imaginary part exceeds
            1e−10·‖M‖·‖φ‖²
    """
    coefficients = np.asarray(phi.coefficients)
    if coefficients.shape != (k.n,):
        raise ValueError(f"State has shape {coefficients.shape}, kernel is {k.n}x{k.n}")
    value = complex(np.vdot(coefficients, k.matrix @ coefficients))
    if abs(value.imag) > 1e-10 * k.norm * phi.norm_squared:
        raise ValueError(f"Quadratic form is not real: {value}")
    return value.real


# =============================================================================
# STATES
# =============================================================================


def state_from_function(
    grid: RapidityGrid, func: Callable[[np.ndarray], np.ndarray]
) -> StateVector:
    """Grid coefficients φ(θ_i)·√w_i of a wave function."""
    values = np.asarray(func(grid.nodes), dtype=complex)
    return StateVector(values * np.sqrt(grid.weights))


def state_values(grid: RapidityGrid, state: StateVector) -> np.ndarray:
    """Wave function values φ(θ_i) = φ_i/√w_i at the grid nodes."""
    return np.asarray(state.coefficients) / np.sqrt(grid.weights)


# =============================================================================
# EXPORT
# =============================================================================


def kernel_matrix_to_csv(k: KernelMatrix, path: Path) -> Path:
    """Write (i, j, Re, Im) rows and a JSON provenance sidecar; returns the sidecar path."""
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", encoding="utf-8", newline="") as f:
        writer = csv.writer(f, lineterminator="\n")
        writer.writerow(["i", "j", "re", "im"])
        for i in range(k.n):
            for j in range(k.n):
                entry = k.matrix[i, j]
                writer.writerow([i, j, repr(float(entry.real)), repr(float(entry.imag))])

    sidecar = path.with_suffix(".json")
    record = dict(k.provenance, asymmetry=k.asymmetry)
    with open(sidecar, "w", encoding="utf-8") as f:
        json.dump(record, f, ensure_ascii=False, indent=2, sort_keys=True)
    return sidecar
