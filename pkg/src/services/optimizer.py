"""Sharp one-particle lower bounds by dense Hermitian eigensolves.

The smallest eigenvalue of the discretized T^{00}(g²) form is the best
one-particle constant −c_g. It is tracked along a ladder of refining grids,
and the cutoff Θ is validated by the witness state's mass near the boundary.
"""

import csv
import logging
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import NamedTuple, Optional

import numpy as np
from scipy.linalg import eigh

from ..config import get_settings
from .integrable import IntegrableModel
from .kernel import KernelMatrix, RapidityGrid, StateVector, assemble, state_values
from .models import LadderStage, PolynomialP, TestFunction
from .numerics import EigensolverError

logger = logging.getLogger(__name__)

# Size of the lowest eigenvalue cluster inspected for degeneracy
CLUSTER_SIZE = 8
# Relative gap below which two eigenvalues count as equal
DEGENERACY_TOLERANCE = 1e-10
# Multiple of eps·‖M‖ below which computed eigenvalues are indistinguishable
NOISE_FACTOR = 16.0


class Eigenpair(NamedTuple):
    """Lowest eigenvalue, unit eigenvector and diagnostics."""

    value: float
    state: StateVector
    residual: float
    degenerate: bool
    noise_floor: float = 0.0


@dataclass
class ConvergedBound:
    """Best one-particle constant with its convergence record."""

    lam: float
    witness: StateVector
    grid: RapidityGrid
    ladder: list[LadderStage] = field(default_factory=list)
    error_estimate: float = math.inf
    converged: bool = False
    tolerance: float = 1e-6
    degenerate: bool = False
    hermiticity_defect: float = 0.0
    cutoff_extensions: int = 0

    def to_dict(self) -> dict:
        """Convert to dictionary for JSON serialization."""
        return {
            "lambda_min": self.lam,
            "c_g": max(0.0, -self.lam),
            "error_estimate": self.error_estimate if math.isfinite(self.error_estimate) else None,
            "converged": self.converged,
            "tolerance": self.tolerance,
            "degenerate": self.degenerate,
            "hermiticity_defect": self.hermiticity_defect,
            "cutoff_extensions": self.cutoff_extensions,
            "ladder": [stage.model_dump(mode="json") for stage in self.ladder],
            "grid": self.grid.describe(),
        }


def make_grid(theta: float, n: int) -> RapidityGrid:
    """Gauss–Legendre nodes and weights mapped to [−Θ, Θ], exactly symmetric."""
    if n < 2:
        raise ValueError(f"Grid needs at least two nodes, got {n}")
    if not theta > 0 or not math.isfinite(theta):
        raise ValueError(f"Cutoff must be positive, got {theta}")
    x, w = np.polynomial.legendre.leggauss(n)
    nodes = 0.5 * (x - x[::-1]) * theta
    weights = 0.5 * (w + w[::-1]) * theta
    return RapidityGrid(nodes=nodes, weights=weights, cutoff=float(theta))


def noise_floor(k: KernelMatrix) -> float:
    """Eigenvalue resolution NOISE_FACTOR·eps·‖M‖₂, with ‖M‖₂ bounded by the max row sum."""
    if k.n == 0:
        return 0.0
    spectral_bound = float(np.max(np.sum(np.abs(k.matrix), axis=1)))
    return NOISE_FACTOR * float(np.finfo(float).eps) * spectral_bound


def min_eigenpair(k: KernelMatrix) -> Eigenpair:
    """Smallest eigenvalue and a unit eigenvector of M.

    The reported value is always the smallest computed eigenvalue. Eigenvalues
    within DEGENERACY_TOLERANCE·|λ| of it, or within the noise floor, form a
    degenerate cluster; from that cluster the eigenvector with the largest
    component at the node nearest θ = 0 is returned, with its phase fixed so
    that component is real positive.

    Raises:
        EigensolverError: If the residual ‖Mφ − λφ‖ exceeds tolerance·‖M‖
    """
    settings = get_settings()
    matrix = k.matrix
    upper = min(CLUSTER_SIZE, k.n) - 1
    values, vectors = eigh(matrix, subset_by_index=[0, upper])

    norm = k.norm
    floor = noise_floor(k)
    lam = float(values[0])
    gap = max(DEGENERACY_TOLERANCE * abs(lam), floor)
    cluster = np.flatnonzero(values - lam <= gap)
    degenerate = len(cluster) > 1
    center = int(np.argmin(np.abs(k.grid.nodes)))
    if degenerate:
        choice = int(cluster[np.argmax(np.abs(vectors[center, cluster]))])
        logger.warning(f"Degenerate lowest eigenvalue ({len(cluster)}-fold) at {lam:.6e}")
    else:
        choice = 0

    vector = vectors[:, choice].astype(complex)
    anchor = vector[center] if abs(vector[center]) > 0 else vector[np.argmax(np.abs(vector))]
    vector = vector * (abs(anchor) / anchor)
    vector = vector / np.linalg.norm(vector)

    residual = float(np.linalg.norm(matrix @ vector - lam * vector))
    if residual > settings.eigen_residual_tolerance * norm:
        raise EigensolverError("Eigensolver did not converge", residual)

    return Eigenpair(
        value=lam,
        state=StateVector(vector),
        residual=residual,
        degenerate=degenerate,
        noise_floor=floor,
    )


def boundary_mass(grid: RapidityGrid, state: StateVector, width: float = 1.0) -> float:
    """Σ |φ_i|² over nodes with |θ_i| > Θ − width."""
    mask = np.abs(grid.nodes) > grid.cutoff - width
    return float(np.sum(np.abs(np.asarray(state.coefficients)[mask]) ** 2))


def _validate_ladder(ladder: list[tuple[float, int]]) -> None:
    if not ladder:
        raise ValueError("Grid ladder must have at least one stage")
    for (theta_a, n_a), (theta_b, n_b) in zip(ladder, ladder[1:]):
        if n_b != 2 * n_a or theta_b < theta_a:
            raise ValueError(
                f"Ladder must refine by doubling n with non-decreasing Θ: "
                f"({theta_a}, {n_a}) -> ({theta_b}, {n_b})"
            )


def best_constant(
    m: IntegrableModel,
    p: PolynomialP,
    g: TestFunction,
    tolerance: Optional[float] = None,
    ladder: Optional[list[tuple[float, int]]] = None,
    convention: Optional[str] = None,
) -> ConvergedBound:
    """Run assemble + min_eigenpair along a refining ladder.

    Non-convergence is not an error: the last stage is returned with
    converged=False.
    """
    settings = get_settings()
    _tolerance = settings.bound_tolerance if tolerance is None else tolerance
    if not _tolerance > 0:
        raise ValueError(f"Tolerance must be positive, got {_tolerance}")
    _ladder = ladder if ladder is not None else settings.effective_ladder
    _validate_ladder(_ladder)

    stages: list[LadderStage] = []
    extensions_total = 0
    max_defect = 0.0
    carried_theta = 0.0
    pair: Optional[Eigenpair] = None
    grid: Optional[RapidityGrid] = None
    kernel: Optional[KernelMatrix] = None

    for theta, n in _ladder:
        theta = max(theta, carried_theta)
        extensions = 0
        while True:
            grid = make_grid(theta, n)
            kernel = assemble(m, p, g, grid, convention=convention)
            pair = min_eigenpair(kernel)
            mass = boundary_mass(grid, pair.state, settings.boundary_width)
            # below the eigensolver noise floor λ counts as zero
            negative = pair.value < -pair.noise_floor
            needs_wider = negative and mass >= settings.boundary_mass_tolerance
            if not needs_wider or extensions >= settings.max_cutoff_extensions:
                break
            extensions += 1
            theta += settings.cutoff_extension
            logger.info(f"Boundary mass {mass:.2e} at n={n}; extending cutoff to Θ={theta:g}")

        if needs_wider:
            logger.warning(f"Witness still touches the cutoff at Θ={theta:g} (mass {mass:.2e})")

        carried_theta = theta
        extensions_total += extensions
        max_defect = max(max_defect, kernel.asymmetry)
        stages.append(
            LadderStage(
                theta=theta,
                n=n,
                lam=pair.value,
                hermiticity_defect=kernel.asymmetry,
                boundary_mass=mass,
                cutoff_extensions=extensions,
            )
        )
        logger.info(f"Stage Θ={theta:g}, n={n}: λ_min = {pair.value:.12e}")

    assert pair is not None and grid is not None and kernel is not None
    lam = pair.value
    if len(stages) > 1:
        error = abs(stages[-1].lam - stages[-2].lam)
    elif kernel.norm == 0.0:
        error = 0.0
    else:
        error = math.inf
    converged = error < _tolerance * max(1.0, abs(lam))
    if not converged:
        logger.warning(f"Ladder exhausted without convergence (error estimate {error:.3e})")

    return ConvergedBound(
        lam=lam,
        witness=pair.state.normalized(),
        grid=grid,
        ladder=stages,
        error_estimate=error,
        converged=converged,
        tolerance=_tolerance,
        degenerate=pair.degenerate,
        hermiticity_defect=max_defect,
        cutoff_extensions=extensions_total,
    )


def witness_function(grid: RapidityGrid, state: StateVector) -> tuple[np.ndarray, np.ndarray]:
    """Nodes θ_i and wave function values φ(θ_i) of a grid state."""
    return grid.nodes.copy(), state_values(grid, state)


def witness_to_csv(bound: ConvergedBound, path: Path) -> None:
    """Write (θ, Re φ, Im φ) rows for plotting."""
    path.parent.mkdir(parents=True, exist_ok=True)
    nodes, values = witness_function(bound.grid, bound.witness)
    with open(path, "w", encoding="utf-8", newline="") as f:
        writer = csv.writer(f, lineterminator="\n")
        writer.writerow(["theta", "re_phi", "im_phi"])
        for theta, value in zip(nodes, values):
            writer.writerow([repr(float(theta)), repr(float(value.real)), repr(float(value.imag))])
