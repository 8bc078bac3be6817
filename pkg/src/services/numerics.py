"""Adaptive quadrature with escalating refinement, and the shared error types.

scipy's QUADPACK wrappers signal trouble through IntegrationWarning. Here a
warning triggers another attempt with a larger subdivision limit; once the
attempts are exhausted, QuadratureError is raised with the best error estimate.
"""

import logging
import math
import warnings
from dataclasses import dataclass
from typing import Callable, Optional

from scipy.integrate import IntegrationWarning, quad

from ..config import get_settings

logger = logging.getLogger(__name__)


class QEILabError(Exception):
    """Base class for all laboratory errors."""


class QuadratureError(QEILabError):
    """Raised when adaptive quadrature does not reach its error budget."""

    def __init__(
        self, message: str, estimate: float, attempts: int = 0, value: Optional[float] = None
    ):
        super().__init__(f"{message} (error estimate {estimate:.3e} after {attempts} attempts)")
        self.estimate = estimate
        self.attempts = attempts
        self.value = value  # best value reached


class EigensolverError(QEILabError):
    """Raised when the dense eigensolver returns an inaccurate eigenpair."""

    def __init__(self, message: str, residual: float):
        super().__init__(f"{message} (residual {residual:.3e})")
        self.residual = residual


@dataclass
class QuadratureConfig:
    """Configuration for adaptive quadrature."""

    epsabs: float = 1e-10
    epsrel: float = 1e-10
    limit: int = 200
    max_attempts: int = 4
    limit_growth: float = 4.0

    @classmethod
    def from_settings(cls) -> "QuadratureConfig":
        """Create config from application settings."""
        settings = get_settings()
        return cls(
            epsabs=settings.quad_epsabs,
            epsrel=settings.quad_epsrel,
            limit=settings.quad_limit,
            max_attempts=settings.quad_max_attempts,
            limit_growth=settings.quad_limit_growth,
        )


@dataclass(frozen=True)
class QuadResult:
    """Value and absolute error estimate of a one-dimensional integral."""

    value: float
    error: float
    attempts: int = 1


def subdivision_limit(attempt: int, config: QuadratureConfig) -> int:
    """Subdivision limit for a given attempt (0-indexed)."""
    return int(config.limit * (config.limit_growth**attempt))


def integrate(
    func: Callable[[float], float],
    a: float,
    b: float,
    config: Optional[QuadratureConfig] = None,
    weight: Optional[str] = None,
    wvar: Optional[float] = None,
    points: Optional[list[float]] = None,
    label: str = "integral",
) -> QuadResult:
    """Integrate a real function with scipy.integrate.quad, refining on failure.

    Args:
        func: Real integrand
        a: Lower limit
        b: Upper limit (may be infinite)
        config: Quadrature configuration (uses settings defaults if not provided)
        weight: Optional QUADPACK weight ("cos", "sin")
        wvar: Frequency for the weight function
        points: Breakpoints for finite intervals
        label: Name used in log and error messages

    Returns:
        QuadResult with value, error estimate and number of attempts used

    Raises:
        QuadratureError: If the error budget is not met after all attempts
    """
    _config = config or QuadratureConfig.from_settings()

    best: Optional[QuadResult] = None
    for attempt in range(_config.max_attempts):
        limit = subdivision_limit(attempt, _config)
        kwargs: dict = {"epsabs": _config.epsabs, "epsrel": _config.epsrel, "limit": limit}
        if weight is not None:
            kwargs["weight"] = weight
            kwargs["wvar"] = wvar
            if math.isinf(b):
                kwargs["limlst"] = max(50, limit // 4)
        elif points is not None:
            kwargs["points"] = points

        with warnings.catch_warnings(record=True) as caught:
            warnings.simplefilter("always", IntegrationWarning)
            value, error = quad(func, a, b, **kwargs)[:2]

        result = QuadResult(value=float(value), error=float(error), attempts=attempt + 1)
        budget = max(_config.epsabs, _config.epsrel * abs(result.value))
        warned = any(issubclass(w.category, IntegrationWarning) for w in caught)

        if not warned or result.error <= budget:
            return result

        if best is None or result.error < best.error:
            best = result
        logger.debug(
            f"Refining {label}: attempt {attempt + 1}/{_config.max_attempts}, "
            f"limit {limit}, error {result.error:.3e}"
        )

    assert best is not None
    raise QuadratureError(
        f"Quadrature did not converge for {label}", best.error, best.attempts, value=best.value
    )
