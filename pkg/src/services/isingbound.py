"""State-independent QEI bound of the massive Ising model.

    ⟨T^{00}(g²)⟩ ≥ −(1/4π²) ∫_μ^∞ dω ω² |g̃(ω)|² Q(ω/μ)

    Q(u) = √(1 − u⁻²) − u⁻² log(u + √(u² − 1))

The bound holds for real compactly supported g. Gaussians are accepted as a
numerical extrapolation and flagged as such.
"""

import csv
import logging
import math
from pathlib import Path
from typing import Optional

import numpy as np

from ..config import get_settings
from .models import BoundResult, TestFunction
from .numerics import QuadratureConfig, QuadratureError, integrate
from .testfn import spectral_power

logger = logging.getLogger(__name__)

# Below u − 1 = SERIES_THRESHOLD the two terms of Q cancel to O((u−1)^{3/2}).
SERIES_THRESHOLD = 1e-4
TAIL_TOLERANCE = 1e-10
INITIAL_SPAN = 8.0  # in units of 1/σ
MAX_DOUBLINGS = 30


def q_function(u: float) -> float:
    """Q(u) for u ≥ 1; increases from Q(1) = 0 towards 1.

    Raises:
        ValueError: If u < 1
    """
    if not u >= 1.0:
        raise ValueError(f"Q is defined on [1, ∞), got u = {u}")
    t = u - 1.0
    if t < SERIES_THRESHOLD:
        return math.sqrt(2.0 * t) * t * (4.0 / 3.0 - 37.0 / 15.0 * t)
    if math.isinf(u):
        return 1.0
    return (u * math.sqrt(t * (u + 1.0)) - math.acosh(u)) / (u * u)


def q_table(
    u_max: Optional[float] = None, samples: Optional[int] = None
) -> tuple[np.ndarray, np.ndarray]:
    """Q sampled uniformly on [1, u_max]."""
    settings = get_settings()
    _u_max = u_max if u_max is not None else settings.q_table_max
    _samples = samples if samples is not None else settings.q_table_samples
    if not _u_max > 1.0 or _samples < 2:
        raise ValueError(f"Q table needs u_max > 1 and two samples, got {_u_max}, {_samples}")
    u = np.linspace(1.0, _u_max, _samples)
    return u, np.array([q_function(float(x)) for x in u])


def q_table_to_csv(
    path: Path, u_max: Optional[float] = None, samples: Optional[int] = None
) -> None:
    """Write (u, Q) rows for plotting."""
    u, q = q_table(u_max, samples)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", encoding="utf-8", newline="") as f:
        writer = csv.writer(f, lineterminator="\n")
        writer.writerow(["u", "Q"])
        for x, y in zip(u, q):
            writer.writerow([repr(float(x)), repr(float(y))])


def _frequency_scale(g: TestFunction) -> float:
    if g.kind == "tabulated":
        return max(g.sigma, g.t_step)
    return g.sigma


def _nyquist(g: TestFunction) -> float:
    return math.pi / g.t_step if g.kind == "tabulated" else math.inf


def _smeared_integral(
    g: TestFunction,
    lower: float,
    weight,
    convention: Optional[str],
    omega_cutoff: Optional[float],
    config: QuadratureConfig,
) -> tuple[float, float, float]:
    """∫_lower^Ω ω²|g̃|² weight(ω) dω with Ω extended until the tail is negligible.

    Returns (value, error, Ω).
    """

    def integrand(omega: float) -> float:
        power = float(spectral_power(g, omega, convention=convention))
        return omega * omega * power * weight(omega)

    nyquist = _nyquist(g)
    upper = omega_cutoff or min(lower + INITIAL_SPAN / _frequency_scale(g), nyquist)
    if not upper > lower:
        return 0.0, 0.0, max(upper, lower)

    head = integrate(integrand, lower, upper, config=config, label="QEI bound integral")
    total, error = head.value, head.error
    if omega_cutoff is not None:
        return total, error, upper

    for _ in range(MAX_DOUBLINGS):
        if upper >= nyquist:
            return total, error, upper
        nxt = min(2.0 * upper, nyquist)
        segment = integrate(integrand, upper, nxt, config=config, label="QEI bound tail")
        total += segment.value
        error += segment.error
        upper = nxt
        if abs(segment.value) <= TAIL_TOLERANCE * abs(total):
            return total, error + abs(segment.value), upper

    raise QuadratureError("QEI bound tail did not decay", error, MAX_DOUBLINGS, value=total)


def ising_bound(
    g: TestFunction,
    mu: float,
    convention: Optional[str] = None,
    omega_cutoff: Optional[float] = None,
) -> BoundResult:
    """Evaluate the smeared bound for mass μ.

    Args:
        g: Real test function
        mu: Particle mass
        convention: Fourier convention (uses settings default if not provided)
        omega_cutoff: Fixed upper cutoff; chosen adaptively when omitted

    Raises:
        ValueError: If μ ≤ 0
        QuadratureError: If the integral does not converge
    """
    if not mu > 0 or not math.isfinite(mu):
        raise ValueError(f"Mass must be positive, got {mu}")
    config = QuadratureConfig.from_settings()
    extrapolated = not g.compact_support

    if g.is_zero:
        return BoundResult(
            value=0.0,
            error=0.0,
            omega_cutoff=omega_cutoff or mu,
            mass=mu,
            extrapolated=extrapolated,
        )

    # Integrate the unit-amplitude profile; the amplitude enters as an exact A² factor.
    unit = g.model_copy(update={"amplitude": 1.0})
    amp2 = g.amplitude**2

    value, error, upper = _smeared_integral(
        unit, mu, lambda omega: q_function(omega / mu), convention, omega_cutoff, config
    )
    scale = amp2 / (4.0 * math.pi**2)
    if extrapolated:
        logger.debug(f"Bound for {g.label()} is an extrapolation (no compact support)")
    return BoundResult(
        value=min(0.0, -scale * value),
        error=scale * error,
        omega_cutoff=upper,
        mass=mu,
        extrapolated=extrapolated,
    )


def massless_limit_bound(g: TestFunction, convention: Optional[str] = None) -> float:
    """μ → 0 limit of the bound, −(1/4π²) ∫_0^∞ ω²|g̃|² dω.

    Under the plain convention this equals −(1/4π) ∫|g′(t)|² dt by Parseval.

    |ising_bound(g, μ)| never exceeds its magnitude since 0 ≤ Q ≤ 1.
    """
    if g.is_zero:
        return 0.0
    config = QuadratureConfig.from_settings()
    unit = g.model_copy(update={"amplitude": 1.0})
    value, _, _ = _smeared_integral(unit, 0.0, lambda omega: 1.0, convention, None, config)
    return -(g.amplitude**2) * value / (4.0 * math.pi**2)
