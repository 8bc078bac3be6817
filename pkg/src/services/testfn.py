"""Smearing functions g and the Fourier data of g and g².

One convention is used everywhere: f̃(ω) = ∫dt e^{iωt} f(t), optionally
multiplied by (2π)^{-1/2} when the normalized convention is selected.
Gaussians have closed forms; bump and tabulated functions are integrated
numerically.
"""

import csv
import logging
import math
from dataclasses import dataclass
from functools import lru_cache
from pathlib import Path
from typing import Optional

import numpy as np
from scipy.interpolate import CubicSpline

from ..config import convention_factor, get_settings
from .models import TestFunction
from .numerics import QuadratureConfig, integrate

logger = logging.getLogger(__name__)

# Beyond |k|·σ = BUMP_SPECTRAL_CUTOFF the transform of a squared bump is below
# exp(−2√400) ≈ 4e-18 relative to its peak and is treated as zero.
BUMP_SPECTRAL_CUTOFF = 400.0
BUMP_NODES = 800
BUMP_TABLE_STEP = 0.005  # in units of 1/σ

# The transform of a single bump decays like exp(−√(2w)); beyond w = 1000 it is
# below 1e-19 of its peak.
BUMP_G_CUTOFF = 1000.0
BUMP_G_NODES = 1400

# Gaussians are integrated numerically over t₀ ± GAUSSIAN_SPAN·σ.
GAUSSIAN_SPAN = 12.0


@dataclass(frozen=True)
class SpectralSample:
    """A Fourier transform value at one argument, with its error estimate."""

    argument: float
    value: complex
    error: float = 0.0


# =============================================================================
# CONSTRUCTORS
# =============================================================================


def gaussian(sigma: float, center: float = 0.0, amplitude: float = 1.0) -> TestFunction:
    """g(t) = A·exp(−(t−t₀)²/(2σ²))."""
    if not sigma > 0:
        raise ValueError(f"Width sigma must be positive, got {sigma}")
    return TestFunction(kind="gaussian", sigma=sigma, center=center, amplitude=amplitude)


def bump(sigma: float, center: float = 0.0, amplitude: float = 1.0) -> TestFunction:
    """g(t) = A·exp(−1/(1−x²)) with x = (t−t₀)/σ, zero for |x| ≥ 1."""
    if not sigma > 0:
        raise ValueError(f"Width sigma must be positive, got {sigma}")
    return TestFunction(kind="bump", sigma=sigma, center=center, amplitude=amplitude)


def tabulated(samples: list[float], t_start: float, t_step: float) -> TestFunction:
    """A test function given by uniformly spaced samples."""
    values = tuple(float(v) for v in samples)
    span = t_step * (len(values) - 1)
    return TestFunction(
        kind="tabulated",
        samples=values,
        t_start=t_start,
        t_step=t_step,
        sigma=max(span / 2.0, t_step),
        center=t_start + span / 2.0,
    )


def load_tabulated_csv(path: Path) -> TestFunction:
    """Read a two-column CSV (t, g(t)) with uniform spacing; header optional.

    Raises:
        ValueError: If a row after the optional header is malformed, fewer than two rows
            remain, or the spacing is not uniform
    """
    times: list[float] = []
    values: list[float] = []
    with open(path, "r", encoding="utf-8", newline="") as f:
        rows = [row for row in csv.reader(f) if row and row[0].strip()]
    for index, row in enumerate(rows):
        try:
            t, g = float(row[0]), float(row[1])
        except (ValueError, IndexError):
            if index == 0:
                continue  # optional header
            raise ValueError(f"Malformed row {index + 1} in {path}: {row}")
        times.append(t)
        values.append(g)

    if len(times) < 2:
        raise ValueError(f"Tabulated test function in {path} needs at least two rows")

    steps = np.diff(times)
    step = float(steps.mean())
    if not step > 0 or np.max(np.abs(steps - step)) > 1e-9 * max(1.0, abs(step)):
        raise ValueError(f"Samples in {path} are not uniformly spaced")

    logger.debug(f"Loaded {len(values)} samples from {path} (dt={step:g})")
    return tabulated(values, t_start=times[0], t_step=step)


# =============================================================================
# EVALUATION
# =============================================================================


def _bump_profile(x: np.ndarray, power: int = 1) -> np.ndarray:
    """exp(−power/(1−x²)) inside (−1, 1), zero outside."""
    x = np.asarray(x, dtype=float)
    out = np.zeros_like(x)
    inside = np.abs(x) < 1.0
    out[inside] = np.exp(-power / (1.0 - x[inside] ** 2))
    return out


def evaluate(f: TestFunction, t):
    """Evaluate g at t (scalar or array); always real."""
    t_arr = np.asarray(t, dtype=float)
    if f.kind == "gaussian":
        out = f.amplitude * np.exp(-((t_arr - f.center) ** 2) / (2.0 * f.sigma**2))
    elif f.kind == "bump":
        out = f.amplitude * _bump_profile((t_arr - f.center) / f.sigma)
    else:
        grid = f.t_start + f.t_step * np.arange(len(f.samples or ()))
        out = np.interp(t_arr, grid, np.asarray(f.samples), left=0.0, right=0.0)
    return float(out) if np.ndim(out) == 0 else out


# =============================================================================
# TRANSFORMS
# =============================================================================


def _numeric_transform(
    f: TestFunction,
    omega: float,
    squared: bool,
    config: Optional[QuadratureConfig] = None,
) -> SpectralSample:
    """∫dt e^{iωt} g(t)^p by adaptive quadrature around the center of g."""
    power = 2 if squared else 1
    amp = f.amplitude**power

    if f.kind == "tabulated":
        return _trapezoid_transform(f, omega, squared)

    if f.kind == "bump":
        # ∫ e^{iωt} g^p dt = A^p e^{iωt₀} σ ∫_{−1}^{1} cos(ωσx) exp(−p/(1−x²)) dx
        def profile(x: float) -> float:
            return math.exp(-power / (1.0 - x * x)) if abs(x) < 1.0 else 0.0

        half, half_scale = 1.0, f.sigma
    else:

        def profile(x: float) -> float:
            return math.exp(-power * x * x / 2.0)

        half, half_scale = GAUSSIAN_SPAN, f.sigma

    w = omega * half_scale
    label = f"transform of {f.kind} at {omega:g}"
    if w == 0.0:
        res = integrate(profile, -half, half, config=config, label=label)
    else:
        res = integrate(profile, -half, half, config=config, weight="cos", wvar=w, label=label)
    # Even profile: the sine part vanishes identically.
    phase = complex(math.cos(omega * f.center), math.sin(omega * f.center))
    value = amp * half_scale * res.value * phase
    return SpectralSample(argument=omega, value=value, error=abs(amp) * half_scale * res.error)


def _trapezoid_transform(f: TestFunction, omega: float, squared: bool) -> SpectralSample:
    samples = np.asarray(f.samples, dtype=float) * f.amplitude
    if squared:
        samples = samples**2
    t = f.t_start + f.t_step * np.arange(len(samples))
    weights = np.full(len(samples), f.t_step)
    weights[0] = weights[-1] = f.t_step / 2.0
    value = complex(np.sum(weights * samples * np.exp(1j * omega * t)))
    return SpectralSample(argument=omega, value=value, error=0.0)


def spectral_sample(
    f: TestFunction,
    omega: float,
    squared: bool = False,
    convention: Optional[str] = None,
    numeric: bool = False,
) -> SpectralSample:
    """Transform of g (or g²) at one argument, with error estimate.

    Args:
        f: Test function
        omega: Argument (inverse time units)
        squared: Transform g² instead of g
        convention: "plain" or "normalized" (uses settings default if not provided)
        numeric: Force quadrature even where a closed form exists

    Raises:
        QuadratureError: If the numerical transform does not converge
    """
    factor = convention_factor(convention or get_settings().transform_convention)
    if f.kind == "gaussian" and not numeric:
        phase = complex(math.cos(omega * f.center), math.sin(omega * f.center))
        if squared:
            peak = f.amplitude**2 * f.sigma * math.sqrt(math.pi)
            value = peak * math.exp(-(f.sigma**2) * omega**2 / 4.0) * phase
        else:
            peak = f.amplitude * f.sigma * math.sqrt(2.0 * math.pi)
            value = peak * math.exp(-(f.sigma**2) * omega**2 / 2.0) * phase
        return SpectralSample(argument=omega, value=factor * value, error=0.0)

    sample = _numeric_transform(f, omega, squared)
    return SpectralSample(argument=omega, value=factor * sample.value, error=factor * sample.error)


def fourier_g(f: TestFunction, omega: float, convention: Optional[str] = None) -> complex:
    """g̃(ω) = ∫dt e^{iωt} g(t)."""
    return spectral_sample(f, omega, squared=False, convention=convention).value


def fourier_gsq(f: TestFunction, k: float, convention: Optional[str] = None) -> complex:
    """Transform of g² at k; for gaussian(σ, 0): σ√π·exp(−σ²k²/4)."""
    return spectral_sample(f, k, squared=True, convention=convention).value


# =============================================================================
# VECTORIZED TRANSFORM OF g² (kernel assembly)
# =============================================================================


@lru_cache(maxsize=1)
def _bump_gsq_table() -> CubicSpline:
    """Spline of ∫cos(wx)exp(−2/(1−x²))dx over 0 ≤ w ≤ BUMP_SPECTRAL_CUTOFF."""
    nodes, weights = np.polynomial.legendre.leggauss(BUMP_NODES)
    profile = weights * _bump_profile(nodes, power=2)
    ws = np.arange(0.0, BUMP_SPECTRAL_CUTOFF + BUMP_TABLE_STEP, BUMP_TABLE_STEP)
    values = np.empty_like(ws)
    for start in range(0, len(ws), 2048):
        chunk = ws[start : start + 2048]
        values[start : start + 2048] = np.cos(np.outer(chunk, nodes)) @ profile
    logger.debug(f"Built bump spectral table ({len(ws)} points)")
    return CubicSpline(ws, values)


def fourier_gsq_array(
    f: TestFunction, k: np.ndarray, convention: Optional[str] = None
) -> np.ndarray:
    """Transform of g² evaluated on an array of arguments."""
    factor = convention_factor(convention or get_settings().transform_convention)
    k = np.asarray(k, dtype=float)
    phase = np.exp(1j * k * f.center)

    if f.is_zero:
        return np.zeros(k.shape, dtype=complex)

    if f.kind == "gaussian":
        peak = f.amplitude**2 * f.sigma * math.sqrt(math.pi)
        return factor * peak * np.exp(-(f.sigma**2) * k**2 / 4.0) * phase

    if f.kind == "bump":
        spline = _bump_gsq_table()
        w = np.abs(k) * f.sigma
        clipped = spline(np.minimum(w, BUMP_SPECTRAL_CUTOFF))
        values = np.where(w <= BUMP_SPECTRAL_CUTOFF, clipped, 0.0)
        return factor * f.amplitude**2 * f.sigma * values * phase

    samples = (np.asarray(f.samples, dtype=float) * f.amplitude) ** 2
    t = f.t_start + f.t_step * np.arange(len(samples))
    weights = np.full(len(samples), f.t_step)
    weights[0] = weights[-1] = f.t_step / 2.0
    flat = k.ravel()
    out = np.empty(flat.shape, dtype=complex)
    for start in range(0, len(flat), 4096):
        chunk = flat[start : start + 4096]
        out[start : start + 4096] = np.exp(1j * np.outer(chunk, t)) @ (weights * samples)
    return factor * out.reshape(k.shape)


@lru_cache(maxsize=1)
def _bump_g_rule() -> tuple[np.ndarray, np.ndarray]:
    nodes, weights = np.polynomial.legendre.leggauss(BUMP_G_NODES)
    return nodes, weights * _bump_profile(nodes)


def spectral_power(f: TestFunction, omega, convention: Optional[str] = None):
    """|g̃(ω)|² on a scalar or array argument.

    Tabulated functions are only meaningful below their Nyquist frequency π/Δt.
    """
    factor = convention_factor(convention or get_settings().transform_convention)
    w_arr = np.abs(np.asarray(omega, dtype=float))

    if f.is_zero:
        out = np.zeros_like(w_arr)
    elif f.kind == "gaussian":
        peak = f.amplitude * f.sigma * math.sqrt(2.0 * math.pi)
        out = (peak * np.exp(-(f.sigma**2) * w_arr**2 / 2.0)) ** 2
    elif f.kind == "bump":
        nodes, profile = _bump_g_rule()
        scaled = np.atleast_1d(w_arr * f.sigma).ravel()
        values = np.zeros(scaled.shape)
        inside = scaled <= BUMP_G_CUTOFF
        values[inside] = np.cos(np.outer(scaled[inside], nodes)) @ profile
        out = (f.amplitude * f.sigma * values.reshape(np.shape(w_arr))) ** 2
    else:
        samples = np.asarray(f.samples, dtype=float) * f.amplitude
        t = f.t_start + f.t_step * np.arange(len(samples))
        weights = np.full(len(samples), f.t_step)
        weights[0] = weights[-1] = f.t_step / 2.0
        flat = np.atleast_1d(w_arr).ravel()
        values = np.exp(1j * np.outer(flat, t)) @ (weights * samples)
        out = (np.abs(values) ** 2).reshape(np.shape(w_arr))

    out = factor**2 * out
    return float(out) if np.ndim(out) == 0 else out
