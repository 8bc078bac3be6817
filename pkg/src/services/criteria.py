"""Decision procedures on F_P(θ) = P(cosh θ) F_min(θ + iπ).

- Negativity: some |F_P(θ_P)| > 1 admits one-particle states of negative
  smeared energy density.
- Existence: |F_P(θ)| ≤ c cosh θ with c < 1/2 in the tail.
- No-go: |F_P(θ)| ≥ c cosh θ with c > 1/2 in the tail.

Classification reads the tail asymptotically; the pointwise supremum of
|F_P|/cosh θ is reported alongside but does not enter the verdict.
"""

import csv
import logging
import math
from pathlib import Path
from typing import Optional

import numpy as np
from scipy.optimize import minimize_scalar

from ..config import get_settings
from .integrable import IntegrableModel, fmin_asymptote
from .kernel import f_p, f_p_array, polynomial_from_alpha
from .models import AsymptoteKind, NegativityWitness, PolynomialP, QEIVerdict, Verdict
from .numerics import QEILabError
from .optimizer import best_constant
from .testfn import gaussian

logger = logging.getLogger(__name__)

# Standard gaussian widths (in units of 1/μ) tried for negative-energy witnesses
WITNESS_SIGMAS = (0.5, 1.0, 2.0)
TAIL_SAMPLES = 201
MIN_CLASSIFY_RANGE = 10.0
RATIO_CEILING = 1e300


class InconclusiveAsymptoteError(QEILabError):
    """Raised when a quantity depends on an asymptote that could not be determined."""


# =============================================================================
# SAMPLING
# =============================================================================


def sample_fp(
    m: IntegrableModel,
    p: PolynomialP,
    theta_max: Optional[float] = None,
    samples: Optional[int] = None,
) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """(θ, |F_P(θ)|, Re F_P(θ)) on a uniform grid over [0, Θ_max]."""
    settings = get_settings()
    _theta_max = settings.scan_theta_max if theta_max is None else theta_max
    _samples = settings.scan_samples if samples is None else samples
    if not _theta_max > 0:
        raise ValueError(f"Scan range must be positive, got {_theta_max}")
    if _samples < 2:
        raise ValueError(f"Scan needs at least two samples, got {_samples}")

    theta = np.linspace(0.0, _theta_max, _samples)
    with np.errstate(over="ignore", invalid="ignore"):
        values = f_p_array(m, p, theta)
    return theta, np.abs(values), values.real


def sample_fp_to_csv(
    m: IntegrableModel,
    p: PolynomialP,
    path: Path,
    theta_max: Optional[float] = None,
    samples: Optional[int] = None,
) -> None:
    """Write (θ, |F_P|, Re F_P) rows for plotting."""
    theta, modulus, real = sample_fp(m, p, theta_max, samples)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", encoding="utf-8", newline="") as f:
        writer = csv.writer(f, lineterminator="\n")
        writer.writerow(["theta", "abs_fp", "re_fp"])
        for row in zip(theta, modulus, real):
            writer.writerow([repr(float(x)) for x in row])


def _ratios(modulus: np.ndarray, theta: np.ndarray) -> np.ndarray:
    with np.errstate(over="ignore", invalid="ignore"):
        ratio = modulus / np.cosh(theta)
    return np.minimum(np.nan_to_num(ratio, nan=RATIO_CEILING, posinf=RATIO_CEILING), RATIO_CEILING)


def pointwise_sup_ratio(
    m: IntegrableModel,
    p: PolynomialP,
    theta_max: Optional[float] = None,
    samples: Optional[int] = None,
) -> float:
    """sup |F_P(θ)|/cosh θ over the scan grid."""
    theta, modulus, _ = sample_fp(m, p, theta_max, samples)
    return float(np.max(_ratios(modulus, theta)))


def real_part_ratio(m: IntegrableModel, p: PolynomialP, theta: float) -> float:
    """Re F_P(θ)/cosh θ."""
    return f_p(m, p, theta).real / math.cosh(theta)


def _finite_or_none(value: float) -> Optional[float]:
    return value if math.isfinite(value) else None


# =============================================================================
# NEGATIVITY
# =============================================================================


def admissible_alpha_bound(m: IntegrableModel) -> Optional[float]:
    """Largest |α| for which (1−α) + αx can admit a QEI: 1/(2 F_min(∞ + iπ)).

    Returns None for models whose minimal solution grows without bound,
    where only P ≡ 1 is admissible.

    Raises:
        InconclusiveAsymptoteError: If the asymptote of a custom model is undetermined
    """
    asymptote = fmin_asymptote(m)
    if asymptote.kind == AsymptoteKind.INFINITE:
        return None
    if asymptote.kind == AsymptoteKind.INCONCLUSIVE:
        raise InconclusiveAsymptoteError(f"Asymptote of model {m.name!r} is inconclusive")
    assert asymptote.value is not None
    return 1.0 / (2.0 * abs(asymptote.value))


def _refine_peak(m: IntegrableModel, p: PolynomialP, lo: float, hi: float) -> tuple[float, float]:
    """Local maximum of |F_P| on [lo, hi]."""
    result = minimize_scalar(
        lambda x: -abs(f_p(m, p, x)),
        bounds=(lo, hi),
        method="bounded",
        options={"xatol": 1e-12},
    )
    return float(result.x), float(-result.fun)


def negativity_scan(
    m: IntegrableModel,
    p: PolynomialP,
    theta_max: Optional[float] = None,
    samples: Optional[int] = None,
    epsilon: Optional[float] = None,
    attach_witness: bool = False,
    ladder: Optional[list[tuple[float, int]]] = None,
    convention: Optional[str] = None,
) -> Optional[NegativityWitness]:
    """First θ_P on [0, Θ_max] with |F_P(θ_P)| > 1 + ε, or None.

    Args:
        m: Integrable model
        p: Polynomial P
        theta_max: Scan range (uses settings default if not provided)
        samples: Number of uniform samples (uses settings default if not provided)
        epsilon: Strictness margin (uses settings default if not provided)
        attach_witness: Minimize over the standard gaussian family and attach
            the lowest-energy state when it is negative
        ladder: Grid ladder for the witness search
        convention: Fourier convention for the witness search
    """
    settings = get_settings()
    _epsilon = settings.scan_epsilon if epsilon is None else epsilon
    if not _epsilon > 0:
        raise ValueError(f"Strictness margin must be positive, got {_epsilon}")

    theta, modulus, _ = sample_fp(m, p, theta_max, samples)
    above = np.flatnonzero(modulus > 1.0 + _epsilon)
    if len(above) == 0:
        logger.info(f"No |F_P| > 1 on [0, {theta[-1]:g}] for {m.name!r}")
        return None

    i = int(above[0])
    theta_p, abs_fp = float(theta[i]), float(modulus[i])
    if math.isfinite(abs_fp):
        lo, hi = float(theta[max(i - 1, 0)]), float(theta[min(i + 1, len(theta) - 1)])
        refined_theta, refined_abs = _refine_peak(m, p, lo, hi)
        if refined_abs > abs_fp:
            theta_p, abs_fp = refined_theta, refined_abs
    logger.info(f"|F_P({theta_p:.6g})| = {abs_fp:.6g} > 1 for {m.name!r}")

    witness = NegativityWitness(theta_p=theta_p, abs_fp=abs_fp)
    if attach_witness:
        witness = _attach_witness(m, p, witness, ladder, convention)
    return witness


def _attach_witness(
    m: IntegrableModel,
    p: PolynomialP,
    witness: NegativityWitness,
    ladder: Optional[list[tuple[float, int]]],
    convention: Optional[str],
) -> NegativityWitness:
    lowest = None
    lowest_sigma = None
    for width in WITNESS_SIGMAS:
        sigma = width / m.mass
        bound = best_constant(m, p, gaussian(sigma), ladder=ladder, convention=convention)
        logger.debug(f"Witness search σ={sigma:g}: λ_min = {bound.lam:.6e}")
        if lowest is None or bound.lam < lowest.lam:
            lowest, lowest_sigma = bound, sigma

    if lowest is None or not lowest.lam < 0:
        logger.warning(f"No negative-energy state found for {m.name!r} in the gaussian family")
        return witness
    return witness.model_copy(
        update={
            "witness_energy": lowest.lam,
            "witness_sigma": lowest_sigma,
            "witness_state": lowest.witness,
        }
    )


# =============================================================================
# QEI CLASSIFICATION
# =============================================================================


def _extrapolate(ratio: np.ndarray) -> float:
    """Limit of a tail sequence by Aitken's Δ² on its last three points."""
    r1, r2, r3 = (float(x) for x in ratio[-3:])
    denominator = (r3 - r2) - (r2 - r1)
    if denominator == 0.0 or not math.isfinite(denominator):
        return r3
    limit = r3 - (r3 - r2) ** 2 / denominator
    # accept the acceleration only close to the data
    if not math.isfinite(limit) or abs(limit - r3) > abs(r3 - r1):
        return r3
    return max(limit, 0.0)


def classify_qei(
    m: IntegrableModel,
    p: PolynomialP,
    theta_max: Optional[float] = None,
    margin: Optional[float] = None,
) -> QEIVerdict:
    """Classify the growth of |F_P(θ)|/cosh θ on [Θ_max/2, Θ_max].

    Holds when the extrapolated limit and every tail sample lie below 1/2 − margin.
    NoGo when every tail sample and the limit lie above 1/2 + margin, and the
    ratio is either non-decreasing or converging to a limit above the margin.
    Anything else is Inconclusive.

    Raises:
        ValueError: If Θ_max < 10 or margin ≤ 0
    """
    settings = get_settings()
    _theta_max = settings.scan_theta_max if theta_max is None else theta_max
    _margin = settings.classify_margin if margin is None else margin
    if _theta_max < MIN_CLASSIFY_RANGE:
        raise ValueError(f"Classification needs Θ_max ≥ {MIN_CLASSIFY_RANGE:g}, got {_theta_max}")
    if not 0 < _margin < 0.5:
        raise ValueError(f"Margin must lie in (0, 1/2), got {_margin}")

    theta = np.linspace(_theta_max / 2.0, _theta_max, TAIL_SAMPLES)
    with np.errstate(over="ignore", invalid="ignore"):
        modulus = np.abs(f_p_array(m, p, theta))
    ratio = _ratios(modulus, theta)

    non_decreasing = bool(np.all(np.diff(ratio) >= -1e-12 * ratio[:-1]))
    c = float(ratio[-1]) if non_decreasing else _extrapolate(ratio)

    low, high = 0.5 - _margin, 0.5 + _margin
    if c < low and float(np.max(ratio)) < low:
        verdict = Verdict.HOLDS
    elif c > high and float(np.min(ratio)) > high:
        verdict = Verdict.NO_GO
    else:
        verdict = Verdict.INCONCLUSIVE

    logger.info(f"{m.name!r}, P = {p.label()}: {verdict.value} (c = {c:.6g})")
    return QEIVerdict(
        verdict=verdict,
        c=c,
        theta_max=_theta_max,
        margin=_margin,
        pointwise_sup_ratio=pointwise_sup_ratio(m, p, _theta_max),
        real_part_ratio=_finite_or_none(real_part_ratio(m, p, _theta_max)),
    )


def classify_degree(
    m: IntegrableModel,
    p: PolynomialP,
    theta_max: Optional[float] = None,
    margin: Optional[float] = None,
) -> QEIVerdict:
    """NoGo for deg P ≥ 2 when F_min(∞ + iπ) is finite; otherwise classify_qei."""
    if p.degree >= 2 and fmin_asymptote(m).kind == AsymptoteKind.FINITE:
        settings = get_settings()
        _theta_max = settings.scan_theta_max if theta_max is None else theta_max
        _margin = settings.classify_margin if margin is None else margin
        edge = np.array([_theta_max])
        with np.errstate(over="ignore", invalid="ignore"):
            c = float(_ratios(np.abs(f_p_array(m, p, edge)), edge)[0])
        if c > 0.5 + _margin:
            logger.info(f"{m.name!r}, P = {p.label()}: NoGo by degree {p.degree}")
            return QEIVerdict(
                verdict=Verdict.NO_GO,
                c=c,
                theta_max=_theta_max,
                margin=_margin,
                pointwise_sup_ratio=pointwise_sup_ratio(m, p, _theta_max),
                reason=f"degree {p.degree}",
            )
    return classify_qei(m, p, theta_max, margin)


def linear_family_table(
    m: IntegrableModel,
    alphas: list[float],
    theta_max: Optional[float] = None,
    margin: Optional[float] = None,
) -> list[dict]:
    """Verdicts for P = (1−α) + αx over a list of α."""
    try:
        bound = admissible_alpha_bound(m)
    except InconclusiveAsymptoteError:
        bound = None
    rows = []
    for alpha in alphas:
        verdict = classify_degree(m, polynomial_from_alpha(alpha), theta_max, margin)
        rows.append(
            {
                "alpha": alpha,
                "verdict": verdict.verdict.value,
                "c": verdict.c,
                "admissible": bound is not None and abs(alpha) < bound,
            }
        )
    return rows
