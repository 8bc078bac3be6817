"""Tests for test functions and their Fourier data."""

import math
from pathlib import Path

import numpy as np
import pytest

from src.services.testfn import (
    bump,
    evaluate,
    fourier_g,
    fourier_gsq,
    fourier_gsq_array,
    gaussian,
    load_tabulated_csv,
    spectral_power,
    spectral_sample,
    tabulated,
)


def _sampled_gaussian(sigma: float = 1.0, half_span: float = 12.0, step: float = 0.01):
    t = np.arange(-half_span, half_span + step / 2, step)
    return tabulated(list(np.exp(-(t**2) / (2 * sigma**2))), t_start=float(t[0]), t_step=step)


class TestConstructors:
    """Tests for test function constructors."""

    def test_gaussian_rejects_bad_width(self):
        """Test σ ≤ 0 raises ValueError."""
        with pytest.raises(ValueError):
            gaussian(0.0)
        with pytest.raises(ValueError):
            bump(-1.0)

    def test_tabulated_center_and_width(self):
        """Test tabulated functions record their midpoint and half span."""
        f = tabulated([0.0, 1.0, 0.0], t_start=-1.0, t_step=1.0)
        assert f.center == 0.0
        assert f.sigma == 1.0


class TestEvaluate:
    """Tests for evaluate."""

    def test_gaussian_value(self):
        """Test gaussian(σ=1)(1) = e^{-1/2}."""
        assert evaluate(gaussian(1.0), 1.0) == pytest.approx(0.60653066, abs=1e-8)

    def test_bump_support(self):
        """Test the bump vanishes outside [t₀ − σ, t₀ + σ]."""
        f = bump(2.0, center=1.0)
        assert evaluate(f, 1.0) == pytest.approx(math.exp(-1.0))
        assert evaluate(f, 3.0) == 0.0
        assert evaluate(f, -1.5) == 0.0

    def test_array_is_real(self):
        """Test array evaluation returns real values."""
        values = evaluate(gaussian(1.0), np.linspace(-3, 3, 7))
        assert values.dtype == float

    def test_tabulated_outside_range(self):
        """Test tabulated functions are zero outside their samples."""
        f = tabulated([1.0, 1.0], t_start=0.0, t_step=1.0)
        assert evaluate(f, 0.5) == 1.0
        assert evaluate(f, 2.0) == 0.0


class TestGaussianTransforms:
    """Tests for closed-form gaussian transforms."""

    def test_g_at_zero(self):
        """Test g̃(0) = √(2π) for σ = 1."""
        assert fourier_g(gaussian(1.0), 0.0, "plain").real == pytest.approx(2.50662827, abs=1e-8)

    def test_gsq_at_zero(self):
        """Test the transform of g² at 0 is √π."""
        assert fourier_gsq(gaussian(1.0), 0.0, "plain").real == pytest.approx(1.77245385, abs=1e-8)

    def test_gsq_at_two(self):
        """Test the transform of g² at k = 2 is √π·e^{-1}."""
        value = fourier_gsq(gaussian(1.0), 2.0, "plain")
        assert value.real == pytest.approx(math.sqrt(math.pi) * math.exp(-1.0), abs=1e-12)
        assert value.imag == pytest.approx(0.0, abs=1e-15)

    def test_normalized_convention(self):
        """Test the normalized convention scales both transforms by (2π)^{-1/2}."""
        assert fourier_g(gaussian(1.0), 0.0, "normalized").real == pytest.approx(1.0)
        expected = math.sqrt(math.pi) / math.sqrt(2 * math.pi)
        assert fourier_gsq(gaussian(1.0), 0.0, "normalized").real == pytest.approx(expected)

    def test_default_convention_from_settings(self, monkeypatch):
        """Test the convention falls back to the configured default."""
        monkeypatch.setenv("QEI_TRANSFORM_CONVENTION", "normalized")
        assert fourier_g(gaussian(1.0), 0.0).real == pytest.approx(1.0)

    def test_conjugation_symmetry(self):
        """Test g̃(−ω) is the conjugate of g̃(ω) for real g."""
        f = gaussian(0.7, center=1.3, amplitude=2.0)
        for omega in (0.3, 1.0, 4.0):
            assert fourier_g(f, -omega) == pytest.approx(fourier_g(f, omega).conjugate())

    def test_shift_is_a_phase(self):
        """Test shifting the center only changes the phase."""
        f0, f1 = gaussian(1.0), gaussian(1.0, center=2.5)
        value0, value1 = fourier_g(f0, 1.5), fourier_g(f1, 1.5)
        assert abs(value1) == pytest.approx(abs(value0))
        assert value1 == pytest.approx(value0 * complex(math.cos(3.75), math.sin(3.75)))


class TestNumericTransforms:
    """Tests for quadrature-based transforms."""

    @pytest.mark.parametrize("omega", [0.0, 0.5, 1.0, 3.0, 6.0])
    def test_numeric_matches_closed_form(self, omega):
        """Test numerical and closed-form gaussian transforms agree relative to the peak."""
        f = gaussian(1.0, center=0.4)
        for squared in (False, True):
            closed = spectral_sample(f, omega, squared=squared, convention="plain")
            numeric = spectral_sample(f, omega, squared=squared, convention="plain", numeric=True)
            peak = abs(spectral_sample(f, 0.0, squared=squared, convention="plain").value)
            assert abs(numeric.value - closed.value) <= 1e-8 * peak

    def test_bump_table_matches_quadrature(self):
        """Test the vectorized bump table agrees with adaptive quadrature."""
        f = bump(1.5, center=0.3)
        ks = np.array([0.0, 0.7, 2.0, 10.0, 40.0])
        table = fourier_gsq_array(f, ks, "plain")
        peak = abs(fourier_gsq(f, 0.0, "plain"))
        for k, value in zip(ks, table):
            direct = fourier_gsq(f, float(k), "plain")
            assert abs(value - direct) <= 1e-7 * peak

    def test_tabulated_matches_gaussian(self):
        """Test a finely sampled gaussian reproduces the closed-form transform of g²."""
        f = _sampled_gaussian()
        ks = np.array([0.0, 1.0, 2.0])
        values = fourier_gsq_array(f, ks, "plain")
        expected = fourier_gsq_array(gaussian(1.0), ks, "plain")
        np.testing.assert_allclose(values, expected, atol=1e-8)

    def test_gaussian_array_matches_scalar(self):
        """Test the vectorized gaussian transform matches the scalar one."""
        f = gaussian(0.5, center=-1.0)
        ks = np.array([-2.0, 0.0, 3.0])
        values = fourier_gsq_array(f, ks, "normalized")
        for k, value in zip(ks, values):
            assert value == pytest.approx(fourier_gsq(f, float(k), "normalized"))

    def test_zero_function(self):
        """Test g ≡ 0 has a vanishing transform."""
        f = gaussian(1.0, amplitude=0.0)
        assert np.all(fourier_gsq_array(f, np.array([0.0, 1.0])) == 0.0)
        assert np.all(spectral_power(f, np.array([0.0, 1.0])) == 0.0)


class TestSpectralPower:
    """Tests for spectral_power."""

    def test_gaussian_closed_form(self):
        """Test |g̃|² = 2πσ²A²e^{−σ²ω²} for a gaussian."""
        f = gaussian(2.0, center=1.0, amplitude=3.0)
        omega = 0.4
        expected = 2 * math.pi * 4.0 * 9.0 * math.exp(-4.0 * omega**2)
        assert spectral_power(f, omega, "plain") == pytest.approx(expected)

    def test_scalar_and_array(self):
        """Test scalars give floats and arrays keep their shape."""
        f = gaussian(1.0)
        assert isinstance(spectral_power(f, 1.0), float)
        assert spectral_power(f, np.zeros((2, 3))).shape == (2, 3)

    def test_bump_matches_quadrature(self):
        """Test the bump spectral power agrees with |g̃|² from quadrature."""
        f = bump(1.0, center=0.5)
        peak = spectral_power(f, 0.0, "plain")
        for omega in (0.0, 1.0, 5.0, 20.0):
            direct = abs(fourier_g(f, omega, "plain")) ** 2
            assert spectral_power(f, omega, "plain") == pytest.approx(direct, abs=1e-8 * peak)

    def test_normalized_divides_by_two_pi(self):
        """Test the normalized convention divides the power by 2π."""
        f = gaussian(1.0)
        plain = spectral_power(f, 0.3, "plain")
        assert spectral_power(f, 0.3, "normalized") == pytest.approx(plain / (2 * math.pi))


class TestLoadTabulated:
    """Tests for load_tabulated_csv."""

    def test_load_with_header(self, temp_dir: Path):
        """Test a CSV with a header row loads."""
        path = temp_dir / "g.csv"
        path.write_text("t,g\n0.0,0.0\n0.5,1.0\n1.0,0.0\n", encoding="utf-8")
        f = load_tabulated_csv(path)
        assert f.kind == "tabulated"
        assert f.samples == (0.0, 1.0, 0.0)
        assert f.t_step == pytest.approx(0.5)

    def test_non_uniform_spacing(self, temp_dir: Path):
        """Test non-uniform spacing raises ValueError."""
        path = temp_dir / "g.csv"
        path.write_text("0.0,0.0\n0.5,1.0\n1.5,0.0\n", encoding="utf-8")
        with pytest.raises(ValueError, match="uniformly"):
            load_tabulated_csv(path)

    def test_too_few_rows(self, temp_dir: Path):
        """Test a single row raises ValueError."""
        path = temp_dir / "g.csv"
        path.write_text("t,g\n0.0,1.0\n", encoding="utf-8")
        with pytest.raises(ValueError, match="at least two"):
            load_tabulated_csv(path)

    def test_header_without_data_rows_rejected(self, temp_dir: Path):
        """Test a header line alone does not count as data."""
        path = temp_dir / "g.csv"
        path.write_text("t,g\n", encoding="utf-8")
        with pytest.raises(ValueError, match="at least two"):
            load_tabulated_csv(path)

    @pytest.mark.parametrize(
        "content",
        [
            "t,g\nnot,a number\n0.0,1.0\n0.5,1.0\n",
            "t,g\n0.0,1.0\n0.5\n1.0,1.0\n",
            "t,g\n0.0,1.0\n0.5,abc\n1.0,1.0\n",
        ],
    )
    def test_malformed_row_after_header(self, temp_dir: Path, content: str):
        """Test only the first line may be non-numeric."""
        path = temp_dir / "g.csv"
        path.write_text(content, encoding="utf-8")
        with pytest.raises(ValueError, match="Malformed row"):
            load_tabulated_csv(path)

    def test_corrupted_first_data_row_without_header(self, temp_dir: Path):
        """Test a second bad line raises even when the first line was also bad."""
        path = temp_dir / "g.csv"
        path.write_text("0.0,x\n0.5,y\n1.0,1.0\n1.5,1.0\n", encoding="utf-8")
        with pytest.raises(ValueError, match="Malformed row 2"):
            load_tabulated_csv(path)
