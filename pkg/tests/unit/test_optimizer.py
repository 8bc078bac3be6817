"""Tests for the spectral minimization of one-particle energy densities."""

import math
from pathlib import Path

import numpy as np
import pytest
from scipy.linalg import eigh

from src.services.kernel import (
    KernelMatrix,
    StateVector,
    assemble,
    polynomial_from_alpha,
    quadratic_form,
    state_from_function,
)
from src.services.models import PolynomialP
from src.services.numerics import EigensolverError
from src.services.optimizer import (
    ConvergedBound,
    best_constant,
    boundary_mass,
    make_grid,
    min_eigenpair,
    noise_floor,
    witness_function,
    witness_to_csv,
)
from src.services.testfn import gaussian


class TestMakeGrid:
    """Tests for make_grid."""

    def test_symmetric_nodes(self):
        """Test nodes are exactly symmetric and weights sum to 2Θ."""
        grid = make_grid(8.0, 64)
        np.testing.assert_array_equal(grid.nodes, -grid.nodes[::-1])
        assert np.sum(grid.weights) == pytest.approx(16.0)

    def test_invalid_arguments(self):
        """Test n < 2 and Θ ≤ 0 raise ValueError."""
        with pytest.raises(ValueError):
            make_grid(8.0, 1)
        with pytest.raises(ValueError):
            make_grid(0.0, 16)


class TestMinEigenpair:
    """Tests for min_eigenpair."""

    def test_diagonal_matrix(self):
        """Test the lowest entry of a diagonal matrix is found."""
        grid = make_grid(1.0, 4)
        k = KernelMatrix(matrix=np.diag([3.0, -1.0, 2.0, 5.0]).astype(complex), grid=grid)
        pair = min_eigenpair(k)
        assert pair.value == pytest.approx(-1.0)
        assert abs(pair.state.coefficients[1]) == pytest.approx(1.0)
        assert not pair.degenerate

    def test_degenerate_cluster(self):
        """Test degenerate minima pick the vector largest near θ = 0 with a positive phase."""
        grid = make_grid(1.0, 4)
        k = KernelMatrix(matrix=np.diag([-1.0, -1.0, 2.0, 5.0]).astype(complex), grid=grid)
        pair = min_eigenpair(k)
        assert pair.degenerate
        center = int(np.argmin(np.abs(grid.nodes)))
        assert pair.state.coefficients[center].real > 0
        assert pair.state.coefficients[center].imag == pytest.approx(0.0)

    def test_inaccurate_residual(self, monkeypatch):
        """Test an inaccurate eigenpair raises EigensolverError."""
        grid = make_grid(1.0, 4)
        k = KernelMatrix(matrix=np.diag([1.0, 2.0, 3.0, 4.0]).astype(complex), grid=grid)

        def bad_eigh(matrix, subset_by_index):
            return np.array([0.5, 2.0, 3.0, 4.0]), np.eye(4)

        monkeypatch.setattr("src.services.optimizer.eigh", bad_eigh)
        with pytest.raises(EigensolverError):
            min_eigenpair(k)

    def test_rayleigh_consistency(self, ising_model):
        """Test φ*Mφ of the eigenvector reproduces λ_min."""
        grid = make_grid(6.0, 64)
        k = assemble(ising_model, PolynomialP(), gaussian(1.0), grid, convention="plain")
        pair = min_eigenpair(k)
        assert quadratic_form(k, pair.state) == pytest.approx(pair.value, abs=1e-12 * k.norm)
        assert pair.residual <= 1e-10 * k.norm

    def test_value_is_lowest_eigenvalue(self, ising_model):
        """Test the reported value is the smallest eigenvalue of a wide, fine Ising kernel."""
        grid = make_grid(12.0, 512)
        k = assemble(ising_model, PolynomialP(), gaussian(1.0), grid, convention="plain")
        pair = min_eigenpair(k)
        lowest = eigh(k.matrix, eigvals_only=True, subset_by_index=[0, 0])[0]
        assert pair.value == pytest.approx(lowest, rel=1e-9)
        assert pair.value == pytest.approx(-4.2874e-05, rel=1e-3)
        assert not pair.degenerate

    def test_close_distinct_eigenvalues_not_degenerate(self):
        """Test eigenvalues far apart relative to λ are not merged on a large-norm matrix."""
        grid = make_grid(1.0, 4)
        matrix = np.diag([-4.0e-5, -1.0e-9, 0.0, 1.0e8]).astype(complex)
        pair = min_eigenpair(KernelMatrix(matrix=matrix, grid=grid))
        assert pair.value == pytest.approx(-4.0e-5, rel=1e-12)
        assert abs(pair.state.coefficients[0]) == pytest.approx(1.0)
        assert not pair.degenerate

    def test_noise_floor_scale(self):
        """Test the noise floor is a small multiple of eps times the largest row sum."""
        grid = make_grid(1.0, 4)
        matrix = np.diag([-1.0, 2.0, 3.0, 1.0e8]).astype(complex)
        k = KernelMatrix(matrix=matrix, grid=grid)
        eps = np.finfo(float).eps
        assert eps * 1.0e8 <= noise_floor(k) <= 100 * eps * 1.0e8
        assert min_eigenpair(k).noise_floor == noise_floor(k)

    @pytest.mark.parametrize("center", [0.0, 0.7])
    def test_variational_upper_bound(self, ising_model, center):
        """Test explicit trial states never go below λ_min."""
        grid = make_grid(8.0, 256)
        k = assemble(ising_model, PolynomialP(), gaussian(1.0), grid, convention="plain")
        lam = min_eigenpair(k).value
        trial = state_from_function(
            grid, lambda t: np.exp(-((t - center) ** 2)) * np.exp(0.4j * t)
        )
        rayleigh = quadratic_form(k, trial) / trial.norm_squared
        assert rayleigh >= lam - 1e-12 * k.norm


def _lowest(model, p, sigma: float, theta: float, n: int) -> tuple[float, float]:
    k = assemble(model, p, gaussian(sigma), make_grid(theta, n), convention="plain")
    pair = min_eigenpair(k)
    return pair.value, pair.noise_floor


class TestGridStability:
    """Tests for the stability of λ_min under grid refinement and wider cutoffs."""

    @pytest.mark.parametrize("sigma", [0.5, 1.0, 2.0])
    def test_free_stable_and_nonnegative(self, free_model, sigma):
        """Test the free field stays at zero from (8, 256) to (12, 512)."""
        coarse, _ = _lowest(free_model, PolynomialP(), sigma, 8.0, 256)
        fine, floor = _lowest(free_model, PolynomialP(), sigma, 12.0, 512)
        assert fine >= -floor
        assert abs(fine - coarse) < 1e-5 * max(1.0, abs(fine))

    def test_ising_cutoff_8_to_12(self, ising_model):
        """Test the Ising minimum is negative and stable when Θ grows from 8 to 12."""
        coarse, _ = _lowest(ising_model, PolynomialP(), 1.0, 8.0, 256)
        fine, floor = _lowest(ising_model, PolynomialP(), 1.0, 12.0, 512)
        assert coarse < 0 and fine < -floor
        assert abs(fine - coarse) < 1e-5 * max(1.0, abs(fine))
        assert abs(fine - coarse) < 1e-3 * abs(fine)

    def test_ising_fixed_n_wider_cutoff(self, ising_model):
        """Test Θ = 8 and Θ = 10 at n = 512 agree to four digits."""
        at_8, _ = _lowest(ising_model, PolynomialP(), 1.0, 8.0, 512)
        at_10, _ = _lowest(ising_model, PolynomialP(), 1.0, 10.0, 512)
        assert at_10 == pytest.approx(at_8, rel=1e-3)
        assert at_10 == pytest.approx(-4.287e-05, rel=1e-3)

    def test_free_alpha_stable(self, free_model):
        """Test the free α = 0.4 minimum is negative and stable from (8, 256) to (12, 512)."""
        p = polynomial_from_alpha(0.4)
        coarse, _ = _lowest(free_model, p, 1.0, 8.0, 256)
        fine, floor = _lowest(free_model, p, 1.0, 12.0, 512)
        assert coarse == pytest.approx(-5.41e-05, rel=1e-2)
        assert fine < -floor
        assert abs(fine - coarse) < 1e-5 * max(1.0, abs(fine))

    def test_monotone_refinement(self, ising_model):
        """Test |λ(n) − λ(2n)| does not grow along a doubling ladder at fixed Θ."""
        lams = [_lowest(ising_model, PolynomialP(), 1.0, 8.0, n) for n in (128, 256, 512)]
        values = [lam for lam, _ in lams]
        floor = max(f for _, f in lams)
        first, second = abs(values[1] - values[0]), abs(values[2] - values[1])
        assert second <= first + floor


class TestBoundaryMass:
    """Tests for boundary_mass."""

    def test_mass_near_cutoff(self):
        """Test only nodes within the boundary width are counted."""
        grid = make_grid(4.0, 32)
        coefficients = np.zeros(32, dtype=complex)
        coefficients[0] = coefficients[16] = 1.0
        mass = boundary_mass(grid, StateVector(coefficients), width=1.0)
        assert mass == pytest.approx(1.0)


class TestBestConstant:
    """Tests for best_constant."""

    @pytest.mark.parametrize("sigma", [0.5, 1.0, 2.0])
    def test_free_positivity(self, free_model, small_ladder, sigma):
        """Test the free field has no negative one-particle energy."""
        bound = best_constant(free_model, PolynomialP(), gaussian(sigma), ladder=small_ladder)
        grid = make_grid(*small_ladder[-1])
        norm = assemble(free_model, PolynomialP(), gaussian(sigma), grid).norm
        assert bound.lam >= -1e-8 * norm

    def test_ising_wide_ladder_reports_lowest(self, ising_model):
        """Test the last stage of a (8, 256) → (12, 512) ladder is the true lowest eigenvalue."""
        bound = best_constant(
            ising_model, PolynomialP(), gaussian(1.0), ladder=[(8.0, 256), (12.0, 512)]
        )
        assert bound.lam == pytest.approx(-4.2874e-05, rel=1e-3)
        assert bound.ladder[0].lam == pytest.approx(-4.2858e-05, rel=1e-3)
        assert bound.converged

    def test_ising_negative(self, ising_model, small_ladder):
        """Test Ising has a negative one-particle energy for some gaussian width."""
        lams = [
            best_constant(ising_model, PolynomialP(), gaussian(s), ladder=small_ladder).lam
            for s in (0.5, 1.0, 2.0)
        ]
        assert min(lams) < 0

    def test_free_alpha_negative(self, free_model, small_ladder):
        """Test the free linear family with α = 0.4 has a negative one-particle energy."""
        p = polynomial_from_alpha(0.4)
        lams = [
            best_constant(free_model, p, gaussian(s), ladder=small_ladder).lam
            for s in (0.5, 1.0, 2.0)
        ]
        assert min(lams) < 0

    def test_amplitude_scaling(self, ising_model, small_ladder):
        """Test doubling the amplitude multiplies λ_min by four."""
        base = best_constant(ising_model, PolynomialP(), gaussian(1.0), ladder=small_ladder)
        scaled = best_constant(
            ising_model, PolynomialP(), gaussian(1.0, amplitude=2.0), ladder=small_ladder
        )
        assert scaled.lam == pytest.approx(4.0 * base.lam, rel=1e-12)

    def test_ladder_record(self, ising_model, small_ladder):
        """Test every ladder stage is recorded with its eigenvalue."""
        bound = best_constant(ising_model, PolynomialP(), gaussian(1.0), ladder=small_ladder)
        assert [stage.n for stage in bound.ladder] == [128, 256]
        assert bound.ladder[-1].lam == bound.lam
        assert bound.error_estimate == abs(bound.ladder[1].lam - bound.ladder[0].lam)
        assert bound.witness.norm == pytest.approx(1.0)
        assert bound.hermiticity_defect < 1e-10

    def test_convergence_flag(self, ising_model, small_ladder):
        """Test the converged flag follows the error estimate and tolerance."""
        bound = best_constant(
            ising_model, PolynomialP(), gaussian(1.0), tolerance=1e-5, ladder=small_ladder
        )
        expected = bound.error_estimate < 1e-5 * max(1.0, abs(bound.lam))
        assert bound.converged == expected
        assert bound.tolerance == 1e-5

    def test_single_stage_not_converged(self, ising_model):
        """Test a single-stage ladder cannot claim convergence."""
        bound = best_constant(ising_model, PolynomialP(), gaussian(1.0), ladder=[(6.0, 64)])
        assert not bound.converged
        assert math.isinf(bound.error_estimate)
        assert bound.to_dict()["error_estimate"] is None

    def test_zero_function_converges_trivially(self, ising_model):
        """Test g ≡ 0 gives λ = 0, converged in one stage."""
        g = gaussian(1.0, amplitude=0.0)
        bound = best_constant(ising_model, PolynomialP(), g, ladder=[(6.0, 64)])
        assert bound.lam == 0.0
        assert bound.converged

    @pytest.mark.parametrize(
        "ladder",
        [[], [(8.0, 128), (8.0, 128)], [(8.0, 128), (6.0, 256)]],
    )
    def test_invalid_ladder(self, free_model, ladder):
        """Test ladders must be non-empty, double n and keep Θ non-decreasing."""
        with pytest.raises(ValueError):
            best_constant(free_model, PolynomialP(), gaussian(1.0), ladder=ladder)

    def test_invalid_tolerance(self, free_model):
        """Test a non-positive tolerance raises ValueError."""
        with pytest.raises(ValueError):
            best_constant(free_model, PolynomialP(), gaussian(1.0), tolerance=0.0)

    def test_to_dict(self, ising_model, small_ladder):
        """Test the serialized record holds λ_min, c_g and the ladder."""
        bound = best_constant(ising_model, PolynomialP(), gaussian(1.0), ladder=small_ladder)
        record = bound.to_dict()
        assert record["lambda_min"] == bound.lam
        assert record["c_g"] == max(0.0, -bound.lam)
        assert len(record["ladder"]) == 2
        assert record["grid"]["n"] == 256


class TestWitnessExport:
    """Tests for witness export."""

    def test_witness_csv(self, temp_dir: Path, ising_model):
        """Test the witness CSV has one row per node."""
        bound = best_constant(ising_model, PolynomialP(), gaussian(1.0), ladder=[(4.0, 32)])
        assert isinstance(bound, ConvergedBound)
        witness_to_csv(bound, temp_dir / "witness.csv")
        lines = (temp_dir / "witness.csv").read_text(encoding="utf-8").splitlines()
        assert lines[0] == "theta,re_phi,im_phi"
        assert len(lines) == 33

        nodes, values = witness_function(bound.grid, bound.witness)
        assert float(lines[1].split(",")[0]) == nodes[0]
        assert float(lines[1].split(",")[1]) == values[0].real
