"""Numerical services: models, kernels, criteria, bounds."""

from .criteria import (
    admissible_alpha_bound,
    classify_degree,
    classify_qei,
    linear_family_table,
    negativity_scan,
    sample_fp,
)
from .integrable import (
    CustomEvaluator,
    IntegrableModel,
    ModelRegistrationError,
    fmin_asymptote,
    fmin_real,
    fmin_shifted,
    load_custom_table,
    load_models_json,
    make_model,
    s2,
    watson_defect,
)
from .isingbound import ising_bound, massless_limit_bound, q_function, q_table
from .kernel import (
    HermiticityError,
    KernelMatrix,
    RapidityGrid,
    StateVector,
    assemble,
    f_free,
    f_p,
    kernel_element,
    monomial_polynomial,
    polynomial_from_alpha,
    quadratic_form,
)
from .models import (
    CONVENTIONS,
    MODEL_KINDS,
    TEST_FUNCTION_KINDS,
    Asymptote,
    BoundResult,
    NegativityWitness,
    PolynomialP,
    QEIVerdict,
    TestFunction,
    Verdict,
)
from .numerics import EigensolverError, QEILabError, QuadratureConfig, QuadratureError, integrate
from .optimizer import ConvergedBound, best_constant, make_grid, min_eigenpair
from .testfn import bump, fourier_g, fourier_gsq, gaussian, tabulated

__all__ = [
    # Models
    "TestFunction",
    "PolynomialP",
    "Asymptote",
    "QEIVerdict",
    "NegativityWitness",
    "BoundResult",
    "Verdict",
    "MODEL_KINDS",
    "TEST_FUNCTION_KINDS",
    "CONVENTIONS",
    # Test functions
    "gaussian",
    "bump",
    "tabulated",
    "fourier_g",
    "fourier_gsq",
    # Integrable models
    "IntegrableModel",
    "CustomEvaluator",
    "make_model",
    "fmin_shifted",
    "fmin_real",
    "fmin_asymptote",
    "s2",
    "watson_defect",
    "load_custom_table",
    "load_models_json",
    # Kernel
    "RapidityGrid",
    "StateVector",
    "KernelMatrix",
    "f_free",
    "f_p",
    "kernel_element",
    "assemble",
    "quadratic_form",
    "polynomial_from_alpha",
    "monomial_polynomial",
    # Criteria
    "admissible_alpha_bound",
    "negativity_scan",
    "classify_qei",
    "classify_degree",
    "sample_fp",
    "linear_family_table",
    # Optimizer
    "make_grid",
    "min_eigenpair",
    "best_constant",
    "ConvergedBound",
    # Ising bound
    "q_function",
    "q_table",
    "ising_bound",
    "massless_limit_bound",
    # Infrastructure
    "integrate",
    "QuadratureConfig",
    "QEILabError",
    "QuadratureError",
    "EigensolverError",
    "HermiticityError",
    "ModelRegistrationError",
]
