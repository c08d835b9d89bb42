"""Anisotropic Littlewood-Paley square functions and weighted Sobolev norms on periodic grids."""

from .dilation import (
    ball_volume,
    diag12_rho,
    estimate_unit_ball_volume,
    make_dilation_group,
    quasi_norm,
)
from .estimators import BandLimiter, RieszPotential, SquareFunction
from .exceptions import (
    AdmissibilityError,
    AnisoLPError,
    ConfigError,
    DomainError,
    QuadratureCoverageError,
    RangeError,
    ShapeError,
)
from .fields import GridSpec, SpatialField, band_limit, forward, inverse, lp_norms, random_test_function
from .kernels import (
    ball_averaging_kernel,
    iterated_kernel,
    iterated_symbol,
    poisson_gradient_family,
    potential_profile,
    radial_profile,
    smooth_bump_kernel,
)
from .operators import functional_calculus, invert_multiplier, lp_symbol, riesz_potential
from .sobolev import EquivalenceReport, Family, diag12_derivative_check, equivalence_study, sobolev_norm
from .squares import avg_square, g_psi, g_vector, iterated_potential_square, iterated_square, marcinkiewicz, potential_square
from .weights import estimate_ap_constant, maximal_function, power_weight

__version__ = "0.1.0"

__all__ = [
    "ball_volume",
    "diag12_rho",
    "estimate_unit_ball_volume",
    "make_dilation_group",
    "quasi_norm",
    "BandLimiter",
    "RieszPotential",
    "SquareFunction",
    "AdmissibilityError",
    "AnisoLPError",
    "ConfigError",
    "DomainError",
    "QuadratureCoverageError",
    "RangeError",
    "ShapeError",
    "GridSpec",
    "SpatialField",
    "band_limit",
    "forward",
    "inverse",
    "lp_norms",
    "random_test_function",
    "ball_averaging_kernel",
    "iterated_kernel",
    "iterated_symbol",
    "poisson_gradient_family",
    "potential_profile",
    "radial_profile",
    "smooth_bump_kernel",
    "functional_calculus",
    "invert_multiplier",
    "lp_symbol",
    "riesz_potential",
    "EquivalenceReport",
    "Family",
    "diag12_derivative_check",
    "equivalence_study",
    "sobolev_norm",
    "avg_square",
    "g_psi",
    "g_vector",
    "iterated_potential_square",
    "iterated_square",
    "marcinkiewicz",
    "potential_square",
    "estimate_ap_constant",
    "maximal_function",
    "power_weight",
]
