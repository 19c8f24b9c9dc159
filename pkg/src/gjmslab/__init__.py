"""Zonal spectral toolkit for conformal operators of order 2m on round spheres.

Modules
-------
spectral    orthonormal zonal basis, quadrature, operator spectra, norms
conformal   stereographic transport, bubbles, norm-invariance checks
kernels     surface Riesz kernel spectrum, inverse operator, duality quotient
rayleigh    sharp subcritical constants and quotient minimization
lane_emden  Newton/fixed-point solves, uniqueness probes, planar verifiers
cli         command-line front end and report emission
"""

__version__ = "0.1.0"

from .spectral import (  # noqa: F401
    DEFAULT_TRUNCATION,
    GjmsSpectrum,
    QuadratureRule,
    SphereParams,
    ZonalFunction,
    analyze,
    build_quadrature,
    gjms_eigenvalues,
    gjms_lambda0,
    lp_norm,
    quadratic_form,
    sphere_area,
    synthesize,
    zonal_basis,
)
from .conformal import (  # noqa: F401
    BubbleParams,
    RadialProfile,
    angle_from_radius,
    bubble_on_sphere,
    conformal_factor,
    norm_transport_check,
    pullback_to_plane,
    radius_from_angle,
)
from .kernels import (  # noqa: F401
    GreenConstants,
    KernelSpectrum,
    funk_hecke_spectrum,
    green_apply,
    green_constant,
    hls_dual_ratio,
    hls_functional,
)
from .rayleigh import (  # noqa: F401
    MinimizationResult,
    OptimizerConfig,
    minimize,
    rayleigh_gradient,
    rayleigh_quotient,
    sharp_constant,
)
from .lane_emden import (  # noqa: F401
    MonotonicityReport,
    Nonlinearity,
    ProbeReport,
    SolveResult,
    SuperPolyReport,
    constant_solution,
    solve_green,
    solve_newton,
    uniqueness_probe,
    verify_super_polyharmonic,
    verify_symmetry_monotonicity,
)
