"""Numerical geometric tomography: distribution functions of sections and
projections of star and convex bodies, the spherical-harmonic machinery
behind them, and scenario runners for the comparison theorems."""
from .bodies import (
    HarmonicBody,
    LiftedBody,
    StarBody,
    SupportBody,
    ball,
    convexity_check,
    cube,
    ellipsoid,
    l2_sum,
    parse_body,
    perturbation_body,
    planar_seed,
    polar_2d,
    sphere_function,
    twisted,
)
from .distributions import (
    EmpiricalCDF,
    dominates,
    k_section_distribution,
    ks_distance,
    projection_distribution,
    radial_distribution,
    section_distribution,
)
from .functionals import (
    frac_derivative,
    isotropic_constant_estimate,
    parallel_section,
    section_area,
    shadow_area,
    support_function,
    volume,
)
from .harmonics import (
    HarmonicExpansion,
    body_from_polar_projection_body,
    expand,
    fourier_multiplier,
    intersection_body,
    invert_intersection_body,
    multiplier_monotonicity_report,
    radon_transform,
)
from .inequalities import (
    InequalityReport,
    blaschke_santalo_2d,
    busemann_intersection,
    mp_section_ratio,
    petty_projection,
)
from .scenarios import list_scenarios, run_scenario
from .sphere import fine_grid, quadrature_grid, sample_grassmannian, sample_sphere

__version__ = "0.1.0"
