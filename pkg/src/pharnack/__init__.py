"""Numerical laboratory for p-harmonic fields with a boundary singularity.

Builds separable solutions and explicit barriers, solves the truncated
Dirichlet problems of the monotone approximation scheme, and measures the
boundary-Harnack-type constants on the computed fields.
"""

from .barriers import (CertificationReport, LowerBarrierParams,
                       UpperBarrierParams, certify_barriers,
                       eval_lower_barrier, eval_upper_barrier,
                       lower_barrier_params, upper_barrier_params)
from .exponents import (AngularProfile, angular_shoot, exponent_for_opening,
                        lambda_of, separable_field)
from .geometry import (Ball, DomainSpec, PolarGrid, build_polar_grid,
                       chain_of_balls, distance_to_boundary, grid_from_radii,
                       normal_point, power_graded_radii)
from .harnack import (HarnackReport, apriori_alpha, boundary_decay,
                      boundary_harnack, annulus_ratio_bound, carleson_constant,
                      chained_harnack, interior_harnack, quotient_constancy,
                      ratio_uniformity, singularity_test, two_sided_slope)
from .singular import (TruncationLadder, blowup_rate, moebius_check,
                       run_truncation_ladder, singular_limit,
                       tolksdorff_cone_fit, truncated_solve)
from .solver import (PotentialSpec, RadialEigenpair, RadialGrid, ScalarField,
                     comparison_check, eigen_annulus_radial, side_condition_check,
                     solve_dirichlet, weak_residual)

__version__ = "0.1.0"

__all__ = [
    "AngularProfile", "Ball", "CertificationReport", "DomainSpec",
    "HarnackReport", "LowerBarrierParams", "PolarGrid", "PotentialSpec",
    "RadialEigenpair", "RadialGrid", "ScalarField", "TruncationLadder",
    "UpperBarrierParams", "angular_shoot", "annulus_ratio_bound",
    "apriori_alpha", "blowup_rate", "boundary_decay", "boundary_harnack",
    "build_polar_grid", "carleson_constant", "certify_barriers",
    "chain_of_balls", "chained_harnack", "comparison_check",
    "distance_to_boundary", "eigen_annulus_radial", "eval_lower_barrier",
    "eval_upper_barrier", "exponent_for_opening", "grid_from_radii",
    "interior_harnack", "lambda_of", "lower_barrier_params", "moebius_check",
    "normal_point", "power_graded_radii", "quotient_constancy",
    "ratio_uniformity", "run_truncation_ladder", "separable_field",
    "side_condition_check", "singular_limit", "singularity_test",
    "solve_dirichlet", "tolksdorff_cone_fit", "truncated_solve",
    "two_sided_slope", "upper_barrier_params", "weak_residual",
]
