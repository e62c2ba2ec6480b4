"""Flat conical metrics on the Riemann sphere."""
from ._backend import BACKEND
from .divisor import (
    INFINITY,
    ConePoint,
    Divisor,
    combine,
    complete_at_infinity,
    degree,
    validate_gauss_bonnet,
)
from .path import Path
from .prym import (
    BranchState,
    PrymDifferential,
    evaluate_with_branch,
    log_derivative,
    metric_density,
    reconstruct_by_exponential,
    residue_at,
)
from .develop import (
    AffineIsometry,
    continue_branch,
    develop_samples,
    integrate_along_path,
    integrate_to_cone_point,
    integrate_to_infinity,
    monodromy,
)
from .local import (
    cone_angle_measure,
    fit_local_normal_form,
    frobenius_coefficients,
    indicial_roots,
    ode_residual,
    schwarzian_numeric,
)
from .schwarz_christoffel import (
    PolygonSpec,
    PrevertexConfig,
    sc_forward,
    sc_side_lengths,
    sc_solve_parameters,
    sc_vertices,
)

__version__ = "0.1.0"

__all__ = [
    "BACKEND",
    "INFINITY",
    "ConePoint",
    "Divisor",
    "combine",
    "complete_at_infinity",
    "degree",
    "validate_gauss_bonnet",
    "Path",
    "BranchState",
    "PrymDifferential",
    "evaluate_with_branch",
    "log_derivative",
    "metric_density",
    "reconstruct_by_exponential",
    "residue_at",
    "AffineIsometry",
    "continue_branch",
    "develop_samples",
    "integrate_along_path",
    "integrate_to_cone_point",
    "integrate_to_infinity",
    "monodromy",
    "cone_angle_measure",
    "fit_local_normal_form",
    "frobenius_coefficients",
    "indicial_roots",
    "ode_residual",
    "schwarzian_numeric",
    "PolygonSpec",
    "PrevertexConfig",
    "sc_forward",
    "sc_side_lengths",
    "sc_solve_parameters",
    "sc_vertices",
]

