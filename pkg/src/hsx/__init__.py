"""Conservative Hunter-Saxton solutions in Lagrangian coordinates and a
relabeling-invariant Lipschitz metric between them."""

from .banach import BanachTriple, Grid, TailedFunction, b_inner, b_norm, chi_minus, chi_plus
from .evolution import (
    TestFunction,
    Trajectory,
    breaking_time,
    evolve,
    evolve_eulerian,
    invariant_defect,
    weak_residual,
)
from .metric import (
    CurvePath,
    coercivity_diagnostic,
    distance_eulerian,
    distance_upper,
    lipschitz_certificate,
    path_length,
    seminorm,
    solve_g,
)
from .state import (
    EulerianState,
    LagrangianState,
    RadonMeasure,
    Relabeling,
    cumulative_plus_id,
    project_pi,
    relabel,
    to_eulerian,
    to_lagrangian,
    validate,
)

__version__ = "0.1.0"

__all__ = [
    "BanachTriple", "Grid", "TailedFunction", "b_inner", "b_norm", "chi_minus", "chi_plus",
    "TestFunction", "Trajectory", "breaking_time", "evolve", "evolve_eulerian",
    "invariant_defect", "weak_residual", "CurvePath", "coercivity_diagnostic",
    "distance_eulerian", "distance_upper", "lipschitz_certificate", "path_length",
    "seminorm", "solve_g", "EulerianState", "LagrangianState", "RadonMeasure",
    "Relabeling", "cumulative_plus_id", "project_pi", "relabel", "to_eulerian",
    "to_lagrangian", "validate",
]
