"""Alexandrov solutions of the 2D Monge-Ampere equation, at desk scale.

Exact subgradient measures of piecewise-linear convex functions, a Dirichlet
solver for Dirac-mass data by monotone vertex lowering, structural checks
(comparison ordering, interior depth bound, affine pushforward, log-det
expansion, Gauss curvature), and ODE reproductions of two classical singular
solutions.
"""

from .checks import (
    BoundRecord,
    BoundReport,
    ComparisonReport,
    SymMatrix,
    affine_transform_problem,
    alexandrov_bound,
    check_comparison,
    gauss_curvature,
    logdet_expansion_residual,
)
from .errors import (
    IncompatibleInputsError,
    InfeasibleMassError,
    IntegrationFailureError,
    InvalidConstraintError,
    InvalidPolygonError,
    InvalidSampleError,
    MongeAmpereError,
    NotPositiveDefiniteError,
    OutsideDomainError,
    SingularPointError,
    SingularTransformError,
    UnboundedCellError,
    UnsupportedDimensionError,
    UnsupportedInputError,
)
from .geometry import (
    EPS_GEOM,
    ConvexPolygon,
    HalfPlane,
    Region,
    RegionKind,
    halfplane_intersection,
    polygon_metrics,
    polygon_to_halfplanes,
)
from .nodal import (
    MAMeasure,
    NodalConvexFunction,
    convex_envelope,
    evaluate,
    lower_hull_planes,
    ma_masses,
    subgradient_cell,
)
from .singular import (
    IntegrationConfig,
    ODEProfile,
    PointEval,
    fit_power_exponent,
    integrate_pogorelov,
    integrate_wang,
    pogorelov_constant,
    pogorelov_eval,
    wang_eval,
)
from .solver import (
    DiracProblem,
    SolveReport,
    SolverConfig,
    discretize_density,
    solve_dirac,
    update_height,
)

__version__ = "0.1.0"

__all__ = [
    "BoundRecord",
    "BoundReport",
    "ComparisonReport",
    "ConvexPolygon",
    "DiracProblem",
    "EPS_GEOM",
    "HalfPlane",
    "IncompatibleInputsError",
    "InfeasibleMassError",
    "IntegrationConfig",
    "IntegrationFailureError",
    "InvalidConstraintError",
    "InvalidPolygonError",
    "InvalidSampleError",
    "MAMeasure",
    "MongeAmpereError",
    "NodalConvexFunction",
    "NotPositiveDefiniteError",
    "ODEProfile",
    "OutsideDomainError",
    "PointEval",
    "Region",
    "RegionKind",
    "SingularPointError",
    "SingularTransformError",
    "SolveReport",
    "SolverConfig",
    "SymMatrix",
    "UnboundedCellError",
    "UnsupportedDimensionError",
    "UnsupportedInputError",
    "affine_transform_problem",
    "alexandrov_bound",
    "check_comparison",
    "convex_envelope",
    "discretize_density",
    "evaluate",
    "fit_power_exponent",
    "gauss_curvature",
    "halfplane_intersection",
    "integrate_pogorelov",
    "integrate_wang",
    "logdet_expansion_residual",
    "lower_hull_planes",
    "ma_masses",
    "pogorelov_constant",
    "pogorelov_eval",
    "polygon_metrics",
    "polygon_to_halfplanes",
    "solve_dirac",
    "subgradient_cell",
    "update_height",
    "wang_eval",
]
