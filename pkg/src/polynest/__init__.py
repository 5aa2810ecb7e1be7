"""Maximal dilated copies of one polytope inside another, end to end.

Pipeline: geometry (bodies at controlled precision) -> qcp (the optimization
problem as data) -> solver (global numeric search) -> refine (arbitrary
precision root polishing) -> algrec (exact minimal polynomials) ->
exactfield (closed forms in a real quadratic tower).
"""
from polynest.geometry import (
    Halfspace,
    Polytope,
    make_platonic,
    make_polygon,
    polar_dual,
    hull_2d3d,
    inradius,
    circumradius,
    contains,
    to_off,
)
from polynest.qcp import QcpInstance, build_basic, build_reduced, keplerian_bound
from polynest.solver import (
    Placement,
    SolveReport,
    SolverConfig,
    max_scale_lp,
    polish_local,
    solve_global,
)
from polynest.refine import (
    HighPrecisionSolution,
    IncidenceSystem,
    build_square_system,
    detect_incidences,
    newton_refine,
    verify_refinement,
)
from polynest.algrec import (
    AlgebraicNumber,
    min_poly_guess,
    sturm_count,
    verify_algebraic,
)
from polynest.exactfield import QuadExt, exact_sigma

__version__ = "0.1.0"
__all__ = [
    "Halfspace", "Polytope", "make_platonic", "make_polygon", "polar_dual",
    "hull_2d3d", "inradius", "circumradius", "contains", "to_off",
    "QcpInstance", "build_basic", "build_reduced", "keplerian_bound",
    "Placement", "SolveReport", "SolverConfig", "max_scale_lp",
    "polish_local", "solve_global",
    "HighPrecisionSolution", "IncidenceSystem", "build_square_system",
    "detect_incidences", "newton_refine", "verify_refinement",
    "AlgebraicNumber", "min_poly_guess", "sturm_count", "verify_algebraic",
    "QuadExt", "exact_sigma",
    "__version__",
]
