"""Solvers for equilibrium problems posed over prox-regular feasible sets.

The package splits into geometry (constraint sets with exact projections and
prox-regularity certificates), model (bifunctions, problems, residuals),
schemes (implicit, inertial, and explicit iterations plus the Fejer check),
gap (merit-function machinery and the descent method), oracle (independent
grid and sampling audits), and config/cli (batch plumbing).
"""

from .errors import (
    DegenerateProjection,
    DimensionMismatch,
    EmptyGrid,
    EmptyTrace,
    GridTooLarge,
    InfeasibleSegment,
    InnerSolveFailed,
    MissingGradient,
    NonFiniteValue,
    ParseError,
    PointNotInSet,
    ProxequilError,
    SamplingExhausted,
    SubproblemFailed,
    ValidationError,
)
from .geometry import (
    Annulus,
    Ball,
    Box,
    BoxMinusBall,
    ConstraintSet,
    Halfspace,
    NormalCheckReport,
    ProjectionResult,
    SET_KINDS,
    Sphere,
    TwoBallUnion,
)
from .model import (
    Bifunction,
    SolverConfig,
    Status,
    Trace,
    TraceRecord,
    UREProblem,
    make_vi_bifunction,
    problem_residual,
)
from .schemes import (
    FejerReport,
    SubproblemCheck,
    SubproblemSpec,
    default_step_size,
    explicit_solve,
    fejer_check,
    inertial_proximal_solve,
    proximal_solve,
    solve_subproblem,
    verify_subproblem_inequality,
)
from .gap import (
    GapModel,
    NecessaryConditionReport,
    Regularizer,
    RegularizerReport,
    check_necessary_condition,
    check_regularizer_axioms,
    descent_solve,
    gap_gradient,
    gap_value,
    line_search,
    quadratic_regularizer,
    w_map,
)
from .oracle import (
    GridSpec,
    OracleResult,
    PseudomonotoneReport,
    check_pseudomonotone,
    finite_diff_gradient,
    grid_solve,
)
from .config import RunConfig, build_problem, build_solver_config, emit_config, parse_config

__version__ = "0.1.0"

__all__ = [
    "Annulus",
    "Ball",
    "Bifunction",
    "Box",
    "BoxMinusBall",
    "ConstraintSet",
    "DegenerateProjection",
    "DimensionMismatch",
    "EmptyGrid",
    "EmptyTrace",
    "FejerReport",
    "GapModel",
    "GridSpec",
    "GridTooLarge",
    "Halfspace",
    "InfeasibleSegment",
    "InnerSolveFailed",
    "MissingGradient",
    "NecessaryConditionReport",
    "NonFiniteValue",
    "NormalCheckReport",
    "OracleResult",
    "ParseError",
    "PointNotInSet",
    "ProjectionResult",
    "ProxequilError",
    "PseudomonotoneReport",
    "Regularizer",
    "RegularizerReport",
    "RunConfig",
    "SET_KINDS",
    "SamplingExhausted",
    "SolverConfig",
    "Sphere",
    "Status",
    "SubproblemCheck",
    "SubproblemFailed",
    "SubproblemSpec",
    "Trace",
    "TraceRecord",
    "TwoBallUnion",
    "UREProblem",
    "ValidationError",
    "build_problem",
    "build_solver_config",
    "check_necessary_condition",
    "check_pseudomonotone",
    "check_regularizer_axioms",
    "default_step_size",
    "descent_solve",
    "emit_config",
    "explicit_solve",
    "fejer_check",
    "finite_diff_gradient",
    "gap_gradient",
    "gap_value",
    "grid_solve",
    "inertial_proximal_solve",
    "line_search",
    "make_vi_bifunction",
    "parse_config",
    "problem_residual",
    "proximal_solve",
    "quadratic_regularizer",
    "solve_subproblem",
    "verify_subproblem_inequality",
    "w_map",
]
