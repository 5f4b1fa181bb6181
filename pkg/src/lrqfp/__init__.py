"""Maximize x'Qx / x'Px over a polyhedron when Q is convex and low rank."""

from .errors import (
    DecompositionError,
    DenominatorZeroError,
    InfeasibleError,
    LrqfpError,
    MalformedInstanceError,
    QPSolveError,
    RegionCountOverflowError,
    UnboundedFeasibleSetError,
)
from .generator import GeneratorSpec, generate
from .model import (
    ProblemInstance,
    SolveOutcome,
    SolverConfig,
    Status,
    evaluate_objective,
    objective_gradient,
    read_instance,
    validate,
    write_instance,
)
from .oracle import grid_oracle
from .region_solver import solve, solve_exact, solve_fast, solve_rank_one, verify_or_improve

__all__ = [
    "DecompositionError",
    "DenominatorZeroError",
    "GeneratorSpec",
    "InfeasibleError",
    "LrqfpError",
    "MalformedInstanceError",
    "ProblemInstance",
    "QPSolveError",
    "RegionCountOverflowError",
    "SolveOutcome",
    "SolverConfig",
    "Status",
    "UnboundedFeasibleSetError",
    "evaluate_objective",
    "generate",
    "grid_oracle",
    "objective_gradient",
    "read_instance",
    "solve",
    "solve_exact",
    "solve_fast",
    "solve_rank_one",
    "validate",
    "verify_or_improve",
    "write_instance",
]
