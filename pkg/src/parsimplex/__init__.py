"""Dense tableau simplex with a shared-memory parallel engine and benchmark harness."""
from .generator import GenSpec, generate, realized_density
from .lp_model import (
    AntiCycling,
    LpProblem,
    SolveOutcome,
    SolverConfig,
    Status,
    UnboundedProblem,
    load_problem,
    dump_problem,
    validate,
)
from .parallel import WorkerTeam, solve_parallel
from .tableau import build_initial_tableau, solve_serial

__all__ = [
    "AntiCycling",
    "GenSpec",
    "LpProblem",
    "SolveOutcome",
    "SolverConfig",
    "Status",
    "UnboundedProblem",
    "WorkerTeam",
    "build_initial_tableau",
    "dump_problem",
    "generate",
    "load_problem",
    "realized_density",
    "solve_parallel",
    "solve_serial",
    "validate",
]

__version__ = "0.1.0"
