from .reduced import OpCounter, ReducedSystem, assemble_reduced, solve_reduced
from .factorization import (
    ParallelFactorization,
    SolveStats,
    dense_factors,
    parallel_factor,
    residual,
    solve,
    solve_with_stats,
)

__all__ = [
    "OpCounter",
    "ParallelFactorization",
    "ReducedSystem",
    "SolveStats",
    "assemble_reduced",
    "dense_factors",
    "parallel_factor",
    "residual",
    "solve",
    "solve_reduced",
    "solve_with_stats",
]
