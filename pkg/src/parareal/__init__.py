from .expm import expm, matrix_exponential
from .propagators import BoundPropagator, Propagator, PropagatorKind, bind_pair, propagate
from .iteration import (
    DEFAULT_TOL,
    PararealResult,
    PararealState,
    coarse_sweep,
    history_csv,
    parareal_iterate,
    parareal_solve,
    parareal_trajectory,
)
from .heat import grid_points, heat_laplacian, heat_problem
from .config import PararealConfig

__all__ = [
    "BoundPropagator",
    "DEFAULT_TOL",
    "PararealConfig",
    "PararealResult",
    "PararealState",
    "Propagator",
    "PropagatorKind",
    "bind_pair",
    "coarse_sweep",
    "expm",
    "grid_points",
    "heat_laplacian",
    "heat_problem",
    "history_csv",
    "matrix_exponential",
    "parareal_iterate",
    "parareal_solve",
    "parareal_trajectory",
    "propagate",
]
