from .problem import IVProblem, Method, TimeGrid, coarse_mesh, decay_problem, random_stable_problem
from .window import (
    WindowSolution,
    WindowSystem,
    discretize_window,
    forward_sweep,
    homogeneous_propagator,
    solve_window,
    solve_window_homogeneous,
)
from .pipeline import Trajectory, parallel_update, reduced_recursion, solve_ivp_parallel, solve_ivp_sequential
from .io import parse_trajectory, write_trajectory

__all__ = [
    "IVProblem",
    "Method",
    "TimeGrid",
    "Trajectory",
    "WindowSolution",
    "WindowSystem",
    "coarse_mesh",
    "decay_problem",
    "discretize_window",
    "forward_sweep",
    "homogeneous_propagator",
    "parallel_update",
    "parse_trajectory",
    "random_stable_problem",
    "reduced_recursion",
    "solve_ivp_parallel",
    "solve_ivp_sequential",
    "solve_window",
    "solve_window_homogeneous",
    "write_trajectory",
]
