import logging
from typing import Callable, Optional

import numpy as np
from scipy.sparse import diags

from ..odeparallel.problem import IVProblem
from ..shared.errors import InvalidParameter

logger = logging.getLogger(__name__)


def heat_laplacian(m: int, diffusivity: float = 1.0) -> np.ndarray:
    """Second-difference Laplacian on m interior points of (0, 1), zero Dirichlet ends."""
    if m < 1:
        raise InvalidParameter(f"heat grid needs at least one interior point, got {m}")
    dx = 1.0 / (m + 1)
    L = diags([1.0, -2.0, 1.0], [-1, 0, 1], shape=(m, m)).toarray()
    return (diffusivity / dx**2) * L


def grid_points(m: int) -> np.ndarray:
    return np.arange(1, m + 1) / (m + 1)


def heat_problem(m: int = 32, t0: float = 0.0, T: float = 0.1, diffusivity: float = 1.0,
                 initial: Optional[Callable[[np.ndarray], np.ndarray]] = None,
                 source: Optional[Callable[[np.ndarray], np.ndarray]] = None) -> IVProblem:
    """
    Method-of-lines semi-discretization of u_t = k u_xx + s(x) on (0, 1).

    Defaults to u(x, 0) = sin(pi x) and no source.
    """
    x = grid_points(m)
    y0 = np.sin(np.pi * x) if initial is None else np.asarray(initial(x), dtype=np.float64)
    g = None
    if source is not None:
        sx = np.asarray(source(x), dtype=np.float64)

        def g(t: float) -> np.ndarray:
            return sx

    logger.debug(f"heat problem m={m} on [{t0}, {T}], diffusivity {diffusivity}")
    return IVProblem(heat_laplacian(m, diffusivity), y0, t0, T, g)
