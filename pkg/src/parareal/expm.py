"""
Matrix exponential by scaling and squaring with diagonal Pade cores of
degree 3, 5, 7, 9 or 13, picked from the 1-norm of t L.
"""

import logging
from typing import Dict, Tuple

import numpy as np
from scipy.linalg import LinAlgError, lu_factor, lu_solve

from ..shared.cache_manager import LRUCacheManager, array_key
from ..shared.config import SolverConfig
from ..shared.errors import ExpmFailure

logger = logging.getLogger(__name__)

# largest 1-norm for which each Pade degree meets double precision
THETA: Dict[int, float] = {
    3: 1.495585217958292e-2,
    5: 2.539398330063230e-1,
    7: 9.504178996162932e-1,
    9: 2.097847961257068e0,
    13: 5.371920351148152e0,
}

PADE_COEFFS: Dict[int, Tuple[float, ...]] = {
    3: (120.0, 60.0, 12.0, 1.0),
    5: (30240.0, 15120.0, 3360.0, 420.0, 30.0, 1.0),
    7: (17297280.0, 8648640.0, 1995840.0, 277200.0, 25200.0, 1512.0, 56.0, 1.0),
    9: (17643225600.0, 8821612800.0, 2075673600.0, 302702400.0, 30270240.0,
        2162160.0, 110880.0, 3960.0, 90.0, 1.0),
    13: (64764752532480000.0, 32382376266240000.0, 7771770303897600.0,
         1187353796428800.0, 129060195264000.0, 10559470521600.0,
         670442572800.0, 33522128640.0, 1323241920.0, 40840800.0,
         960960.0, 16380.0, 182.0, 1.0),
}


def _pade_uv(A: np.ndarray, degree: int) -> Tuple[np.ndarray, np.ndarray]:
    """Odd part U and even part V of the degree-``degree`` Pade numerator."""
    b = PADE_COEFFS[degree]
    eye = np.eye(A.shape[0])
    A2 = A @ A
    if degree == 13:
        A4 = A2 @ A2
        A6 = A2 @ A4
        U = A @ (A6 @ (b[13] * A6 + b[11] * A4 + b[9] * A2)
                 + b[7] * A6 + b[5] * A4 + b[3] * A2 + b[1] * eye)
        V = (A6 @ (b[12] * A6 + b[10] * A4 + b[8] * A2)
             + b[6] * A6 + b[4] * A4 + b[2] * A2 + b[0] * eye)
        return U, V
    powers = [eye, A2]
    while len(powers) <= degree // 2:
        powers.append(powers[-1] @ A2)
    odd = sum(b[2 * k + 1] * powers[k] for k in range(degree // 2 + 1))
    even = sum(b[2 * k] * powers[k] for k in range(degree // 2 + 1))
    return A @ odd, even


def expm(A: np.ndarray) -> np.ndarray:
    """exp(A) for a square dense matrix."""
    A = np.asarray(A, dtype=np.float64)
    if A.ndim != 2 or A.shape[0] != A.shape[1]:
        raise ExpmFailure(f"expm needs a square matrix, got shape {A.shape}")
    if not np.all(np.isfinite(A)):
        raise ExpmFailure("matrix has non-finite entries")
    n = A.shape[0]
    norm = float(np.max(np.sum(np.abs(A), axis=0))) if n else 0.0
    if norm == 0.0:
        return np.eye(n)

    squarings = 0
    for degree in (3, 5, 7, 9):
        if norm <= THETA[degree]:
            break
    else:
        degree = 13
        if norm > THETA[13]:
            squarings = int(np.ceil(np.log2(norm / THETA[13])))
            A = A / 2.0 ** squarings

    U, V = _pade_uv(A, degree)
    try:
        R = lu_solve(lu_factor(V - U, check_finite=True), V + U)
    except (LinAlgError, ValueError) as e:
        raise ExpmFailure(f"Pade denominator could not be factored: {e}") from e
    for _ in range(squarings):
        R = R @ R
    if not np.all(np.isfinite(R)):
        raise ExpmFailure(f"overflow after {squarings} squarings (||A||_1 = {norm:.3e})")
    return R


def matrix_exponential(L: np.ndarray, t: float) -> np.ndarray:
    """exp(t L), cached by the content of L and t."""
    L = np.asarray(L, dtype=np.float64)
    cache = LRUCacheManager(maxsize=SolverConfig().expm_cache_size)
    key = ("expm", array_key(L), float(t))
    hit = cache.get(key)
    if hit is not None:
        return hit
    result = expm(t * L)
    result.setflags(write=False)
    cache.set(key, result)
    logger.debug(f"expm of order {L.shape[0]} at t={t:g} computed")
    return result
