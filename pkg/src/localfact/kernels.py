"""
Numba kernels for row-band storage ``ab[i, j - i + lw] = A[i, j]``.
All kernels release the GIL so partitions factor in parallel on worker
threads. Right-hand sides are 2-D (rows x columns).
"""

import numpy as np
from numba import jit


@jit(nopython=True, nogil=True)
def band_lu_inplace(ab: np.ndarray, lw: int, uw: int, tiny: float) -> int:
    """
    Doolittle LU without pivoting, in place: unit L below the diagonal, U on
    and above it. Returns -1 on success or the index of the first pivot with
    magnitude <= tiny.
    """
    n = ab.shape[0]
    for k in range(n):
        piv = ab[k, lw]
        if abs(piv) <= tiny:
            return k
        for i in range(k + 1, min(n, k + lw + 1)):
            lik = ab[i, k - i + lw] / piv
            ab[i, k - i + lw] = lik
            if lik != 0.0:
                for j in range(k + 1, min(n, k + uw + 1)):
                    ab[i, j - i + lw] -= lik * ab[k, j - k + lw]
    return -1


@jit(nopython=True, nogil=True)
def band_lower_solve(ab: np.ndarray, lw: int, b: np.ndarray, unit: bool) -> np.ndarray:
    n = ab.shape[0]
    x = b.copy()
    for i in range(n):
        for j in range(max(0, i - lw), i):
            lij = ab[i, j - i + lw]
            if lij != 0.0:
                for c in range(x.shape[1]):
                    x[i, c] -= lij * x[j, c]
        if not unit:
            for c in range(x.shape[1]):
                x[i, c] /= ab[i, lw]
    return x


@jit(nopython=True, nogil=True)
def band_upper_solve(ab: np.ndarray, lw: int, uw: int, b: np.ndarray, unit: bool) -> np.ndarray:
    n = ab.shape[0]
    x = b.copy()
    for i in range(n - 1, -1, -1):
        for j in range(i + 1, min(n, i + uw + 1)):
            uij = ab[i, j - i + lw]
            if uij != 0.0:
                for c in range(x.shape[1]):
                    x[i, c] -= uij * x[j, c]
        if not unit:
            for c in range(x.shape[1]):
                x[i, c] /= ab[i, lw]
    return x


@jit(nopython=True, nogil=True)
def band_upper_t_solve(ab: np.ndarray, lw: int, uw: int, b: np.ndarray, unit: bool) -> np.ndarray:
    """Solve U^T x = b (forward sweep)."""
    n = ab.shape[0]
    x = b.copy()
    for i in range(n):
        for j in range(max(0, i - uw), i):
            uji = ab[j, i - j + lw]
            if uji != 0.0:
                for c in range(x.shape[1]):
                    x[i, c] -= uji * x[j, c]
        if not unit:
            for c in range(x.shape[1]):
                x[i, c] /= ab[i, lw]
    return x


@jit(nopython=True, nogil=True)
def band_lower_t_solve(ab: np.ndarray, lw: int, b: np.ndarray, unit: bool) -> np.ndarray:
    """Solve L^T x = b (backward sweep)."""
    n = ab.shape[0]
    x = b.copy()
    for i in range(n - 1, -1, -1):
        for j in range(i + 1, min(n, i + lw + 1)):
            lji = ab[j, i - j + lw]
            if lji != 0.0:
                for c in range(x.shape[1]):
                    x[i, c] -= lji * x[j, c]
        if not unit:
            for c in range(x.shape[1]):
                x[i, c] /= ab[i, lw]
    return x
