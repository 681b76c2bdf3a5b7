import logging
from typing import Optional, Tuple

import numpy as np

from ..shared.errors import InvalidParameter
from .matrix import MatrixKind, StructuredMatrix, from_blocks, validate_shape

logger = logging.getLogger(__name__)

RNG_NAME = "philox"

# kinds with a fixed block bandwidth
_FIXED_BANDWIDTH = {
    MatrixKind.BLOCK_TRIDIAGONAL: (1, 1),
    MatrixKind.ABD: (1, 0),
    MatrixKind.BABD: (1, 0),
}


def make_rng(seed: int) -> np.random.Generator:
    """Counter-based generator used for every random instance."""
    return np.random.Generator(np.random.Philox(int(seed)))


def default_bandwidth(kind: MatrixKind, s: Optional[int], r: Optional[int]) -> Tuple[int, int]:
    fixed = _FIXED_BANDWIDTH.get(kind)
    if fixed is not None:
        return (fixed[0] if s is None else s, fixed[1] if r is None else r)
    return (1 if s is None else s, 1 if r is None else r)


def default_corners(kind: MatrixKind, m: int, s: int, r: int):
    """
    Corner shapes a periodic or bordered problem produces.

    BABD couples the first and last block unknowns with an m x m block. A
    circulant-like matrix wraps its s lower diagonals into the upper-right
    corner and its r upper diagonals into the lower-left one.
    """
    if kind == MatrixKind.BABD:
        return (m, m), None
    if kind == MatrixKind.CIRCULANT_LIKE:
        upper = (s * m, s * m) if s > 0 else None
        lower = (r * m, r * m) if r > 0 else None
        if upper is None and lower is None:
            upper = (m, m)
        return upper, lower
    return None, None


def generate_random(kind, n: int, m: int = 1, s: Optional[int] = None, r: Optional[int] = None,
                    seed: int = 0, diag_dominance: float = 0.0,
                    corner_shape: Optional[Tuple[int, int]] = None,
                    lower_corner_shape: Optional[Tuple[int, int]] = None) -> StructuredMatrix:
    """
    Random structured matrix with entries uniform in [-1, 1).

    Args:
        kind: MatrixKind or its token.
        n, m, s, r: sizes; s and r default to the kind's fixed bandwidths.
        seed: Philox key; equal seeds give bit-identical matrices.
        diag_dominance: when > 1, every diagonal entry is rescaled so that
            |a_ii| >= diag_dominance * sum_{j != i} |a_ij| holds strictly.
        corner_shape, lower_corner_shape: override the kind's default corners.

    Returns:
        StructuredMatrix whose ``meta`` records the generator and seed.
    """
    kind = kind if isinstance(kind, MatrixKind) else MatrixKind.parse(str(kind))
    if diag_dominance < 0 or not np.isfinite(diag_dominance):
        raise InvalidParameter(f"diag_dominance must be >= 0, got {diag_dominance}")
    s, r = default_bandwidth(kind, s, r)
    if corner_shape is None and lower_corner_shape is None:
        corner_shape, lower_corner_shape = default_corners(kind, m, s, r)
    validate_shape(kind, n, m, s, r, corner_shape, lower_corner_shape)

    rng = make_rng(seed)
    nblk = n // m
    blocks = rng.uniform(-1.0, 1.0, size=(nblk, s + r + 1, m, m))
    corner = None if corner_shape is None else rng.uniform(-1.0, 1.0, size=corner_shape)
    lower = None if lower_corner_shape is None else rng.uniform(-1.0, 1.0, size=lower_corner_shape)

    meta = {"rng": RNG_NAME, "seed": str(int(seed))}
    A = from_blocks(kind, n, m, s, r, blocks, corner, lower, meta, validated=True)
    if diag_dominance > 1:
        A = _make_dominant(A, diag_dominance)
    logger.debug(f"generated {A!r} seed={seed} dominance={diag_dominance}")
    return A


def _make_dominant(A: StructuredMatrix, dominance: float) -> StructuredMatrix:
    rows, cols, vals = A.entries()
    off = np.abs(vals) * (rows != cols)
    offsum = np.bincount(rows, weights=off, minlength=A.n)

    blocks = np.array(A.blocks)
    diag_view = blocks[:, A.s]  # (nblk, m, m), diagonal blocks
    idx = np.arange(A.m)
    current = diag_view[:, idx, idx].ravel()
    target = np.where(offsum > 0, dominance * offsum * (1.0 + 1e-9), 1.0)
    sign = np.where(current < 0, -1.0, 1.0)
    diag_view[:, idx, idx] = (sign * target).reshape(A.nblk, A.m)
    return from_blocks(A.kind, A.n, A.m, A.s, A.r, blocks, A.corner, A.lower_corner,
                       A.meta, validated=True)
