import logging
from dataclasses import dataclass
from typing import Tuple

import numpy as np

from ..shared.errors import DimensionMismatch, InputError, NothingToPermute, UnsupportedKind, UnsupportedStructure
from ..structmat.matrix import CORNER_KINDS, StructuredMatrix, from_blocks, validate_shape

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class RowPermutation:
    """Cyclic row shift P with (P v)[i] = v[(i - shift) mod n]."""

    n: int
    shift: int = 0

    @property
    def is_identity(self) -> bool:
        return self.shift % self.n == 0

    def apply(self, v) -> np.ndarray:
        v = np.asarray(v, dtype=np.float64)
        if v.shape[0] != self.n:
            raise DimensionMismatch(f"vector of length {v.shape[0]} for permutation of size {self.n}")
        return np.roll(v, self.shift, axis=0)

    def inverse(self, v) -> np.ndarray:
        v = np.asarray(v, dtype=np.float64)
        if v.shape[0] != self.n:
            raise DimensionMismatch(f"vector of length {v.shape[0]} for permutation of size {self.n}")
        return np.roll(v, -self.shift, axis=0)

    def matrix(self) -> np.ndarray:
        return np.roll(np.eye(self.n), self.shift, axis=0)


def permute_corner(A: StructuredMatrix, strict: bool = False) -> Tuple[StructuredMatrix, RowPermutation]:
    """
    Move all corner content of ``A`` into the upper-right corner.

    The last ``k`` rows (the lower-left corner height rounded up to whole
    blocks) are rotated to the top. Their band entries, together with any
    existing upper-right corner, form the new corner; the lower-left entries
    join the band, whose bandwidths are recomputed.

    Returns:
        (permuted matrix, P) with to_dense(permuted) == P @ to_dense(A).
        Only rows move, so the permuted system has the same solution when its
        right-hand side is ``P.apply(f)``.

    Raises:
        NothingToPermute: ``A`` is already canonical and ``strict`` is set.
        UnsupportedStructure: the rotated matrix does not fit a banded body
            plus one upper-right corner.
    """
    if A.kind not in CORNER_KINDS:
        raise UnsupportedKind(f"{A.kind.value} matrices have no corner to permute")
    if A.lower_corner is None:
        if strict:
            raise NothingToPermute("corner content already sits in the upper-right block")
        return A, RowPermutation(A.n, 0)

    n, m = A.n, A.m
    lr = A.lower_corner.shape[0]
    shift = -(-lr // m) * m

    rows, cols, vals = A.entries()
    new_rows = (rows + shift) % n
    moved = rows >= n - shift
    from_lower = np.zeros(rows.size, dtype=bool)
    # entries() lists band entries first, then the upper corner, then the lower one
    n_upper = 0 if A.corner is None else A.corner.size
    n_lower = A.lower_corner.size
    n_band = rows.size - n_upper - n_lower
    from_lower[rows.size - n_lower:] = True
    from_upper = np.zeros(rows.size, dtype=bool)
    from_upper[n_band:n_band + n_upper] = True

    to_corner = from_upper | (moved & ~from_lower)
    to_band = ~to_corner

    brow, bcol = new_rows[to_band] // m, cols[to_band] // m
    offsets = bcol - brow
    s_new = int(max(0, -offsets.min())) if offsets.size else 0
    r_new = int(max(0, offsets.max())) if offsets.size else 0

    crow, ccol = new_rows[to_corner], cols[to_corner]
    corner_shape = (int(crow.max()) + 1, int(n - ccol.min()))
    try:
        validate_shape(A.kind, n, m, s_new, r_new, corner_shape, None)
    except InputError as e:
        raise UnsupportedStructure(f"permuted matrix is not band plus upper-right corner: {e.detail}") from None

    blocks = np.zeros((A.nblk, s_new + r_new + 1, m, m))
    band_rows, band_cols = new_rows[to_band], cols[to_band]
    blocks[band_rows // m, offsets + s_new, band_rows % m, band_cols % m] = vals[to_band]
    corner = np.zeros(corner_shape)
    corner[crow, ccol - (n - corner_shape[1])] = vals[to_corner]

    out = from_blocks(A.kind, n, m, s_new, r_new, blocks, corner, None, A.meta, validated=True)
    logger.info(f"🔁 Rotated {shift} rows: s={A.s}->{s_new}, r={A.r}->{r_new}, corner {corner_shape}")
    return out, RowPermutation(n, shift)
