"""
Structured sparse matrices: banded, block tridiagonal, ABD, BABD and
circulant-like, stored as padded block bands with optional corner blocks.

Memory layout: ``blocks[R, t]`` is the m x m block at block row ``R`` and
block column ``R - s + t``; slots that fall outside the matrix hold zeros.
The flat ``data`` layout accepted by :func:`make` (and written by the file
format) is band-major for the banded kind and block-row-major otherwise.
"""

import logging
from dataclasses import dataclass, field
from enum import Enum
from typing import Dict, Optional, Sequence, Tuple

import numpy as np

from ..shared.config import default_dense_limit
from ..shared.errors import (
    CornerForbidden,
    DimensionMismatch,
    InvalidBandwidth,
    TooLargeForDense,
    UnsupportedKind,
)

logger = logging.getLogger(__name__)


class MatrixKind(str, Enum):
    BANDED = "banded"
    BLOCK_TRIDIAGONAL = "blocktridiagonal"
    ABD = "abd"
    BABD = "babd"
    CIRCULANT_LIKE = "circulantlike"

    @classmethod
    def parse(cls, token: str) -> "MatrixKind":
        try:
            return cls(token.lower())
        except ValueError:
            raise UnsupportedKind(f"unknown matrix kind {token!r}") from None


CORNER_KINDS = (MatrixKind.BABD, MatrixKind.CIRCULANT_LIKE)


@dataclass(eq=False)
class StructuredMatrix:
    """A validated structured matrix. Treat as immutable."""

    kind: MatrixKind
    n: int
    m: int
    s: int
    r: int
    blocks: np.ndarray
    corner: Optional[np.ndarray] = None
    lower_corner: Optional[np.ndarray] = None
    meta: Dict[str, str] = field(default_factory=dict)

    @property
    def nblk(self) -> int:
        return self.n // self.m

    @property
    def width(self) -> int:
        return self.s + self.r + 1

    @property
    def lw(self) -> int:
        """Scalar lower bandwidth of the band part."""
        return self.s * self.m + self.m - 1

    @property
    def uw(self) -> int:
        """Scalar upper bandwidth of the band part."""
        return self.r * self.m + self.m - 1

    @property
    def has_corner(self) -> bool:
        return self.corner is not None or self.lower_corner is not None

    @property
    def corner_shape(self) -> Optional[Tuple[int, int]]:
        return None if self.corner is None else tuple(self.corner.shape)

    @property
    def lower_corner_shape(self) -> Optional[Tuple[int, int]]:
        return None if self.lower_corner is None else tuple(self.lower_corner.shape)

    def entries(self) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
        """All structurally present entries as (rows, cols, values)."""
        rows, cols, vals = _band_entries(self.blocks, self.nblk, self.m, self.s)
        parts_r, parts_c, parts_v = [rows], [cols], [vals]
        if self.corner is not None:
            cr, cc = self.corner.shape
            ri, ci = np.meshgrid(np.arange(cr), np.arange(self.n - cc, self.n), indexing="ij")
            parts_r.append(ri.ravel())
            parts_c.append(ci.ravel())
            parts_v.append(self.corner.ravel())
        if self.lower_corner is not None:
            lr, lc = self.lower_corner.shape
            ri, ci = np.meshgrid(np.arange(self.n - lr, self.n), np.arange(lc), indexing="ij")
            parts_r.append(ri.ravel())
            parts_c.append(ci.ravel())
            parts_v.append(self.lower_corner.ravel())
        return np.concatenate(parts_r), np.concatenate(parts_c), np.concatenate(parts_v)

    def block_window(self, r0: int, r1: int, c0: int, c1: int) -> np.ndarray:
        """Dense image of band entries in block rows [r0, r1) x block columns [c0, c1)."""
        m = self.m
        out = np.zeros(((r1 - r0) * m, (c1 - c0) * m))
        if r1 <= r0 or c1 <= c0:
            return out
        view = out.reshape(r1 - r0, m, c1 - c0, m)
        R = np.arange(r0, r1)
        for t in range(self.width):
            C = R - self.s + t
            ok = (C >= c0) & (C < c1) & (C >= 0) & (C < self.nblk)
            if np.any(ok):
                view[R[ok] - r0, :, C[ok] - c0, :] = self.blocks[R[ok], t]
        return out

    def scalar_band(self, r0: int, r1: int) -> Tuple[np.ndarray, int, int]:
        """
        Row-band image of the square diagonal block over block rows [r0, r1).

        Returns ``(ab, lw, uw)`` with ``ab[i, j - i + lw] = A[r0*m + i, r0*m + j]``
        for the block's own columns; couplings outside the block are dropped.
        """
        m, lw, uw = self.m, self.lw, self.uw
        nrows = (r1 - r0) * m
        ab = np.zeros((nrows, lw + uw + 1))
        R = np.arange(r0, r1)
        a_idx = np.arange(m)
        for t in range(self.width):
            C = R - self.s + t
            ok = (C >= r0) & (C < r1)
            if not np.any(ok):
                continue
            Rk, Ck = R[ok] - r0, C[ok] - r0
            i = (Rk * m)[:, None, None] + a_idx[None, :, None]
            j = (Ck * m)[:, None, None] + a_idx[None, None, :]
            ab[i, j - i + lw] = self.blocks[R[ok], t]
        return ab, lw, uw

    def same_as(self, other: "StructuredMatrix") -> bool:
        """Bit-exact equality of structure and stored reals."""

        def bits_equal(a: Optional[np.ndarray], b: Optional[np.ndarray]) -> bool:
            if a is None or b is None:
                return a is None and b is None
            return a.shape == b.shape and np.array_equal(
                np.ascontiguousarray(a).view(np.uint64), np.ascontiguousarray(b).view(np.uint64)
            )

        return (
            self.kind == other.kind
            and (self.n, self.m, self.s, self.r) == (other.n, other.m, other.s, other.r)
            and bits_equal(self.blocks, other.blocks)
            and bits_equal(self.corner, other.corner)
            and bits_equal(self.lower_corner, other.lower_corner)
        )

    def __repr__(self):
        corner = f", corner={self.corner_shape}" if self.corner is not None else ""
        lower = f", lower_corner={self.lower_corner_shape}" if self.lower_corner is not None else ""
        return (f"StructuredMatrix({self.kind.value}, n={self.n}, m={self.m}, "
                f"s={self.s}, r={self.r}{corner}{lower})")


def _band_entries(blocks: np.ndarray, nblk: int, m: int, s: int):
    width = blocks.shape[1]
    R = np.arange(nblk)[:, None]
    C = R - s + np.arange(width)[None, :]
    Ri, ti = np.nonzero((C >= 0) & (C < nblk))
    Ci = Ri - s + ti
    a = np.arange(m)
    rows = (Ri * m)[:, None, None] + a[None, :, None] + np.zeros((1, 1, m), dtype=np.int64)
    cols = (Ci * m)[:, None, None] + a[None, None, :] + np.zeros((1, m, 1), dtype=np.int64)
    return rows.ravel(), cols.ravel(), blocks[Ri, ti].ravel()


def validate_shape(kind: MatrixKind, n: int, m: int, s: int, r: int,
                   corner_shape: Optional[Tuple[int, int]] = None,
                   lower_shape: Optional[Tuple[int, int]] = None) -> None:
    """Check the kind invariants that do not depend on stored values."""
    if n <= 0 or m <= 0:
        raise DimensionMismatch(f"n={n} and m={m} must be positive")
    if n % m != 0:
        raise DimensionMismatch(f"n={n} is not a multiple of block size m={m}")
    if kind == MatrixKind.BANDED and m != 1:
        raise DimensionMismatch(f"banded matrices are scalar (m=1), got m={m}")
    if s < 0 or r < 0:
        raise InvalidBandwidth(f"bandwidths must be non-negative, got s={s}, r={r}")
    nblk = n // m
    if s + r + 1 > nblk:
        raise InvalidBandwidth(f"s + r + 1 = {s + r + 1} exceeds {nblk} (block) rows")
    if kind == MatrixKind.BLOCK_TRIDIAGONAL and (s, r) != (1, 1):
        raise InvalidBandwidth(f"block tridiagonal needs s=r=1, got s={s}, r={r}")
    if kind in (MatrixKind.ABD, MatrixKind.BABD) and (s, r) != (1, 0):
        raise InvalidBandwidth(f"{kind.value} needs s=1, r=0 in block units, got s={s}, r={r}")

    has_corner = corner_shape is not None or lower_shape is not None
    if has_corner and kind not in CORNER_KINDS:
        raise CornerForbidden(f"{kind.value} matrices carry no corner block")
    if kind == MatrixKind.BABD and not has_corner:
        raise DimensionMismatch("babd matrices need a corner block")
    if kind == MatrixKind.CIRCULANT_LIKE and not has_corner:
        raise DimensionMismatch("circulant-like matrices need at least one corner block")
    for label, shape in (("corner", corner_shape), ("lower corner", lower_shape)):
        if shape is None:
            continue
        rows, cols = shape
        if not (1 <= rows <= n and 1 <= cols <= n):
            raise DimensionMismatch(f"{label} shape {shape} does not fit n={n}")

    # corners must sit strictly outside the band, on their own side of it
    if corner_shape is not None:
        cr, cc = corner_shape
        last_band_col = min(n - 1, ((cr - 1) // m + r + 1) * m - 1)
        if last_band_col >= n - cc:
            raise DimensionMismatch(f"corner {corner_shape} overlaps the band")
    if lower_shape is not None:
        lr, lc = lower_shape
        first_band_col = max(0, ((n - lr) // m - s) * m)
        if first_band_col < lc:
            raise DimensionMismatch(f"lower corner {lower_shape} overlaps the band")


def layout_length(kind: MatrixKind, n: int, m: int, s: int, r: int) -> int:
    """Number of stored band reals in the flat layout (corners excluded)."""
    nblk = n // m
    count = 0
    for d in range(-s, r + 1):
        count += nblk - abs(d)
    return count * m * m


def _unpack(kind: MatrixKind, n: int, m: int, s: int, r: int, data: np.ndarray) -> np.ndarray:
    nblk = n // m
    blocks = np.zeros((nblk, s + r + 1, m, m))
    if kind == MatrixKind.BANDED:
        pos = 0
        for d in range(-s, r + 1):
            rows = np.arange(max(0, -d), min(n, n - d))
            blocks[rows, d + s, 0, 0] = data[pos:pos + rows.size]
            pos += rows.size
        return blocks
    pos = 0
    for R in range(nblk):
        lo, hi = max(0, R - s), min(nblk - 1, R + r)
        for C in range(lo, hi + 1):
            blocks[R, C - R + s] = data[pos:pos + m * m].reshape(m, m)
            pos += m * m
    return blocks


def pack(A: StructuredMatrix) -> np.ndarray:
    """Flat band layout of ``A`` (inverse of the layout read by :func:`make`)."""
    n, m, s, r = A.n, A.m, A.s, A.r
    if A.kind == MatrixKind.BANDED:
        parts = []
        for d in range(-s, r + 1):
            rows = np.arange(max(0, -d), min(n, n - d))
            parts.append(A.blocks[rows, d + s, 0, 0])
        return np.concatenate(parts)
    parts = []
    nblk = A.nblk
    for R in range(nblk):
        lo, hi = max(0, R - s), min(nblk - 1, R + r)
        parts.append(A.blocks[R, lo - R + s:hi - R + s + 1].ravel())
    return np.concatenate(parts)


def make(kind, n: int, m: int, s: int, r: int, data: Sequence[float],
         corner=None, lower_corner=None, meta: Optional[Dict[str, str]] = None) -> StructuredMatrix:
    """
    Build a validated StructuredMatrix from its flat band layout.

    Args:
        kind: MatrixKind or its string token.
        n, m, s, r: dimension, block size, lower/upper (block) bandwidths.
        data: band reals, band-major (banded) or block-row-major (block kinds).
        corner: optional upper-right corner block (BABD / circulant-like).
        lower_corner: optional lower-left corner block (circulant-like before permutation).

    Returns:
        StructuredMatrix with read-only storage.
    """
    kind = kind if isinstance(kind, MatrixKind) else MatrixKind.parse(str(kind))
    corner_arr = None if corner is None else np.array(corner, dtype=np.float64, ndmin=2)
    lower_arr = None if lower_corner is None else np.array(lower_corner, dtype=np.float64, ndmin=2)
    validate_shape(kind, n, m, s, r,
                   None if corner_arr is None else corner_arr.shape,
                   None if lower_arr is None else lower_arr.shape)

    flat = np.asarray(data, dtype=np.float64).ravel()
    expected = layout_length(kind, n, m, s, r)
    if flat.size != expected:
        raise DimensionMismatch(f"expected {expected} band entries for {kind.value} "
                                f"n={n} m={m} s={s} r={r}, got {flat.size}")
    return from_blocks(kind, n, m, s, r, _unpack(kind, n, m, s, r, flat),
                       corner_arr, lower_arr, meta, validated=True)


def from_blocks(kind: MatrixKind, n: int, m: int, s: int, r: int, blocks: np.ndarray,
                corner: Optional[np.ndarray] = None, lower_corner: Optional[np.ndarray] = None,
                meta: Optional[Dict[str, str]] = None, validated: bool = False) -> StructuredMatrix:
    """Wrap an already padded block band; out-of-range slots are zeroed."""
    if not validated:
        validate_shape(kind, n, m, s, r,
                       None if corner is None else corner.shape,
                       None if lower_corner is None else lower_corner.shape)
    nblk = n // m
    blocks = np.array(blocks, dtype=np.float64, copy=True)
    corner = None if corner is None else np.array(corner, dtype=np.float64, copy=True)
    lower_corner = None if lower_corner is None else np.array(lower_corner, dtype=np.float64, copy=True)
    if blocks.shape != (nblk, s + r + 1, m, m):
        raise DimensionMismatch(f"block storage shape {blocks.shape} != {(nblk, s + r + 1, m, m)}")
    C = np.arange(nblk)[:, None] - s + np.arange(s + r + 1)[None, :]
    blocks[(C < 0) | (C >= nblk)] = 0.0
    for arr in (blocks, corner, lower_corner):
        if arr is not None:
            arr.setflags(write=False)
    return StructuredMatrix(kind, n, m, s, r, blocks, corner, lower_corner, dict(meta or {}))


def to_dense(A: StructuredMatrix, limit: Optional[int] = None) -> np.ndarray:
    """Dense image of ``A``; zeros outside the structure."""
    limit = default_dense_limit() if limit is None else limit
    if A.n > limit:
        raise TooLargeForDense(f"n={A.n} exceeds dense limit {limit}")
    dense = np.zeros((A.n, A.n))
    rows, cols, vals = A.entries()
    dense[rows, cols] = vals
    return dense


def matvec(A: StructuredMatrix, x) -> np.ndarray:
    """
    Product ``A @ x`` summed left to right across each row's stored entries.

    The order is: lower-left corner columns, band slots by increasing block
    column (and column within the block), upper-right corner columns.
    """
    x = np.asarray(x, dtype=np.float64)
    if x.ndim != 1 or x.shape[0] != A.n:
        raise DimensionMismatch(f"vector of shape {x.shape} for n={A.n}")
    n, m, s, nblk = A.n, A.m, A.s, A.nblk
    acc = np.zeros(n)

    if A.lower_corner is not None:
        lr, lc = A.lower_corner.shape
        for c in range(lc):
            acc[n - lr:] = acc[n - lr:] + A.lower_corner[:, c] * x[c]

    acc_blk = acc.reshape(nblk, m)
    x_blk = x.reshape(nblk, m)
    for t in range(A.width):
        d = t - s
        lo, hi = max(0, -d), min(nblk, nblk - d)
        if lo >= hi:
            continue
        rows = slice(lo, hi)
        cols = slice(lo + d, hi + d)
        for b in range(m):
            acc_blk[rows] = acc_blk[rows] + A.blocks[rows, t, :, b] * x_blk[cols, b][:, None]

    if A.corner is not None:
        cr, cc = A.corner.shape
        for c in range(cc):
            acc[:cr] = acc[:cr] + A.corner[:, c] * x[n - cc + c]
    return acc
