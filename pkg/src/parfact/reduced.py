"""
Reduced separator system T_p.

Blocks are addressed by position in the sorted separator-key order. The usual
shapes are block tridiagonal (no corner) and block tridiagonal plus corner
blocks coupling the first and last separators; other couplings further apart
are kept in ``far`` and widen the elimination window.
"""

import logging
from dataclasses import dataclass, field
from typing import Dict, Iterable, List, Optional, Sequence, Tuple

import numpy as np

from ..shared.errors import DimensionMismatch, SingularReducedSystem

logger = logging.getLogger(__name__)

Contribution = Tuple[int, int, np.ndarray]


@dataclass
class OpCounter:
    """Multiply-add count of the sequential reduced solve."""

    flops: int = 0

    def add(self, n: int) -> None:
        self.flops += int(n)


@dataclass
class ReducedSystem:
    q: int
    K: int
    keys: List[int]
    diag: np.ndarray
    sub: np.ndarray
    sup: np.ndarray
    corner: Optional[np.ndarray] = None
    lower_corner: Optional[np.ndarray] = None
    far: Dict[Tuple[int, int], np.ndarray] = field(default_factory=dict)

    @property
    def positions(self) -> Dict[int, int]:
        return {key: t for t, key in enumerate(self.keys)}

    @property
    def order(self) -> int:
        return self.q * self.K

    @property
    def bandwidth(self) -> int:
        """Block distance of the farthest coupling outside the corner."""
        bw = 1
        for i, j in self.far:
            bw = max(bw, abs(i - j))
        return bw

    def to_dense(self) -> np.ndarray:
        K = self.K
        T = np.zeros((self.order, self.order))
        for t in range(self.q):
            T[t * K:(t + 1) * K, t * K:(t + 1) * K] = self.diag[t]
        for t in range(self.q - 1):
            T[(t + 1) * K:(t + 2) * K, t * K:(t + 1) * K] = self.sub[t]
            T[t * K:(t + 1) * K, (t + 1) * K:(t + 2) * K] = self.sup[t]
        if self.corner is not None:
            T[:K, (self.q - 1) * K:] += self.corner
        if self.lower_corner is not None:
            T[(self.q - 1) * K:, :K] += self.lower_corner
        for (i, j), block in self.far.items():
            T[i * K:(i + 1) * K, j * K:(j + 1) * K] += block
        return T

    def matvec(self, x: np.ndarray) -> np.ndarray:
        return self.to_dense() @ x


def assemble_reduced(keys: Iterable[int], K: int, contributions: Sequence[Contribution],
                     corner: Optional[np.ndarray] = None,
                     lower_corner: Optional[np.ndarray] = None) -> ReducedSystem:
    """
    Sum (row key, column key, block) contributions into T_p.

    Contributions are added in the order given. ``corner`` couples the first
    separator to the last one and ``lower_corner`` the last to the first; with
    at most two separators they land in the tridiagonal band.
    """
    keys = sorted(set(keys))
    q = len(keys)
    pos = {key: t for t, key in enumerate(keys)}
    diag = np.zeros((q, K, K))
    sub = np.zeros((max(q - 1, 0), K, K))
    sup = np.zeros((max(q - 1, 0), K, K))
    far: Dict[Tuple[int, int], np.ndarray] = {}

    def place(i: int, j: int, block: np.ndarray) -> None:
        if i == j:
            diag[i] += block
        elif i == j + 1:
            sub[j] += block
        elif j == i + 1:
            sup[i] += block
        elif np.any(block):
            far.setdefault((i, j), np.zeros((K, K)))
            far[(i, j)] += block

    for rk, ck, block in contributions:
        if block.shape != (K, K):
            raise DimensionMismatch(f"separator block {block.shape} at ({rk}, {ck}), expected {(K, K)}")
        place(pos[rk], pos[ck], block)

    stored_corner = stored_lower = None
    if corner is not None and q:
        if q - 1 <= 1:
            place(0, q - 1, corner)
        else:
            stored_corner = np.array(corner)
    if lower_corner is not None and q:
        if q - 1 <= 1:
            place(q - 1, 0, lower_corner)
        else:
            stored_lower = np.array(lower_corner)

    if far:
        logger.warning(f"⚠️ reduced system has {len(far)} coupling(s) beyond the block tridiagonal band")
    return ReducedSystem(q=q, K=K, keys=keys, diag=diag, sub=sub, sup=sup, corner=stored_corner,
                         lower_corner=stored_lower, far=far)


def solve_reduced(R: ReducedSystem, rhs, counter: Optional[OpCounter] = None) -> np.ndarray:
    """
    Gaussian elimination with partial pivoting restricted to the band of T_p.

    Pivot rows are searched among the current and next ``bandwidth`` block
    rows, plus the last block row when a lower-left corner is stored; updates
    touch columns up to ``2 * bandwidth`` blocks ahead plus the last block
    column when either corner is stored, widened to the last ``bandwidth + 1``
    block columns when a swapped-in last row may carry its own band. The
    operation count depends on q, K and the structure only.
    """
    n, K = R.order, R.K
    b = np.array(rhs, dtype=np.float64)
    if b.shape[0] != n:
        raise DimensionMismatch(f"rhs of length {b.shape[0]} for a reduced system of order {n}")
    if n == 0:
        return b
    counter = counter if counter is not None else OpCounter()

    T = R.to_dense()
    bw = R.bandwidth
    scale = float(np.max(np.abs(T))) if T.size else 0.0
    tiny = np.finfo(np.float64).eps * max(scale, np.finfo(np.float64).tiny) * n
    last = (R.q - 1) * K
    bordered = R.lower_corner is not None
    wrapped = bordered or R.corner is not None
    tail = last - bw * K if bordered else last

    def col_window(c: int) -> np.ndarray:
        hi = min(n, (c // K + 2 * bw + 1) * K)
        cols = np.arange(c, hi)
        if not wrapped or hi >= n:
            return cols
        return np.concatenate([cols, np.arange(max(hi, tail), n)])

    def row_window(c: int) -> np.ndarray:
        hi = min(n, (c // K + bw + 1) * K)
        rows = np.arange(c, hi)
        if not bordered or hi >= n:
            return rows
        return np.concatenate([rows, np.arange(max(hi, last), n)])

    for c in range(n):
        cand = row_window(c)
        piv = int(cand[np.argmax(np.abs(T[cand, c]))])
        if abs(T[piv, c]) <= tiny:
            raise SingularReducedSystem(f"pivot {T[piv, c]:.3e} in column {c} of the reduced system")
        if piv != c:
            T[[c, piv]] = T[[piv, c]]
            b[[c, piv]] = b[[piv, c]]
        cols = col_window(c)
        rows = cand[1:]
        if rows.size:
            lmul = T[rows, c] / T[c, c]
            T[np.ix_(rows, cols)] -= np.outer(lmul, T[c, cols])
            b[rows] -= lmul * b[c]
            counter.add(rows.size * (cols.size + 1))

    x = np.zeros(n)
    for c in range(n - 1, -1, -1):
        cols = col_window(c)[1:]
        x[c] = (b[c] - T[c, cols] @ x[cols]) / T[c, c]
        counter.add(cols.size + 1)
    return x
