from dataclasses import dataclass
from typing import Optional, Tuple

import numpy as np

from ..shared.errors import IndexOutOfRange
from ..structmat.matrix import StructuredMatrix
from .plan import PartitionPlan


@dataclass(frozen=True)
class PartitionBlock:
    """
    Sub-matrix M^(i) handled by processor i.

    Couplings are stored at full body height or width: ``b0`` and ``c1`` are
    body rows x separator columns, ``c0`` and ``b1`` are body columns x
    separator rows (so ``c0.T`` and ``b1.T`` are the separator rows of M^(i)).
    A missing separator gives zero-width couplings. Every partition owns the
    diagonal block of its left separator (``top_left``); ``bottom_right`` is
    zero except for the closing separator a^(p) of a cornered matrix, which
    partition p owns.
    """

    index: int
    source: StructuredMatrix
    body_blocks: Tuple[int, int]
    left_key: Optional[int]
    right_key: Optional[int]
    b0: np.ndarray
    c0: np.ndarray
    b1: np.ndarray
    c1: np.ndarray
    a_left: np.ndarray
    a_right: np.ndarray
    top_left: np.ndarray
    bottom_right: np.ndarray
    dir_lr: np.ndarray
    dir_rl: np.ndarray
    sep_rows: int
    corner_slice: Optional[np.ndarray] = None
    lower_corner_slice: Optional[np.ndarray] = None

    @property
    def m(self) -> int:
        return self.source.m

    @property
    def row_range(self) -> Tuple[int, int]:
        return self.body_blocks[0] * self.m, self.body_blocks[1] * self.m

    @property
    def nb(self) -> int:
        return (self.body_blocks[1] - self.body_blocks[0]) * self.m

    @property
    def k0(self) -> int:
        return self.b0.shape[1]

    @property
    def k1(self) -> int:
        return self.c1.shape[1]

    def body_band(self):
        return self.source.scalar_band(*self.body_blocks)

    def body_dense(self) -> np.ndarray:
        r0, r1 = self.body_blocks
        return self.source.block_window(r0, r1, r0, r1)

    @property
    def A_i(self) -> np.ndarray:
        return self.body_dense()

    def body_tridiagonal(self):
        """Block tridiagonal view (lower, diag, upper) of the body, couplings excluded."""
        A = self.source
        r0, r1 = self.body_blocks
        nb_blk, m = r1 - r0, A.m
        diag = np.array(A.blocks[r0:r1, A.s])
        lower = np.zeros((nb_blk, m, m))
        upper = np.zeros((nb_blk, m, m))
        if A.s >= 1 and nb_blk > 1:
            lower[1:] = A.blocks[r0 + 1:r1, A.s - 1]
        if A.r >= 1 and nb_blk > 1:
            upper[:-1] = A.blocks[r0:r1 - 1, A.s + 1]
        return lower, diag, upper

    def assemble(self) -> np.ndarray:
        """Dense M^(i) ordered [left separator, body, right separator]."""
        return np.block([
            [self.top_left, self.c0.T, self.dir_lr],
            [self.b0, self.body_dense(), self.c1],
            [self.dir_rl, self.b1.T, self.bottom_right],
        ])


def corner_block(A: StructuredMatrix, plan: PartitionPlan) -> np.ndarray:
    """Upper-right corner padded to a separator block (rows of a^(0), columns of a^(p))."""
    K = plan.sep_rows
    padded = np.zeros((K, K))
    if A.corner is not None:
        cr, cc = A.corner.shape
        padded[:cr, K - cc:] = A.corner
    return padded


def lower_corner_block(A: StructuredMatrix, plan: PartitionPlan) -> np.ndarray:
    """Lower-left corner padded to a separator block (rows of a^(p), columns of a^(0))."""
    K = plan.sep_rows
    padded = np.zeros((K, K))
    if A.lower_corner is not None:
        lr, lc = A.lower_corner.shape
        padded[K - lr:, :lc] = A.lower_corner
    return padded


def extract_block(A: StructuredMatrix, plan: PartitionPlan, i: int) -> PartitionBlock:
    """Couplings and separator blocks of partition ``i`` (1-based)."""
    if not 1 <= i <= plan.p:
        raise IndexOutOfRange(f"partition index {i} outside 1..{plan.p}")
    k, m = plan.separator_size, plan.m
    r0, r1 = plan.body_ranges[i - 1]
    nb = (r1 - r0) * m

    left, right = plan.left_separator(i), plan.right_separator(i)
    lblk = None if left is None else plan.separator_indices[plan.separator_slot(left)]
    rblk = None if right is None else plan.separator_indices[plan.separator_slot(right)]

    def window(rows, cols):
        if rows is None or cols is None:
            nr = 0 if rows is None else (rows[1] - rows[0]) * m
            nc = 0 if cols is None else (cols[1] - cols[0]) * m
            return np.zeros((nr, nc))
        return A.block_window(rows[0], rows[1], cols[0], cols[1])

    body = (r0, r1)
    L = None if lblk is None else (lblk, lblk + k)
    R = None if rblk is None else (rblk, rblk + k)

    a_left, a_right = window(L, L), window(R, R)
    dir_lr, dir_rl = window(L, R), window(R, L)
    corner_slice = lower_slice = None
    if plan.has_corner and plan.p == 1:
        # a^(0) and a^(1) are the only separators: the corners couple them directly
        dir_lr = dir_lr + corner_block(A, plan)
        dir_rl = dir_rl + lower_corner_block(A, plan)
    elif plan.has_corner:
        if i == 1 and A.corner is not None:
            corner_slice = corner_block(A, plan)
        if i == plan.p and A.lower_corner is not None:
            lower_slice = lower_corner_block(A, plan)
    owns_right = plan.has_corner and i == plan.p

    return PartitionBlock(
        index=i,
        source=A,
        body_blocks=body,
        left_key=None if L is None else L[0] * m,
        right_key=None if R is None else R[0] * m,
        b0=window(body, L),
        c0=window(L, body).T if L is not None else np.zeros((nb, 0)),
        b1=window(R, body).T if R is not None else np.zeros((nb, 0)),
        c1=window(body, R),
        a_left=a_left,
        a_right=a_right,
        top_left=a_left,
        bottom_right=a_right if owns_right else np.zeros_like(a_right),
        dir_lr=dir_lr,
        dir_rl=dir_rl,
        sep_rows=k * m,
        corner_slice=corner_slice,
        lower_corner_slice=lower_slice,
    )
