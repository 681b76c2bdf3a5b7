import logging
from dataclasses import dataclass
from typing import List, Optional, Tuple

from ..shared.errors import InvalidParameter, TooManyPartitions, UnsupportedKind, UnsupportedStructure
from ..structmat.matrix import MatrixKind, StructuredMatrix

logger = logging.getLogger(__name__)


def separator_size(A: StructuredMatrix) -> int:
    """Size of every separator a^(i) in block units for the kind of ``A``."""
    if A.kind == MatrixKind.BLOCK_TRIDIAGONAL:
        return 1
    if A.kind in (MatrixKind.ABD, MatrixKind.BABD):
        return 1
    if A.kind in (MatrixKind.BANDED, MatrixKind.CIRCULANT_LIKE):
        return max(1, A.s, A.r)
    raise UnsupportedKind(f"no partition rule for kind {A.kind.value}")


@dataclass(frozen=True)
class PartitionPlan:
    """
    p-way split of a structured matrix into bodies A^(i) and separators a^(j).

    All indices are 0-based block indices; each separator spans
    ``separator_size`` blocks. Without a corner the separators are
    a^(1..p-1) and separator j follows body j. With a corner there are p+1
    separators a^(0..p): a^(0) leads, a^(p) closes the matrix.
    """

    kind: MatrixKind
    n: int
    m: int
    p: int
    separator_size: int
    body_ranges: Tuple[Tuple[int, int], ...]
    separator_indices: Tuple[int, ...]
    has_corner: bool = False
    corner_shape: Optional[Tuple[int, int]] = None
    lower_corner_shape: Optional[Tuple[int, int]] = None

    @property
    def sep_rows(self) -> int:
        """Scalar rows per separator."""
        return self.separator_size * self.m

    @property
    def num_separators(self) -> int:
        return len(self.separator_indices)

    def body_rows(self, i: int) -> Tuple[int, int]:
        start, stop = self.body_ranges[i - 1]
        return start * self.m, stop * self.m

    def separator_rows(self, j: int) -> Tuple[int, int]:
        """Scalar rows of a^(j); j is 0-based in the corner case, 1-based otherwise."""
        start = self.separator_indices[self.separator_slot(j)]
        return start * self.m, (start + self.separator_size) * self.m

    def separator_key(self, j: int) -> int:
        return self.separator_rows(j)[0]

    def left_separator(self, i: int) -> Optional[int]:
        if self.has_corner:
            return i - 1
        return i - 1 if i > 1 else None

    def right_separator(self, i: int) -> Optional[int]:
        if self.has_corner:
            return i
        return i if i < self.p else None

    def separator_labels(self) -> List[int]:
        return list(range(0, self.p + 1)) if self.has_corner else list(range(1, self.p))

    def separator_slot(self, j: int) -> int:
        return j if self.has_corner else j - 1

    def tiles(self) -> List[Tuple[str, int, int]]:
        """Bodies and separators as ordered (label, start, stop) block ranges."""
        out = []
        for j in self.separator_labels():
            start = self.separator_indices[self.separator_slot(j)]
            out.append((f"a{j}", start, start + self.separator_size))
        for i, (start, stop) in enumerate(self.body_ranges, start=1):
            out.append((f"A{i}", start, stop))
        return sorted(out, key=lambda t: t[1])

    def describe(self) -> str:
        lines = [f"PLAN kind={self.kind.value} n={self.n} m={self.m} p={self.p} "
                 f"separator_size={self.separator_size} separators={self.num_separators} "
                 f"corner={_shape_token(self.corner_shape)}"]
        if self.lower_corner_shape:
            lines[0] += f" lower_corner={_shape_token(self.lower_corner_shape)}"
        for label, start, stop in self.tiles():
            # 1-based inclusive scalar rows
            lines.append(f"{label} rows {start * self.m + 1}-{stop * self.m}")
        return "\n".join(lines)


def _shape_token(shape: Optional[Tuple[int, int]]) -> str:
    return "x".join(map(str, shape)) if shape else "none"


def corners_fit(A: StructuredMatrix) -> bool:
    """True when every corner block fits inside one separator block."""
    K = separator_size(A) * A.m
    return all(shape[0] <= K and shape[1] <= K
               for shape in (A.corner_shape, A.lower_corner_shape) if shape is not None)


def plan_partition(A: StructuredMatrix, p: int) -> PartitionPlan:
    """
    Split ``A`` into p bodies with the smallest separators its kind allows.

    Body sizes differ by at most one block; the leading partitions take the
    remainder. Every body keeps at least ``separator_size`` blocks so a
    separator only couples to its two neighbouring bodies. A matrix with any
    corner gets a leading separator a^(0) and a closing one a^(p); the
    upper-right corner couples a^(0) to a^(p), the lower-left one a^(p) to
    a^(0).
    """
    if p < 1:
        raise InvalidParameter(f"partition count must be >= 1, got {p}")
    k = separator_size(A)
    has_corner = A.has_corner
    nsep = p + 1 if has_corner else p - 1
    body_total = A.nblk - nsep * k
    if body_total < p * k:
        raise TooManyPartitions(
            f"p={p} needs at least {(p + nsep) * k} block rows, matrix has {A.nblk}")
    if has_corner and not corners_fit(A):
        raise UnsupportedStructure(
            f"corners {_shape_token(A.corner_shape)} / {_shape_token(A.lower_corner_shape)} "
            f"do not fit a {k * A.m}x{k * A.m} separator block")

    base, rem = divmod(body_total, p)
    sizes = [base + (1 if i < rem else 0) for i in range(p)]

    bodies, seps = [], []
    pos = 0
    if has_corner:
        seps.append(pos)
        pos += k
    for i, size in enumerate(sizes):
        bodies.append((pos, pos + size))
        pos += size
        if has_corner or i < p - 1:
            seps.append(pos)
            pos += k

    plan = PartitionPlan(
        kind=A.kind, n=A.n, m=A.m, p=p, separator_size=k,
        body_ranges=tuple(bodies), separator_indices=tuple(seps),
        has_corner=has_corner, corner_shape=A.corner_shape,
        lower_corner_shape=A.lower_corner_shape,
    )
    logger.debug(f"plan: p={p} k={k} bodies={sizes} separators={len(seps)}")
    return plan
