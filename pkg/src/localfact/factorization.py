"""
Per-partition factorizations in bordered form

    M^(i) = [I  w^T 0]   [a1 0 g ]   [I 0 0]
            [0  N   0] . [0  I 0 ] . [z S y]
            [0  v^T I]   [b  0 a2]   [0 0 I]

with z = N^-1 b0, y = N^-1 c1, v = S^-T b1, w = S^-T c0 and

    a1 = top_left     - w^T z      g  = dir_lr - w^T y
    b  = dir_rl       - v^T z      a2 = bottom_right - v^T y

Partition i owns the diagonal block of its left separator, so a1 carries
that block and a2 only the Schur correction (plus the closing separator
of a cornered matrix in partition p). The two sum to the reduced diagonal.

Adaptive strategies cut the body into segments at deferred chunks; every
segment is factored in the same bordered form and each deferred chunk becomes
an extra separator of the reduced system.
"""

import logging
from dataclasses import dataclass, field
from enum import Enum
from typing import Dict, List, Optional, Tuple

import numpy as np

from ..partition.blocks import PartitionBlock
from ..shared.config import SolverConfig
from ..shared.errors import ExhaustedBody, InvalidParameter, TooLargeForDense, UnsupportedKind, UnsupportedStructure
from ..structmat.matrix import MatrixKind
from .solvers import AlternateRowColumn, BandLU, BandLUD, CyclicReduction, HouseholderQR, PivotedLU

logger = logging.getLogger(__name__)

DEFAULT_PIVOT_TOL = 1e-8


class Strategy(str, Enum):
    LU = "lu"
    LUD = "lud"
    CR = "cr"
    ARCE = "arce"
    LU_PIVOT = "lupivot"
    QR = "qr"

    @classmethod
    def parse(cls, token: str) -> "Strategy":
        key = token.lower().replace("_", "").replace("-", "")
        aliases = {"cyclicreduction": "cr", "luppivot": "lupivot", "pivot": "lupivot"}
        try:
            return cls(aliases.get(key, key))
        except ValueError:
            raise UnsupportedKind(f"unknown strategy {token!r}") from None

    @property
    def adaptive(self) -> bool:
        return self in (Strategy.LU_PIVOT, Strategy.QR)


def _apply(fn, B: np.ndarray, rows: int) -> np.ndarray:
    """fn(B), skipping the call for zero-width couplings."""
    if B.shape[1] == 0:
        return np.zeros((rows, 0))
    return fn(B)


@dataclass
class Segment:
    """One bordered piece of a body: left separator, rows, right separator."""

    rows: Tuple[int, int]
    left_key: Optional[int]
    right_key: Optional[int]
    solver: Optional[object]
    b0: np.ndarray
    c0: np.ndarray
    b1: np.ndarray
    c1: np.ndarray
    top_left: np.ndarray
    bottom_right: np.ndarray
    dir_lr: np.ndarray
    dir_rl: np.ndarray
    z: Optional[np.ndarray] = None
    y: Optional[np.ndarray] = None
    v: Optional[np.ndarray] = None
    w: Optional[np.ndarray] = None
    alpha1: Optional[np.ndarray] = None
    alpha2: Optional[np.ndarray] = None
    beta: Optional[np.ndarray] = None
    gamma: Optional[np.ndarray] = None

    @property
    def nb(self) -> int:
        return self.rows[1] - self.rows[0]

    def solve_body(self, b):
        return self.solver.apply_s_inv(self.solver.apply_n_inv(b))

    def identify(self) -> None:
        """Compute fill-in vectors and separator contributions."""
        if self.nb == 0:
            self.alpha1, self.gamma = self.top_left.copy(), self.dir_lr.copy()
            self.beta, self.alpha2 = self.dir_rl.copy(), self.bottom_right.copy()
            return
        nb = self.nb
        if self.solver.stores_fill:
            self.z = _apply(self.solver.apply_n_inv, self.b0, nb)
            self.y = _apply(self.solver.apply_n_inv, self.c1, nb)
            self.v = _apply(self.solver.apply_s_inv_t, self.b1, nb)
            self.w = _apply(self.solver.apply_s_inv_t, self.c0, nb)
            self.alpha1 = self.top_left - self.w.T @ self.z
            self.gamma = self.dir_lr - self.w.T @ self.y
            self.beta = self.dir_rl - self.v.T @ self.z
            self.alpha2 = self.bottom_right - self.v.T @ self.y
        else:
            # w^T z = c0^T A^-1 b0 etc.; no fill-in vectors are kept
            x0 = _apply(self.solve_body, self.b0, nb)
            x1 = _apply(self.solve_body, self.c1, nb)
            self.alpha1 = self.top_left - self.c0.T @ x0
            self.gamma = self.dir_lr - self.c0.T @ x1
            self.beta = self.dir_rl - self.b1.T @ x0
            self.alpha2 = self.bottom_right - self.b1.T @ x1

    def contributions(self) -> List[Tuple[int, int, np.ndarray]]:
        out = []
        L, R = self.left_key, self.right_key
        if L is not None:
            out.append((L, L, self.alpha1))
        if L is not None and R is not None:
            out.append((L, R, self.gamma))
            out.append((R, L, self.beta))
        if R is not None:
            out.append((R, R, self.alpha2))
        return out


@dataclass(frozen=True)
class ExtraSeparator:
    """A deferred chunk promoted to the reduced system."""

    position: int
    alpha: np.ndarray
    beta: Optional[np.ndarray]
    gamma: Optional[np.ndarray]
    sigma_min: float


@dataclass
class LocalFactorization:
    """Factors and separator contributions of one partition."""

    strategy: Strategy
    index: int
    row_range: Tuple[int, int]
    left_key: Optional[int]
    right_key: Optional[int]
    segments: List[Segment]
    extra_separators: List[ExtraSeparator] = field(default_factory=list)
    perms: Dict[str, object] = field(default_factory=dict)
    direct: List[Tuple[int, int, np.ndarray]] = field(default_factory=list)

    @property
    def nb(self) -> int:
        return self.row_range[1] - self.row_range[0]

    @property
    def N_repr(self):
        return self.segments[0].solver

    @property
    def S_repr(self):
        return self.segments[0].solver

    @property
    def z(self):
        return self.segments[0].z

    @property
    def w(self):
        return self.segments[0].w

    @property
    def y(self):
        return self.segments[-1].y

    @property
    def v(self):
        return self.segments[-1].v

    @property
    def alpha1(self):
        return self.segments[0].alpha1

    @property
    def gamma(self):
        return self.segments[0].gamma

    @property
    def beta(self):
        return self.segments[-1].beta

    @property
    def alpha2(self):
        return self.segments[-1].alpha2

    def separator_keys(self) -> List[int]:
        keys = set()
        for seg in self.segments:
            keys.update(k for k in (seg.left_key, seg.right_key) if k is not None)
        return sorted(keys)

    def contributions(self) -> List[Tuple[int, int, np.ndarray]]:
        """(row key, column key, block) entries this partition adds to T_p, in fixed order."""
        out = []
        for seg in self.segments:
            out.extend(seg.contributions())
        out.extend(self.direct)
        return out

    def dense_pieces(self) -> List[Dict[str, np.ndarray]]:
        """Dense N, S, z, y, v, w per segment (oracle use)."""
        pieces = []
        for seg in self.segments:
            if seg.nb == 0:
                pieces.append({})
                continue
            N, S = seg.solver.dense_n(), seg.solver.dense_s()
            pieces.append({
                "N": N,
                "S": S,
                "z": _apply(lambda B: np.linalg.solve(N, B), seg.b0, seg.nb),
                "y": _apply(lambda B: np.linalg.solve(N, B), seg.c1, seg.nb),
                "v": _apply(lambda B: np.linalg.solve(S.T, B), seg.b1, seg.nb),
                "w": _apply(lambda B: np.linalg.solve(S.T, B), seg.c0, seg.nb),
            })
        return pieces


def _single_segment(pb: PartitionBlock, solver) -> Segment:
    seg = Segment(
        rows=pb.row_range, left_key=pb.left_key, right_key=pb.right_key, solver=solver,
        b0=pb.b0, c0=pb.c0, b1=pb.b1, c1=pb.c1, top_left=pb.top_left, bottom_right=pb.bottom_right,
        dir_lr=pb.dir_lr, dir_rl=pb.dir_rl,
    )
    seg.identify()
    return seg


def _wrap(strategy: Strategy, pb: PartitionBlock, solver, perms=None) -> LocalFactorization:
    return LocalFactorization(
        strategy=strategy, index=pb.index, row_range=pb.row_range,
        left_key=pb.left_key, right_key=pb.right_key,
        segments=[_single_segment(pb, solver)], perms=perms or {},
    )


def factor_lu(pb: PartitionBlock) -> LocalFactorization:
    """Banded LU without pivoting: N = L, S = U."""
    ab, lw, uw = pb.body_band()
    return _wrap(Strategy.LU, pb, BandLU(ab, lw, uw))


def factor_lud(pb: PartitionBlock) -> LocalFactorization:
    """LUD split: N = L U1, S = D diagonal."""
    ab, lw, uw = pb.body_band()
    return _wrap(Strategy.LUD, pb, BandLUD(ab, lw, uw))


def factor_cyclic_reduction(pb: PartitionBlock) -> LocalFactorization:
    A = pb.source
    if A.s > 1 or A.r > 1:
        raise UnsupportedStructure(
            f"cyclic reduction needs a (block) tridiagonal body, got s={A.s}, r={A.r}")
    lower, diag, upper = pb.body_tridiagonal()
    solver = CyclicReduction(lower, diag, upper)
    return _wrap(Strategy.CR, pb, solver, {"levels": solver.num_levels})


def factor_arce(pb: PartitionBlock) -> LocalFactorization:
    A = pb.source
    if A.kind not in (MatrixKind.ABD, MatrixKind.BABD):
        raise UnsupportedKind(f"alternate row/column elimination needs abd or babd, got {A.kind.value}")
    lower, diag, _ = pb.body_tridiagonal()
    solver = AlternateRowColumn(diag, lower)
    return _wrap(Strategy.ARCE, pb, solver, {"P": solver.P, "Q": solver.Q})


def factor_lu_pivot(pb: PartitionBlock, tol: float = DEFAULT_PIVOT_TOL) -> LocalFactorization:
    """Partial-pivoting LU with deferral of ill-conditioned chunks."""
    return _adaptive(pb, tol, Strategy.LU_PIVOT, PivotedLU)


def factor_qr(pb: PartitionBlock, tol: float = DEFAULT_PIVOT_TOL) -> LocalFactorization:
    """Householder QR with deferral of rank-deficient chunks."""
    return _adaptive(pb, tol, Strategy.QR, HouseholderQR)


def scan_chunks(body: np.ndarray, ref_rows: np.ndarray, K: int, tol: float) -> List[Tuple[int, float]]:
    """
    Block Thomas sweep over K-row chunks of ``body`` without pivoting.

    A full chunk whose Schur block has smallest singular value below
    ``tol * ref`` (ref: largest absolute row sum of the chunk's rows in
    ``ref_rows``) is deferred and the sweep restarts after it. The partial
    tail chunk is never deferred. Returns (chunk index, sigma_min) pairs.
    """
    nb = body.shape[0]
    nchunks = -(-nb // K)
    deferred = []
    prev = None  # (slice, Schur block) of the previous accepted chunk
    for j in range(nchunks):
        cur = slice(j * K, min(nb, (j + 1) * K))
        S = body[cur, cur]
        if prev is not None:
            pslice, Sp = prev
            S = S - body[cur, pslice] @ np.linalg.solve(Sp, body[pslice, cur])
        full = cur.stop - cur.start == K
        if full:
            sigma = float(np.linalg.svd(S, compute_uv=False)[-1])
            ref = float(np.max(np.sum(np.abs(ref_rows[cur]), axis=1)))
            if sigma < tol * ref:
                deferred.append((j, sigma))
                prev = None
                continue
        prev = (cur, S)
    return deferred


def _adaptive(pb: PartitionBlock, tol: float, strategy: Strategy, solver_cls) -> LocalFactorization:
    if not tol > 0:
        raise InvalidParameter(f"tol must be > 0, got {tol}")
    k0, nb, k1, K = pb.k0, pb.nb, pb.k1, pb.sep_rows
    size = k0 + nb + k1
    limit = SolverConfig().dense_limit
    if size > limit:
        raise TooLargeForDense(f"{strategy.value} factors a dense {size}x{size} block, limit {limit}")
    M = pb.assemble()
    body = M[k0:k0 + nb, k0:k0 + nb]
    deferred = scan_chunks(body, M[k0:k0 + nb], K, tol)

    full_chunks = nb // K
    if len(deferred) == full_chunks and nb % K == 0:
        raise ExhaustedBody(f"all {full_chunks} chunks of the body were deferred")

    start_row = pb.row_range[0]
    left_idx = np.arange(0, k0)
    right_idx = np.arange(k0 + nb, size)
    # separator index sets in M coordinates, with their global keys
    seps = [(pb.left_key, left_idx)]
    for j, _ in deferred:
        seps.append((start_row + j * K, np.arange(k0 + j * K, k0 + (j + 1) * K)))
    seps.append((pb.right_key, right_idx))

    def sub(r, c):
        return M[np.ix_(r, c)]

    segments = []
    for t in range(len(seps) - 1):
        (lkey, lidx), (rkey, ridx) = seps[t], seps[t + 1]
        b_lo = k0 if t == 0 else lidx[-1] + 1
        b_hi = k0 + nb if t == len(seps) - 2 else ridx[0]
        bidx = np.arange(b_lo, b_hi)
        seg = Segment(
            rows=(start_row + b_lo - k0, start_row + b_hi - k0),
            left_key=lkey if lidx.size else None,
            right_key=rkey if ridx.size else None,
            solver=solver_cls(sub(bidx, bidx)) if bidx.size else None,
            b0=sub(bidx, lidx), c0=sub(lidx, bidx).T, b1=sub(ridx, bidx).T, c1=sub(bidx, ridx),
            top_left=sub(lidx, lidx) if t == 0 else np.zeros((lidx.size, lidx.size)),
            bottom_right=sub(ridx, ridx), dir_lr=sub(lidx, ridx), dir_rl=sub(ridx, lidx),
        )
        seg.identify()
        segments.append(seg)

    extras = []
    for t, (j, sigma) in enumerate(deferred):
        before, after = segments[t], segments[t + 1]
        key = seps[t + 1][0]
        extras.append(ExtraSeparator(
            position=key,
            alpha=before.alpha2 + after.alpha1,
            beta=before.beta if before.left_key is not None else None,
            gamma=after.gamma if after.right_key is not None else None,
            sigma_min=sigma,
        ))
        logger.warning(f"⚠️ partition {pb.index}: chunk at row {key} deferred "
                       f"(sigma_min={sigma:.3e}), reduced system grows by one separator")

    direct = []
    if len(segments) > 1 and pb.k0 and pb.k1:
        direct = [(pb.left_key, pb.right_key, pb.dir_lr), (pb.right_key, pb.left_key, pb.dir_rl)]

    return LocalFactorization(
        strategy=strategy, index=pb.index, row_range=pb.row_range,
        left_key=pb.left_key, right_key=pb.right_key, segments=segments,
        extra_separators=extras, perms={"deferred_chunks": [j for j, _ in deferred]},
        direct=direct,
    )


def factor(pb: PartitionBlock, strategy, tol: float = DEFAULT_PIVOT_TOL) -> LocalFactorization:
    """Dispatch to the factorization routine of ``strategy``."""
    strategy = strategy if isinstance(strategy, Strategy) else Strategy.parse(str(strategy))
    if strategy == Strategy.LU:
        return factor_lu(pb)
    if strategy == Strategy.LUD:
        return factor_lud(pb)
    if strategy == Strategy.CR:
        return factor_cyclic_reduction(pb)
    if strategy == Strategy.ARCE:
        return factor_arce(pb)
    if strategy == Strategy.LU_PIVOT:
        return factor_lu_pivot(pb, tol)
    return factor_qr(pb, tol)
