"""
Global factorization A = F T G assembled from per-partition factors.

F and G never exist as matrices: phase 1 applies the F pieces partition by
partition, phase 2 solves the reduced system T_p on one worker, phase 3
applies the G pieces. ``dense_factors`` builds them densely for checking.
"""

import logging
import time
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Tuple

import numpy as np

from ..localfact.factorization import DEFAULT_PIVOT_TOL, LocalFactorization, Strategy, factor
from ..localfact.phases import backward_phase, forward_phase
from ..partition.blocks import corner_block, extract_block, lower_corner_block
from ..partition.permute import RowPermutation, permute_corner
from ..partition.plan import PartitionPlan, corners_fit, plan_partition
from ..shared.config import SolverConfig
from ..shared.errors import DimensionMismatch, TooLargeForDense
from ..shared.utils import map_ordered
from ..structmat.matrix import StructuredMatrix, matvec
from .reduced import OpCounter, ReducedSystem, assemble_reduced, solve_reduced

logger = logging.getLogger(__name__)


@dataclass
class SolveStats:
    """Wall-clock time per phase and the reduced-solve operation count."""

    phase_seconds: Dict[str, float] = field(default_factory=dict)
    reduced_flops: int = 0
    q: int = 0
    workers: Optional[int] = None


@dataclass
class ParallelFactorization:
    plan: PartitionPlan
    locals: List[LocalFactorization]
    reduced: ReducedSystem
    strategy: Strategy
    matrix: StructuredMatrix
    permutation: RowPermutation
    factor_seconds: float = 0.0

    @property
    def n(self) -> int:
        return self.matrix.n

    @property
    def q(self) -> int:
        return self.reduced.q

    @property
    def extra_separators(self) -> int:
        return sum(len(F.extra_separators) for F in self.locals)


def parallel_factor(A: StructuredMatrix, p: int, strategy=Strategy.LU, tol: float = DEFAULT_PIVOT_TOL,
                    workers: Optional[int] = None) -> ParallelFactorization:
    """
    Factor the p partitions of ``A`` concurrently and assemble T_p.

    Corner blocks enter T_p as couplings between the first and last
    separators. Only a lower-left corner too large for a separator block is
    rotated into the upper-right one first; the rotation is kept and applied
    to the right-hand side by ``solve``.
    """
    strategy = strategy if isinstance(strategy, Strategy) else Strategy.parse(str(strategy))
    t0 = time.perf_counter()
    perm = RowPermutation(A.n, 0)
    if A.lower_corner is not None and not corners_fit(A):
        A, perm = permute_corner(A)
        logger.info(f"🔁 rows rotated by {perm.shift} to gather the corners")

    plan = plan_partition(A, p)

    def factor_partition(i: int) -> LocalFactorization:
        return factor(extract_block(A, plan, i), strategy, tol)

    local_factors = map_ordered(factor_partition, list(range(1, p + 1)), workers)

    keys = [plan.separator_key(j) for j in plan.separator_labels()]
    contributions = []
    for F in local_factors:
        keys.extend(e.position for e in F.extra_separators)
        contributions.extend(F.contributions())
    corner = lower = None
    if plan.has_corner and p > 1:
        corner = corner_block(A, plan) if A.corner is not None else None
        lower = lower_corner_block(A, plan) if A.lower_corner is not None else None
    reduced = assemble_reduced(keys, plan.sep_rows, contributions, corner, lower)

    elapsed = time.perf_counter() - t0
    extras = sum(len(F.extra_separators) for F in local_factors)
    logger.info(f"✅ Factored n={A.n} p={p} strategy={strategy.value}: reduced order q={reduced.q} "
                f"(K={reduced.K}, {extras} extra) in {elapsed:.3f}s")
    return ParallelFactorization(plan=plan, locals=local_factors, reduced=reduced, strategy=strategy,
                                 matrix=A, permutation=perm, factor_seconds=elapsed)


def solve_with_stats(Fct: ParallelFactorization, f, workers: Optional[int] = None) -> Tuple[np.ndarray, SolveStats]:
    """Three-phase solve of A x = f, returning the per-phase statistics as well."""
    f = np.asarray(f, dtype=np.float64)
    if f.ndim != 1 or f.shape[0] != Fct.n:
        raise DimensionMismatch(f"right-hand side of shape {f.shape} for n={Fct.n}")
    fp = Fct.permutation.apply(f)
    R = Fct.reduced
    K = R.K
    stats = SolveStats(q=R.q, workers=workers)

    t0 = time.perf_counter()
    forward = map_ordered(lambda F: forward_phase(F, fp), Fct.locals, workers)
    t1 = time.perf_counter()

    pos = R.positions
    rhs = np.zeros(R.order)
    for key, t in pos.items():
        rhs[t * K:(t + 1) * K] = fp[key:key + K]
    for _, updates in forward:
        for key, upd in updates:
            t = pos[key]
            rhs[t * K:(t + 1) * K] += upd
    counter = OpCounter()
    xs = solve_reduced(R, rhs, counter)
    xsep = {key: xs[t * K:(t + 1) * K] for key, t in pos.items()}
    t2 = time.perf_counter()

    pieces = map_ordered(lambda item: backward_phase(item[0], item[1][0], xsep),
                         list(zip(Fct.locals, forward)), workers)
    t3 = time.perf_counter()

    x = np.zeros(Fct.n)
    for key, xk in xsep.items():
        x[key:key + K] = xk
    for part in pieces:
        for r0, r1, xb in part:
            x[r0:r1] = xb

    stats.phase_seconds = {"forward": t1 - t0, "reduced": t2 - t1, "backward": t3 - t2}
    stats.reduced_flops = counter.flops
    return x, stats


def solve(Fct: ParallelFactorization, f, workers: Optional[int] = None) -> np.ndarray:
    """Solve A x = f with a factorization from ``parallel_factor``."""
    x, _ = solve_with_stats(Fct, f, workers)
    return x


def residual(A: StructuredMatrix, x, f) -> float:
    """Relative residual ||A x - f||_inf / ||f||_inf (absolute when f = 0)."""
    f = np.asarray(f, dtype=np.float64)
    if f.ndim != 1 or f.shape[0] != A.n:
        raise DimensionMismatch(f"right-hand side of shape {f.shape} for n={A.n}")
    r = float(np.max(np.abs(matvec(A, x) - f))) if A.n else 0.0
    scale = float(np.max(np.abs(f))) if A.n else 0.0
    return r / scale if scale > 0 else r


def dense_factors(Fct: ParallelFactorization, limit: Optional[int] = None) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
    """
    Dense F, T, G with F @ T @ G equal to the (rotated) matrix.

    Rows and columns stay in global order: body rows of F hold N and the
    separator rows w^T / v^T; T is identity on bodies and T_p on separators;
    body rows of G hold S, z and y.
    """
    n = Fct.n
    limit = SolverConfig().dense_limit if limit is None else limit
    if n > limit:
        raise TooLargeForDense(f"n={n} exceeds dense limit {limit}")
    F, T, G = np.eye(n), np.eye(n), np.eye(n)

    R = Fct.reduced
    K = R.K
    Tp = R.to_dense()
    idx = np.concatenate([np.arange(key, key + K) for key in R.keys]) if R.q else np.zeros(0, dtype=int)
    T[np.ix_(idx, idx)] = Tp

    for Floc in Fct.locals:
        for seg, piece in zip(Floc.segments, Floc.dense_pieces()):
            if seg.nb == 0:
                continue
            b = np.arange(*seg.rows)
            F[np.ix_(b, b)] = piece["N"]
            G[np.ix_(b, b)] = piece["S"]
            T[np.ix_(b, b)] = np.eye(seg.nb)
            if seg.left_key is not None:
                L = np.arange(seg.left_key, seg.left_key + K)
                F[np.ix_(L, b)] += piece["w"].T
                G[np.ix_(b, L)] = piece["z"]
            if seg.right_key is not None:
                Rr = np.arange(seg.right_key, seg.right_key + K)
                F[np.ix_(Rr, b)] += piece["v"].T
                G[np.ix_(b, Rr)] = piece["y"]
    return F, T, G
