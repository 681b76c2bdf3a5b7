import logging
from typing import Dict, List, Optional, Tuple

import numpy as np

from ..shared.errors import DimensionMismatch, SingularFactor
from .factorization import LocalFactorization

logger = logging.getLogger(__name__)


def forward_phase(F: LocalFactorization, f: np.ndarray):
    """
    Phase 1 for one partition: g = N^-1 f on every segment.

    Returns (states, separator updates). ``f`` is indexed by global row; the
    updates are (separator key, -w^T g or -v^T g) pairs in segment order.
    """
    states: List[Optional[np.ndarray]] = []
    updates: List[Tuple[int, np.ndarray]] = []
    for seg in F.segments:
        if seg.nb == 0:
            states.append(None)
            continue
        fb = f[seg.rows[0]:seg.rows[1]]
        if seg.solver.stores_fill:
            g = seg.solver.apply_n_inv(fb)
            if seg.left_key is not None:
                updates.append((seg.left_key, -(seg.w.T @ g)))
            if seg.right_key is not None:
                updates.append((seg.right_key, -(seg.v.T @ g)))
            states.append(g)
        else:
            h = seg.solve_body(fb)
            if seg.left_key is not None:
                updates.append((seg.left_key, -(seg.c0.T @ h)))
            if seg.right_key is not None:
                updates.append((seg.right_key, -(seg.b1.T @ h)))
            states.append(np.array(fb))
    return states, updates


def backward_phase(F: LocalFactorization, states, xsep: Dict[int, np.ndarray]):
    """Phase 3 for one partition: body unknowns from the separator solution."""
    out = []
    for seg, g in zip(F.segments, states):
        if seg.nb == 0:
            continue
        xl = None if seg.left_key is None else xsep[seg.left_key]
        xr = None if seg.right_key is None else xsep[seg.right_key]
        t = np.array(g)
        if seg.solver.stores_fill:
            if xl is not None:
                t -= seg.z @ xl
            if xr is not None:
                t -= seg.y @ xr
            x = seg.solver.apply_s_inv(t)
        else:
            if xl is not None:
                t -= seg.b0 @ xl
            if xr is not None:
                t -= seg.c1 @ xr
            x = seg.solve_body(t)
        out.append((seg.rows[0], seg.rows[1], x))
    return out


def _check_body(F: LocalFactorization, rhs) -> np.ndarray:
    rhs = np.asarray(rhs, dtype=np.float64)
    if rhs.shape[0] != F.nb:
        raise DimensionMismatch(f"rhs of length {rhs.shape[0]} for a body of {F.nb} rows")
    return rhs


def _apply_segments(F: LocalFactorization, rhs, op: str) -> np.ndarray:
    rhs = _check_body(F, rhs)
    out = np.array(rhs)
    r0 = F.row_range[0]
    for seg in F.segments:
        if seg.nb == 0:
            continue
        sl = slice(seg.rows[0] - r0, seg.rows[1] - r0)
        apply = seg.solver.apply_n_inv if op == "n" else seg.solver.apply_s_inv
        out[sl] = apply(rhs[sl])
    if not np.all(np.isfinite(out)):
        raise SingularFactor(f"partition {F.index}: non-finite result applying the factors")
    return out


def local_apply_N_inv(F: LocalFactorization, rhs) -> np.ndarray:
    """N^-1 rhs over the body; rows of extra separators pass through unchanged."""
    return _apply_segments(F, rhs, "n")


def local_apply_S_inv(F: LocalFactorization, rhs) -> np.ndarray:
    """S^-1 rhs over the body; rows of extra separators pass through unchanged."""
    return _apply_segments(F, rhs, "s")


def local_solve(F: LocalFactorization, rhs) -> np.ndarray:
    """
    Solve M^(i) x = rhs through the stored pieces: N^-1 sweep, dense solve of
    the local separator system, S^-1 sweep. ``rhs`` is ordered like
    ``PartitionBlock.assemble()``.
    """
    sizes: Dict[int, int] = {}
    for rk, ck, block in F.contributions():
        if rk == ck:
            sizes[rk] = block.shape[0]
    start = F.left_key if F.left_key is not None else F.row_range[0]
    end = F.row_range[1] + (sizes[F.right_key] if F.right_key is not None else 0)
    rhs = np.asarray(rhs, dtype=np.float64)
    if rhs.shape[0] != end - start:
        raise DimensionMismatch(f"rhs of length {rhs.shape[0]} for M^(i) of order {end - start}")
    f = np.zeros(end)
    f[start:end] = rhs

    states, updates = forward_phase(F, f)
    keys = sorted(sizes)
    offsets = np.cumsum([0] + [sizes[k] for k in keys])
    pos = {k: offsets[t] for t, k in enumerate(keys)}
    q = int(offsets[-1])
    T = np.zeros((q, q))
    b = np.zeros(q)
    for rk, ck, block in F.contributions():
        T[pos[rk]:pos[rk] + sizes[rk], pos[ck]:pos[ck] + sizes[ck]] += block
    for k in keys:
        b[pos[k]:pos[k] + sizes[k]] = f[k:k + sizes[k]]
    for k, upd in updates:
        b[pos[k]:pos[k] + sizes[k]] += upd
    xs = np.linalg.solve(T, b) if q else b
    xsep = {k: xs[pos[k]:pos[k] + sizes[k]] for k in keys}

    x = np.zeros(end)
    for k in keys:
        x[k:k + sizes[k]] = xsep[k]
    for r0, r1, xb in backward_phase(F, states, xsep):
        x[r0:r1] = xb
    return x[start:end]
