"""
Per-strategy factor storage for one body block A = N S.

Every solver exposes ``apply_n_inv``, ``apply_s_inv`` and, when it stores
fill-in vectors, ``apply_s_inv_t``; ``dense_n``/``dense_s`` materialize the
factors for oracles only.
"""

import logging
from typing import List

import numpy as np
import scipy.linalg
from scipy.linalg import lapack

from ..shared.errors import SingularBlock, SingularFactor, ZeroPivot
from .kernels import (
    band_lower_solve,
    band_lower_t_solve,
    band_lu_inplace,
    band_upper_solve,
    band_upper_t_solve,
)

logger = logging.getLogger(__name__)

EPS = np.finfo(np.float64).eps


def _as_2d(b):
    b = np.asarray(b, dtype=np.float64)
    return np.ascontiguousarray(b.reshape(b.shape[0], -1)), b.ndim == 1


def _restore(x, was_1d):
    return x[:, 0] if was_1d else x


def band_to_dense(ab: np.ndarray, lw: int, uw: int, part: str = "full") -> np.ndarray:
    """Dense image of row-band storage; ``part`` selects 'lower_unit', 'upper' or 'full'."""
    n = ab.shape[0]
    out = np.zeros((n, n))
    for t in range(-lw, uw + 1):
        if part == "lower_unit" and t >= 0:
            continue
        if part == "upper" and t < 0:
            continue
        rows = np.arange(max(0, -t), min(n, n - t))
        out[rows, rows + t] = ab[rows, t + lw]
    if part == "lower_unit":
        out[np.arange(n), np.arange(n)] = 1.0
    return out


class BandLU:
    """No-pivot banded LU: N = L (unit lower), S = U."""

    stores_fill = True

    def __init__(self, ab: np.ndarray, lw: int, uw: int):
        self.lw, self.uw = lw, uw
        self.ab = np.array(ab, dtype=np.float64, order="C")
        self.nb = self.ab.shape[0]
        scale = float(np.max(np.abs(self.ab))) if self.ab.size else 0.0
        status = band_lu_inplace(self.ab, lw, uw, EPS * scale)
        if status >= 0:
            raise ZeroPivot(f"pivot {status} vanished in LU without pivoting; use lupivot or qr")

    def apply_n_inv(self, b):
        b, flat = _as_2d(b)
        return _restore(band_lower_solve(self.ab, self.lw, b, True), flat)

    def apply_s_inv(self, b):
        b, flat = _as_2d(b)
        return _restore(band_upper_solve(self.ab, self.lw, self.uw, b, False), flat)

    def apply_s_inv_t(self, b):
        b, flat = _as_2d(b)
        return _restore(band_upper_t_solve(self.ab, self.lw, self.uw, b, False), flat)

    def dense_n(self):
        return band_to_dense(self.ab, self.lw, self.uw, "lower_unit")

    def dense_s(self):
        return band_to_dense(self.ab, self.lw, self.uw, "upper")


class BandLUD(BandLU):
    """
    Gauss-Jordan style split A = (L U1) D: N = L U1 with U1 unit upper,
    S = D diagonal. N^-1 is a forward sweep with L then a backward sweep
    with U1.
    """

    def __init__(self, ab: np.ndarray, lw: int, uw: int):
        super().__init__(ab, lw, uw)
        self.d = np.array(self.ab[:, lw])
        # U1 = U D^-1, column scaled, stored over the upper part of a copy
        self.ab_u1 = np.array(self.ab)
        for t in range(1, uw + 1):
            if t < self.nb:
                self.ab_u1[:self.nb - t, lw + t] /= self.d[t:]

    def apply_n_inv(self, b):
        b, flat = _as_2d(b)
        x = band_lower_solve(self.ab, self.lw, b, True)
        return _restore(band_upper_solve(self.ab_u1, self.lw, self.uw, x, True), flat)

    def apply_s_inv(self, b):
        b, flat = _as_2d(b)
        return _restore(b / self.d[:, None], flat)

    apply_s_inv_t = apply_s_inv

    def dense_n(self):
        lower = band_to_dense(self.ab, self.lw, self.uw, "lower_unit")
        u1 = band_to_dense(self.ab_u1, self.lw, self.uw, "upper")
        u1[np.arange(self.nb), np.arange(self.nb)] = 1.0
        return lower @ u1

    def dense_s(self):
        return np.diag(self.d)


class CyclicReduction:
    """
    Block cyclic reduction of a block tridiagonal body.

    Each level keeps the even positions and eliminates the odd ones, so a
    body of nb blocks needs ceil(log2 nb) levels. N^-1 is the forward
    reduction of the right-hand side (odd unknowns receive D_o^-1 f_o, the
    root receives its reduced rhs); S^-1 is the root solve followed by back
    substitution. No fill-in vectors are kept.
    """

    stores_fill = False

    def __init__(self, lower: np.ndarray, diag: np.ndarray, upper: np.ndarray):
        self.nblk, self.m = diag.shape[0], diag.shape[1]
        self.nb = self.nblk * self.m
        self.levels: List[dict] = []
        idx = np.arange(self.nblk)
        Lc, Dc, Uc = np.array(lower), np.array(diag), np.array(upper)
        Lc[0] = 0.0
        Uc[-1] = 0.0
        while idx.size > 1:
            c = idx.size
            ne, no = (c + 1) // 2, c // 2
            Do = Dc[1::2]
            Xl = self._solve(Do, Lc[1::2])
            Xu = self._solve(Do, Uc[1::2])
            Le, De, Ue = Lc[0::2], Dc[0::2], Uc[0::2]

            newD = np.array(De)
            newL = np.zeros_like(De)
            newU = np.zeros_like(De)
            newD[:no] -= Ue[:no] @ Xl[:no]
            newU[:no] = -(Ue[:no] @ Xu[:no])
            if ne > 1:
                newD[1:] -= Le[1:] @ Xu[:ne - 1]
                newL[1:] = -(Le[1:] @ Xl[:ne - 1])
            self.levels.append({
                "even": idx[0::2], "odd": idx[1::2],
                "Le": Le, "Ue": Ue, "Do": Do, "Xl": Xl, "Xu": Xu,
            })
            idx, Lc, Dc, Uc = idx[0::2], newL, newD, newU
        self.root_index = int(idx[0])
        self.root = Dc[0]
        self.root_lu = self._factor_root(self.root)
        logger.debug(f"cyclic reduction: {self.nblk} blocks, {len(self.levels)} levels")

    @staticmethod
    def _solve(D, B):
        try:
            X = np.linalg.solve(D, B)
        except np.linalg.LinAlgError:
            raise ZeroPivot("singular diagonal block during cyclic reduction") from None
        if not np.all(np.isfinite(X)):
            raise ZeroPivot("non-finite values during cyclic reduction")
        return X

    @staticmethod
    def _factor_root(D):
        scale = float(np.max(np.abs(D))) if D.size else 0.0
        if scale == 0.0 or abs(np.linalg.det(D)) == 0.0:
            raise ZeroPivot("singular root block in cyclic reduction")
        return scipy.linalg.lu_factor(D, check_finite=False)

    @property
    def num_levels(self) -> int:
        return len(self.levels)

    def apply_n_inv(self, b):
        b, flat = _as_2d(b)
        f = b.reshape(self.nblk, self.m, -1).copy()
        g = np.zeros_like(f)
        cur = f
        for lvl in self.levels:
            # cur holds the rhs of the equations alive at this level, in order
            fo = cur[1::2]
            yo = self._solve(lvl["Do"], fo)
            g[lvl["odd"]] = yo
            fe = cur[0::2].copy()
            no = yo.shape[0]
            fe[:no] -= lvl["Ue"][:no] @ yo
            ne = fe.shape[0]
            if ne > 1:
                fe[1:] -= lvl["Le"][1:] @ yo[:ne - 1]
            cur = fe
        g[self.root_index] = cur[0]
        return _restore(g.reshape(self.nb, -1), flat)

    def apply_s_inv(self, g):
        g, flat = _as_2d(g)
        g = g.reshape(self.nblk, self.m, -1)
        x = np.zeros_like(g)
        x[self.root_index] = scipy.linalg.lu_solve(self.root_lu, g[self.root_index], check_finite=False)
        for lvl in reversed(self.levels):
            even, odd = lvl["even"], lvl["odd"]
            xe = x[even]
            no = odd.size
            xo = g[odd] - lvl["Xl"] @ xe[:no]
            right = xe[1:no + 1]
            xo[:right.shape[0]] -= lvl["Xu"][:right.shape[0]] @ right
            x[odd] = xo
        return _restore(x.reshape(self.nb, -1), flat)

    def solve(self, b):
        return self.apply_s_inv(self.apply_n_inv(b))

    def dense_n(self):
        return np.linalg.inv(self.apply_n_inv(np.eye(self.nb)))

    def dense_s(self):
        return np.linalg.inv(self.apply_s_inv(np.eye(self.nb)))


class AlternateRowColumn:
    """
    Alternate row and column elimination for a block lower bidiagonal body.

    Diagonal block j is split D_j = P_j L_j U_j Q_j: even j by LU with row
    pivoting (Q_j = I), odd j by LU with column pivoting taken from D_j^T
    (P_j = I). N = blockdiag(P_j L_j); S is block lower bidiagonal with
    diagonal U_j Q_j and subdiagonal F_j = L_j^-1 P_j^T E_j.
    """

    stores_fill = True

    def __init__(self, diag: np.ndarray, sub: np.ndarray):
        self.nblk, self.m = diag.shape[0], diag.shape[1]
        self.nb = self.nblk * self.m
        self.P, self.L, self.U, self.Q = [], [], [], []
        self.unit_factors = []
        eye = np.eye(self.m)
        for j in range(self.nblk):
            D = diag[j]
            if j % 2 == 0:
                P, L, U = scipy.linalg.lu(D, check_finite=False)
                Q = eye
                pivots, unit = np.diag(U), L
            else:
                Pt, Lt, Ut = scipy.linalg.lu(D.T, check_finite=False)
                P, L, U, Q = eye, Ut.T, Lt.T, Pt.T
                pivots, unit = np.diag(L), U
            scale = float(np.max(np.abs(D))) if D.size else 0.0
            if scale == 0.0 or np.min(np.abs(pivots)) <= EPS * scale:
                raise SingularBlock(f"diagonal block {j} is singular")
            self.P.append(P)
            self.L.append(L)
            self.U.append(U)
            self.Q.append(Q)
            self.unit_factors.append(unit)
        self.F = [None] + [
            scipy.linalg.solve_triangular(self.L[j], self.P[j].T @ sub[j], lower=True)
            for j in range(1, self.nblk)
        ]

    def apply_n_inv(self, b):
        b, flat = _as_2d(b)
        x = b.reshape(self.nblk, self.m, -1).copy()
        for j in range(self.nblk):
            x[j] = scipy.linalg.solve_triangular(self.L[j], self.P[j].T @ x[j], lower=True)
        return _restore(x.reshape(self.nb, -1), flat)

    def apply_s_inv(self, b):
        b, flat = _as_2d(b)
        rhs = b.reshape(self.nblk, self.m, -1)
        x = np.zeros_like(rhs)
        for j in range(self.nblk):
            t = rhs[j] if j == 0 else rhs[j] - self.F[j] @ x[j - 1]
            x[j] = self.Q[j].T @ scipy.linalg.solve_triangular(self.U[j], t, lower=False)
        return _restore(x.reshape(self.nb, -1), flat)

    def apply_s_inv_t(self, b):
        b, flat = _as_2d(b)
        rhs = b.reshape(self.nblk, self.m, -1)
        x = np.zeros_like(rhs)
        for j in range(self.nblk - 1, -1, -1):
            t = rhs[j] if j == self.nblk - 1 else rhs[j] - self.F[j + 1].T @ x[j + 1]
            x[j] = scipy.linalg.solve_triangular(self.U[j], self.Q[j] @ t, lower=False, trans="T")
        return _restore(x.reshape(self.nb, -1), flat)

    def dense_n(self):
        return scipy.linalg.block_diag(*[P @ L for P, L in zip(self.P, self.L)])

    def dense_s(self):
        m = self.m
        S = np.zeros((self.nb, self.nb))
        for j in range(self.nblk):
            S[j * m:(j + 1) * m, j * m:(j + 1) * m] = self.U[j] @ self.Q[j]
            if j > 0:
                S[j * m:(j + 1) * m, (j - 1) * m:j * m] = self.F[j]
        return S


class PivotedLU:
    """Dense LU with partial pivoting: A = P L U, N = P L, S = U."""

    stores_fill = True

    def __init__(self, a: np.ndarray):
        self.nb = a.shape[0]
        self.lu, self.piv = scipy.linalg.lu_factor(a, check_finite=False)
        scale = float(np.max(np.abs(a))) if a.size else 0.0
        if scale == 0.0 or np.min(np.abs(np.diag(self.lu))) <= EPS * scale:
            raise SingularFactor("segment is singular after partial pivoting")
        perm = np.arange(self.nb)
        for i, pi in enumerate(self.piv):
            perm[i], perm[pi] = perm[pi], perm[i]
        self.perm = perm

    def apply_n_inv(self, b):
        b, flat = _as_2d(b)
        x = scipy.linalg.solve_triangular(self.lu, b[self.perm], lower=True, unit_diagonal=True)
        return _restore(x, flat)

    def apply_s_inv(self, b):
        b, flat = _as_2d(b)
        return _restore(scipy.linalg.solve_triangular(self.lu, b, lower=False), flat)

    def apply_s_inv_t(self, b):
        b, flat = _as_2d(b)
        return _restore(scipy.linalg.solve_triangular(self.lu, b, lower=False, trans="T"), flat)

    def dense_n(self):
        L = np.tril(self.lu, -1) + np.eye(self.nb)
        N = np.empty_like(L)
        N[self.perm] = L
        return N

    def dense_s(self):
        return np.triu(self.lu)


class HouseholderQR:
    """Dense Householder QR: N = Q (kept as LAPACK reflectors), S = R."""

    stores_fill = True

    def __init__(self, a: np.ndarray):
        self.nb = a.shape[0]
        (self.qr, self.tau), self.r = scipy.linalg.qr(np.asarray(a, dtype=np.float64), mode="raw")
        scale = float(np.max(np.abs(a))) if a.size else 0.0
        if scale == 0.0 or np.min(np.abs(np.diag(self.r))) <= EPS * scale:
            raise SingularFactor("segment is rank deficient")

    def _apply(self, trans: str, b: np.ndarray) -> np.ndarray:
        lwork = 64 * max(1, b.shape[1])
        out, _, info = lapack.dormqr("L", trans, self.qr, self.tau, np.asfortranarray(b), lwork)
        if info != 0:
            raise SingularFactor(f"dormqr failed with info={info}")
        return out

    def apply_n_inv(self, b):
        b, flat = _as_2d(b)
        return _restore(self._apply("T", b), flat)

    def apply_s_inv(self, b):
        b, flat = _as_2d(b)
        return _restore(scipy.linalg.solve_triangular(self.r, b, lower=False), flat)

    def apply_s_inv_t(self, b):
        b, flat = _as_2d(b)
        return _restore(scipy.linalg.solve_triangular(self.r, b, lower=False, trans="T"), flat)

    def dense_n(self):
        return self._apply("N", np.eye(self.nb))

    def dense_s(self):
        return np.triu(self.r)
