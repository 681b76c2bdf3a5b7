"""
One coarse window of a one-step discretization.

With A = I - theta h L and B = I + (1 - theta) h L the window system reads

    [ A          ] [y_1]   [B]          [g_1]
    [-B  A       ] [y_2] = [0] y_0  +   [g_2]
    [    .   .   ] [ . ]   [.]          [ . ]
    [       -B  A] [y_N]   [0]          [g_N]

i.e. M_i y_i = v_i y_0 + g_i with M_i lower block bidiagonal.
"""

import logging
import warnings
from dataclasses import dataclass
from typing import Optional, Tuple

import numpy as np
from scipy.linalg import LinAlgWarning, lu_factor, lu_solve

from ..shared.errors import IndexOutOfRange, InvalidParameter, SingularWindow, StepTooLarge
from ..structmat.matrix import MatrixKind, StructuredMatrix, from_blocks
from .problem import IVProblem, Method, TimeGrid

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class WindowSystem:
    i: int
    h: float
    method: Method
    lhs: np.ndarray
    coupling: np.ndarray
    gvec: np.ndarray
    lu: Tuple[np.ndarray, np.ndarray]

    @property
    def N(self) -> int:
        return self.gvec.shape[0]

    @property
    def m(self) -> int:
        return self.lhs.shape[0]

    @property
    def v(self) -> np.ndarray:
        """mN x m coupling block e_1 (x) B."""
        out = np.zeros((self.N * self.m, self.m))
        out[:self.m] = self.coupling
        return out

    @property
    def g(self) -> np.ndarray:
        return self.gvec.reshape(-1)

    @property
    def M_repr(self) -> StructuredMatrix:
        """M_i as an ABD matrix (needs N >= 2)."""
        blocks = np.zeros((self.N, 2, self.m, self.m))
        blocks[:, 0] = -self.coupling
        blocks[:, 1] = self.lhs
        return from_blocks(MatrixKind.ABD, self.N * self.m, self.m, 1, 0, blocks)

    def dense(self) -> np.ndarray:
        m, N = self.m, self.N
        M = np.zeros((N * m, N * m))
        for n in range(N):
            M[n * m:(n + 1) * m, n * m:(n + 1) * m] = self.lhs
            if n:
                M[n * m:(n + 1) * m, (n - 1) * m:n * m] = -self.coupling
        return M


@dataclass(frozen=True)
class WindowSolution:
    """
    Window solves. ``z`` is (N, m); ``w`` is (N, m, m) or None when the
    window was solved directly from a known initial value (then ``z`` is
    the trajectory itself).
    """

    i: int
    z: np.ndarray
    w: Optional[np.ndarray] = None

    @property
    def direct(self) -> bool:
        return self.w is None

    @property
    def z_hat(self) -> np.ndarray:
        return self.z[:-1]

    @property
    def z_N(self) -> np.ndarray:
        return self.z[-1]

    @property
    def w_hat(self) -> np.ndarray:
        return self.w[:-1]

    @property
    def w_N(self) -> np.ndarray:
        return self.w[-1]

    @property
    def w_matrix(self) -> np.ndarray:
        """w as the mN x m block column."""
        return self.w.reshape(-1, self.w.shape[-1])

    def endpoint(self, y0: np.ndarray) -> np.ndarray:
        if self.direct:
            return self.z_N
        return self.z_N + self.w_N @ y0


def discretize_window(prob: IVProblem, grid: TimeGrid, i: int, method=Method.IMPLICIT_EULER,
                      steps: Optional[int] = None) -> WindowSystem:
    """
    Window matrix pieces and right-hand side of window ``i`` (1-based).

    ``steps`` overrides the grid's N (coarse propagators use fewer steps).
    """
    method = method if isinstance(method, Method) else Method.parse(str(method))
    if not 1 <= i <= grid.p:
        raise IndexOutOfRange(f"window {i} outside 1..{grid.p}")
    N = grid.N if steps is None else int(steps)
    t_start, t_end = float(grid.tau[i - 1]), float(grid.tau[i])
    h = (t_end - t_start) / N
    theta = method.theta
    m = prob.m
    eye = np.eye(m)
    A = eye - (theta * h) * prob.L
    B = eye + ((1.0 - theta) * h) * prob.L

    with warnings.catch_warnings():
        warnings.simplefilter("ignore", LinAlgWarning)
        lu, piv = lu_factor(A)
    pivots = np.abs(np.diag(lu))
    if not np.all(np.isfinite(lu)) or np.min(pivots) <= np.finfo(np.float64).eps * max(1.0, np.max(np.abs(A))):
        raise StepTooLarge(f"window {i}: I - {theta:g} h L is singular for h={h:.6g} ({method.value})")

    t = t_start + np.arange(N + 1) * h
    t[-1] = t_end
    if prob.g is None:
        gvec = np.zeros((N, m))
    elif method == Method.IMPLICIT_EULER:
        gvec = np.stack([h * prob.forcing(t[n]) for n in range(1, N + 1)])
    else:
        gs = [prob.forcing(tn) for tn in t]
        gvec = np.stack([(0.5 * h) * (gs[n - 1] + gs[n]) for n in range(1, N + 1)])
    return WindowSystem(i=i, h=h, method=method, lhs=A, coupling=B, gvec=gvec, lu=(lu, piv))


def forward_sweep(W: WindowSystem, start: np.ndarray, with_forcing: bool = True) -> np.ndarray:
    """
    Block forward substitution y_n = A^-1 (B y_{n-1} + g_n) from y_0 = start.

    ``start`` may be a vector or an m x k matrix; returns the N stacked
    iterates.
    """
    y = np.array(start, dtype=np.float64)
    out = np.empty((W.N,) + y.shape)
    for n in range(W.N):
        rhs = W.coupling @ y
        if with_forcing:
            rhs = rhs + W.gvec[n]
        y = lu_solve(W.lu, rhs)
        out[n] = y
    if not np.all(np.isfinite(out)):
        raise SingularWindow(f"window {W.i}: non-finite values in the forward sweep")
    return out


def solve_window_homogeneous(W: WindowSystem) -> WindowSolution:
    """z = M_i^-1 g_i (zero initial value) and w = M_i^-1 v_i."""
    z = forward_sweep(W, np.zeros(W.m))
    w = forward_sweep(W, np.eye(W.m), with_forcing=False)
    return WindowSolution(i=W.i, z=z, w=w)


def solve_window(W: WindowSystem, y0) -> WindowSolution:
    """Window trajectory from a known initial value."""
    return WindowSolution(i=W.i, z=forward_sweep(W, np.asarray(y0, dtype=np.float64)))


def homogeneous_propagator(sol: WindowSolution) -> np.ndarray:
    """w_N, the discrete image of exp((tau_i - tau_{i-1}) L)."""
    if sol.direct:
        raise InvalidParameter(f"window {sol.i} was solved directly and keeps no propagator")
    return sol.w_N
