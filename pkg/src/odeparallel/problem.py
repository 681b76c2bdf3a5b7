import logging
from dataclasses import dataclass
from enum import Enum
from typing import Callable, Optional, Sequence

import numpy as np

from ..shared.errors import DimensionMismatch, InvalidInterval, InvalidParameter, UnsupportedKind
from ..structmat.generators import make_rng

logger = logging.getLogger(__name__)

Forcing = Callable[[float], np.ndarray]


class Method(str, Enum):
    IMPLICIT_EULER = "euler"
    TRAPEZOIDAL = "trapezoidal"

    @classmethod
    def parse(cls, token: str) -> "Method":
        key = token.lower().replace("_", "").replace("-", "")
        aliases = {"impliciteuler": "euler", "ie": "euler", "trap": "trapezoidal", "cn": "trapezoidal"}
        try:
            return cls(aliases.get(key, key))
        except ValueError:
            raise UnsupportedKind(f"unknown method {token!r}") from None

    @property
    def theta(self) -> float:
        """Implicit weight: y_n - y_{n-1} = h (theta f_n + (1 - theta) f_{n-1})."""
        return 1.0 if self == Method.IMPLICIT_EULER else 0.5


@dataclass(frozen=True)
class IVProblem:
    """Linear initial value problem y' = L y + g(t), y(t0) = y0 on [t0, T]."""

    L: np.ndarray
    y0: np.ndarray
    t0: float
    T: float
    g: Optional[Forcing] = None

    def __post_init__(self):
        L = np.array(self.L, dtype=np.float64, ndmin=2)
        y0 = np.array(self.y0, dtype=np.float64, ndmin=1)
        if L.ndim != 2 or L.shape[0] != L.shape[1]:
            raise DimensionMismatch(f"L must be square, got shape {L.shape}")
        if y0.shape != (L.shape[0],):
            raise DimensionMismatch(f"y0 of shape {y0.shape} for L of order {L.shape[0]}")
        if not self.T > self.t0:
            raise InvalidInterval(f"T={self.T} must exceed t0={self.t0}")
        object.__setattr__(self, "L", L)
        object.__setattr__(self, "y0", y0)

    @property
    def m(self) -> int:
        return self.L.shape[0]

    def forcing(self, t: float) -> np.ndarray:
        if self.g is None:
            return np.zeros(self.m)
        value = np.asarray(self.g(t), dtype=np.float64).reshape(-1)
        if value.shape != (self.m,):
            raise DimensionMismatch(f"g({t}) has shape {value.shape}, expected ({self.m},)")
        return value

    def with_initial(self, y0, t0: float, T: float) -> "IVProblem":
        return IVProblem(self.L, y0, t0, T, self.g)


@dataclass(frozen=True)
class TimeGrid:
    """Coarse points tau_0..tau_p with N constant fine steps per window."""

    tau: np.ndarray
    N: int

    @property
    def p(self) -> int:
        return self.tau.size - 1

    @property
    def h(self) -> np.ndarray:
        return np.diff(self.tau) / self.N

    def step(self, i: int) -> float:
        """Stepsize of window i (1-based)."""
        return float((self.tau[i] - self.tau[i - 1]) / self.N)

    def window_times(self, i: int) -> np.ndarray:
        """t_0..t_N of window i."""
        return self.tau[i - 1] + np.arange(self.N + 1) * self.step(i)

    def times(self) -> np.ndarray:
        out = [self.tau[:1]]
        for i in range(1, self.p + 1):
            t = self.window_times(i)[1:]
            t[-1] = self.tau[i]
            out.append(t)
        return np.concatenate(out)


def coarse_mesh(t0: float, T: float, p: int, N: int, tau: Optional[Sequence[float]] = None) -> TimeGrid:
    """
    Coarse partition of [t0, T] into p windows of N steps each.

    Uniform unless ``tau`` lists the points explicitly (then p is taken from
    it and must agree when both are given).
    """
    if N < 1:
        raise InvalidParameter(f"steps per window must be >= 1, got {N}")
    if tau is None:
        if p < 1:
            raise InvalidParameter(f"window count must be >= 1, got {p}")
        if not T > t0:
            raise InvalidInterval(f"T={T} must exceed t0={t0}")
        points = t0 + (T - t0) * np.arange(p + 1) / p
        points[0], points[-1] = t0, T
    else:
        points = np.asarray(tau, dtype=np.float64)
        if points.ndim != 1 or points.size < 2:
            raise InvalidInterval("an explicit coarse mesh needs at least two points")
        if p and points.size - 1 != p:
            raise InvalidInterval(f"{points.size - 1} windows listed but p={p}")
        if points[0] != t0 or points[-1] != T:
            raise InvalidInterval(f"mesh must run from t0={t0} to T={T}, got {points[0]}..{points[-1]}")
    if not np.all(np.diff(points) > 0):
        raise InvalidInterval("coarse points must be strictly increasing")
    return TimeGrid(tau=points, N=int(N))


def decay_problem(lam: float = -1.0, y0: float = 1.0, t0: float = 0.0, T: float = 1.0) -> IVProblem:
    """Scalar y' = lam y."""
    return IVProblem(np.array([[lam]]), np.array([y0]), t0, T)


def random_stable_problem(m: int, seed: int = 0, t0: float = 0.0, T: float = 1.0,
                          forced: bool = False) -> IVProblem:
    """
    Random L with spectrum in the left half plane: a skew part plus a
    negative definite part. ``forced`` adds g(t) = sin(t) c.
    """
    if m < 1:
        raise InvalidParameter(f"m must be >= 1, got {m}")
    rng = make_rng(seed)
    X = rng.uniform(-1.0, 1.0, (m, m))
    Y = rng.uniform(-1.0, 1.0, (m, m))
    L = (X - X.T) - (Y @ Y.T) - np.eye(m)
    y0 = rng.uniform(-1.0, 1.0, m)
    g = None
    if forced:
        c = rng.uniform(-1.0, 1.0, m)

        def g(t: float) -> np.ndarray:
            return np.sin(t) * c

    return IVProblem(L, y0, t0, T, g)
