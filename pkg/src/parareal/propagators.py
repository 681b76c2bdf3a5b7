import logging
from dataclasses import dataclass
from enum import Enum
from typing import Dict, Tuple

import numpy as np

from ..odeparallel.problem import IVProblem, Method, TimeGrid
from ..odeparallel.window import WindowSystem, discretize_window, forward_sweep
from ..shared.errors import IndexOutOfRange, InvalidParameter, UnsupportedKind
from .expm import matrix_exponential

logger = logging.getLogger(__name__)


def _method(method) -> Method:
    return method if isinstance(method, Method) else Method.parse(str(method))


class PropagatorKind(str, Enum):
    FINE = "fine"
    COARSE = "coarse"
    EXPM = "expm"

    @classmethod
    def parse(cls, token: str) -> "PropagatorKind":
        key = token.lower()
        aliases = {"finediscrete": "fine", "coarsediscrete": "coarse", "exponential": "expm",
                   "matrixexponential": "expm"}
        try:
            return cls(aliases.get(key, key))
        except ValueError:
            raise UnsupportedKind(f"unknown propagator {token!r}") from None


@dataclass(frozen=True)
class Propagator:
    """
    Maps a window's initial value to its final value.

    Discrete kinds run ``steps`` steps of ``method``; the exponential kind
    propagates the homogeneous part exactly and takes the forcing
    contribution from ``steps`` steps of ``method``.
    """

    kind: PropagatorKind
    method: Method = Method.IMPLICIT_EULER
    steps: int = 1

    def __post_init__(self):
        if self.steps < 1:
            raise InvalidParameter(f"propagator needs at least one step, got {self.steps}")

    @classmethod
    def fine(cls, method=Method.IMPLICIT_EULER, steps: int = 1) -> "Propagator":
        return cls(PropagatorKind.FINE, _method(method), steps)

    @classmethod
    def coarse(cls, method=Method.IMPLICIT_EULER, steps: int = 1) -> "Propagator":
        return cls(PropagatorKind.COARSE, _method(method), steps)

    @classmethod
    def exponential(cls, method=Method.IMPLICIT_EULER, steps: int = 1) -> "Propagator":
        return cls(PropagatorKind.EXPM, _method(method), steps)

    def describe(self) -> str:
        return f"{self.kind.value}({self.method.value}, {self.steps} steps)"


class BoundPropagator:
    """A propagator tied to one problem and grid; window systems are built once."""

    def __init__(self, P: Propagator, prob: IVProblem, grid: TimeGrid):
        self.P = P
        self.prob = prob
        self.grid = grid
        self._windows: Dict[int, WindowSystem] = {}
        self._particular: Dict[int, np.ndarray] = {}

    def window(self, i: int) -> WindowSystem:
        W = self._windows.get(i)
        if W is None:
            W = discretize_window(self.prob, self.grid, i, self.P.method, steps=self.P.steps)
            self._windows[i] = W
        return W

    def prepare(self) -> "BoundPropagator":
        for i in range(1, self.grid.p + 1):
            self.window(i)
            if self.P.kind == PropagatorKind.EXPM:
                self.particular(i)
        return self

    def particular(self, i: int) -> np.ndarray:
        """Forcing contribution of window i (zero initial value)."""
        z = self._particular.get(i)
        if z is None:
            W = self.window(i)
            z = np.zeros(self.prob.m) if self.prob.g is None else forward_sweep(W, np.zeros(self.prob.m))[-1]
            self._particular[i] = z
        return z

    def __call__(self, i: int, y) -> np.ndarray:
        if not 1 <= i <= self.grid.p:
            raise IndexOutOfRange(f"window {i} outside 1..{self.grid.p}")
        y = np.asarray(y, dtype=np.float64)
        if self.P.kind == PropagatorKind.EXPM:
            dt = float(self.grid.tau[i] - self.grid.tau[i - 1])
            return matrix_exponential(self.prob.L, dt) @ y + self.particular(i)
        return forward_sweep(self.window(i), y)[-1]


def propagate(P: Propagator, prob: IVProblem, grid: TimeGrid, i: int, y) -> np.ndarray:
    """Final value of window ``i`` started from ``y`` under propagator ``P``."""
    return BoundPropagator(P, prob, grid)(i, y)


def bind_pair(fine: Propagator, coarse: Propagator, prob: IVProblem,
              grid: TimeGrid) -> Tuple[BoundPropagator, BoundPropagator]:
    if fine.kind == PropagatorKind.COARSE:
        logger.warning(f"⚠️ fine propagator is declared coarse: {fine.describe()}")
    if coarse.kind != PropagatorKind.EXPM and coarse.steps > fine.steps:
        raise InvalidParameter(f"coarse propagator takes {coarse.steps} steps, more than the fine {fine.steps}")
    return BoundPropagator(fine, prob, grid).prepare(), BoundPropagator(coarse, prob, grid).prepare()
