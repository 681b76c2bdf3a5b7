"""
Trajectory text format, version 1:

    TRAJ 1 <m> <p> <N>
    p + 1 coarse points, one real per line
    (pN + 1) * m solution values, one real per line, time-major
"""

import numpy as np

from ..shared.errors import ParseError
from ..structmat.io import FORMAT_VERSION, check_header, content_lines, format_reals, parse_count, read_reals
from .pipeline import Trajectory
from .problem import TimeGrid


def write_trajectory(traj: Trajectory) -> str:
    grid = traj.grid
    header = f"TRAJ {FORMAT_VERSION} {traj.m} {grid.p} {grid.N}"
    out = [header] + format_reals(grid.tau) + format_reals(traj.y.ravel())
    return "\n".join(out) + "\n"


def parse_trajectory(text: str) -> Trajectory:
    lines = content_lines(text)
    try:
        lineno, header = next(lines)
    except StopIteration:
        raise ParseError("empty input", 1) from None
    tokens = header.split()
    check_header(tokens, "TRAJ", lineno)
    if len(tokens) != 5:
        raise ParseError(f"TRAJ header needs 5 fields, got {len(tokens)}", lineno)
    m, p, N = (parse_count(t, lineno, name) for t, name in zip(tokens[2:], ("m", "p", "N")))
    if m < 1 or p < 1 or N < 1:
        raise ParseError(f"m, p and N must be positive, got {m} {p} {N}", lineno)
    values = read_reals(lines, (p + 1) + (p * N + 1) * m, lineno)
    tau = values[:p + 1]
    if not np.all(np.diff(tau) > 0):
        raise ParseError("coarse points are not strictly increasing", lineno)
    y = values[p + 1:].reshape(p * N + 1, m)
    return Trajectory(y=y, grid=TimeGrid(tau=tau, N=N))
