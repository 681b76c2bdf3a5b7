"""
Command-line surface.

    generate  write a random structured matrix (STRUCTMAT)
    solve     factor in parallel, solve, print the residual
    verify    solve and compare with a dense solve
    ode       time-parallel linear IVP run (TRAJ output)
    parareal  Parareal run (CSV convergence history)
    bench     per-phase timings for several worker counts (CSV)
    plan      print a partition plan

Failures print ``ERROR <code> <detail>`` on stderr and exit with 1 (input)
or 2 (numeric).
"""

import argparse
import logging
import sys
from pathlib import Path
from typing import Callable, Dict, List, Optional, Tuple

import numpy as np

from ..localfact.factorization import Strategy
from ..odeparallel.io import write_trajectory
from ..odeparallel.pipeline import solve_ivp_parallel, solve_ivp_sequential
from ..odeparallel.problem import IVProblem, Method, coarse_mesh, decay_problem, random_stable_problem
from ..parareal.config import PararealConfig
from ..parareal.heat import heat_problem
from ..parareal.iteration import history_csv, parareal_solve, parareal_trajectory
from ..parfact.factorization import parallel_factor, residual, solve
from ..partition.plan import plan_partition
from ..shared.config import SolverConfig, load_config
from ..shared.errors import InputError, NotConverged, ParseError, StructSolveError
from ..shared.utils import available_workers
from ..structmat.generators import generate_random, make_rng
from ..structmat.io import parse_matrix, parse_vector, write_matrix, write_vector
from ..structmat.matrix import MatrixKind, StructuredMatrix, to_dense
from .bench import bench_csv, run_bench, summarize
from .run_config import Command, build_run_config

logger = logging.getLogger(__name__)

DEFAULT_PARAREAL_CONFIG = Path(__file__).parent.parent.parent / "config" / "parareal.json"


class ArgumentParser(argparse.ArgumentParser):
    """argparse that raises ParseError instead of exiting."""

    def error(self, message):
        raise ParseError(message)


def _shape(token: Optional[str]) -> Optional[Tuple[int, int]]:
    if token is None:
        return None
    try:
        rows, cols = (int(v) for v in token.lower().split("x"))
    except ValueError:
        raise ParseError(f"corner shape must look like RxC, got {token!r}") from None
    return rows, cols


def _int_list(token: str) -> List[int]:
    try:
        return [int(v) for v in token.split(",") if v.strip()]
    except ValueError:
        raise ParseError(f"expected a comma-separated list of integers, got {token!r}") from None


def _float_list(token: Optional[str]) -> Optional[List[float]]:
    if token is None:
        return None
    try:
        return [float(v) for v in token.split(",") if v.strip()]
    except ValueError:
        raise ParseError(f"expected a comma-separated list of reals, got {token!r}") from None


def _read(path: str) -> str:
    with open(path, "r", encoding="utf-8") as fh:
        return fh.read()


def _emit(text: str, path: Optional[str]) -> None:
    if path is None:
        sys.stdout.write(text)
        return
    out = Path(path)
    out.parent.mkdir(parents=True, exist_ok=True)
    out.write_text(text, encoding="utf-8")
    logger.info(f"📝 wrote {out}")


def _load_rhs(token: str, n: int) -> np.ndarray:
    if token == "ones":
        return np.ones(n)
    if token.startswith("random"):
        seed = int(token.split(":", 1)[1]) if ":" in token else 0
        return make_rng(seed).uniform(-1.0, 1.0, n)
    return parse_vector(_read(token))


def _strategy(token: str) -> Strategy:
    try:
        return Strategy.parse(token)
    except InputError as e:
        raise ParseError(e.detail) from None


def _kind(token: str) -> MatrixKind:
    try:
        return MatrixKind.parse(token)
    except InputError as e:
        raise ParseError(e.detail) from None


def _method(token: str) -> Method:
    try:
        return Method.parse(token)
    except InputError as e:
        raise ParseError(e.detail) from None


def cmd_generate(args) -> int:
    kind = _kind(args.kind)
    build_run_config(command=Command.GENERATE, kind=kind, n=args.n, m=args.m, s=args.s, r=args.r,
                     seed=args.seed, output=args.output)
    A = generate_random(kind, args.n, args.m, args.s, args.r, seed=args.seed, diag_dominance=args.dominance,
                        corner_shape=_shape(args.corner), lower_corner_shape=_shape(args.lower_corner))
    _emit(write_matrix(A), args.output)
    return 0


def _factor_and_solve(args, command: Command):
    A = parse_matrix(_read(args.matrix))
    strategy = _strategy(args.strategy)
    settings = load_config("solver")
    build_run_config(command=command, kind=A.kind, strategy=strategy, p=args.p, n=A.n, m=A.m, s=A.s, r=A.r,
                     tol=args.tol, workers=args.workers, input=args.matrix, output=args.output)
    f = _load_rhs(args.rhs, A.n)
    tol = settings.pivot_tol if args.tol is None else args.tol
    workers = settings.max_workers if args.workers is None else args.workers
    Fct = parallel_factor(A, args.p, strategy, tol, workers)
    x = solve(Fct, f, workers)
    res = residual(A, x, f)
    if res > settings.resid_tol:
        logger.warning(f"⚠️ residual {res:.3e} above {settings.resid_tol:g}")
    if args.output is not None:
        _emit(write_vector(x), args.output)
    print(f"q {Fct.q}")
    print(f"residual {res:.6e}")
    return A, f, x, settings


def cmd_solve(args) -> int:
    _factor_and_solve(args, Command.SOLVE)
    return 0


def cmd_verify(args) -> int:
    A, f, x, settings = _factor_and_solve(args, Command.VERIFY)
    x_ref = np.linalg.solve(to_dense(A, settings.dense_limit), f)
    scale = float(np.max(np.abs(x_ref))) if A.n else 0.0
    err = float(np.max(np.abs(x - x_ref))) if A.n else 0.0
    err = err / scale if scale > 0 else err
    check = settings.resid_tol if args.check_tol is None else args.check_tol
    ok = err <= check
    print(f"max_rel_error {err:.6e} {'PASS' if ok else 'FAIL'}")
    return 0 if ok else 2


def _ode_problem(args) -> IVProblem:
    if args.problem == "decay":
        return decay_problem(args.lam, args.y0, args.t0, args.T)
    if args.problem == "heat":
        return heat_problem(args.m, args.t0, args.T)
    return random_stable_problem(args.m, args.seed, args.t0, args.T, forced=args.forced)


def cmd_ode(args) -> int:
    method = _method(args.method)
    build_run_config(command=Command.ODE, method=method, p=args.p, m=args.m, N=args.N, seed=args.seed,
                     workers=args.workers, output=args.output)
    prob = _ode_problem(args)
    grid = coarse_mesh(prob.t0, prob.T, args.p, args.N, _float_list(args.tau))
    if args.sequential:
        traj = solve_ivp_sequential(prob, grid, method)
    else:
        traj = solve_ivp_parallel(prob, grid, method, workers=args.workers)
    _emit(write_trajectory(traj), args.output)
    if args.output is not None:
        print("endpoint " + " ".join(f"{v:.17g}" for v in traj.endpoint))
    return 0


def cmd_parareal(args) -> int:
    cfg = PararealConfig.from_file(args.config)
    cfg.update(fine_steps=args.N, fine_method=args.method, coarse_kind=args.coarse,
               coarse_method=args.coarse_method, coarse_steps=args.coarse_steps, tol=args.tol,
               max_workers=args.workers)
    build_run_config(command=Command.PARAREAL, method=_method(cfg.fine_method), p=args.p, m=args.m,
                     N=cfg.fine_steps, tol=cfg.tol, max_iter=args.max_iter, workers=args.workers,
                     output=args.output)
    prob = _ode_problem(args)
    grid = coarse_mesh(prob.t0, prob.T, args.p, cfg.fine_steps)
    max_iter = cfg.max_iter(grid.p) if args.max_iter is None else args.max_iter
    result = parareal_solve(prob, grid, cfg.fine_propagator(), cfg.coarse_propagator(), cfg.tol,
                            max_iter, cfg.max_workers)
    _emit(history_csv(result.history), args.output)
    if args.trajectory is not None:
        traj = parareal_trajectory(prob, grid, result.inits, cfg.fine_method, cfg.max_workers)
        _emit(write_trajectory(traj), args.trajectory)
    if not result.converged:
        raise NotConverged(f"no convergence to {cfg.tol:g} in {result.iterations} iterations")
    return 0


def cmd_bench(args) -> int:
    kind = _kind(args.kind)
    strategy = _strategy(args.strategy)
    settings = SolverConfig()
    workers_list = _int_list(args.workers_list) if args.workers_list else sorted({1, available_workers()})
    build_run_config(command=Command.BENCH, kind=kind, strategy=strategy, p=args.p, n=args.n, m=args.m,
                     s=args.s, r=args.r, seed=args.seed, output=args.output)
    A = generate_random(kind, args.n, args.m, args.s, args.r, seed=args.seed, diag_dominance=2.0)
    repeats = settings.bench_repeats if args.repeats is None else args.repeats
    rows = run_bench(A, args.p, strategy, workers_list, repeats, settings.pivot_tol)
    _emit(bench_csv(rows), args.output)
    for key, value in summarize(rows).items():
        print(f"# {key} {value:.4g}")
    return 0


def cmd_plan(args) -> int:
    if args.matrix is not None:
        A: StructuredMatrix = parse_matrix(_read(args.matrix))
    else:
        if args.kind is None or args.n is None:
            raise ParseError("plan needs --matrix or --kind and --n")
        A = generate_random(_kind(args.kind), args.n, args.m, args.s, args.r)
    print(plan_partition(A, args.p).describe())
    return 0


def _add_linear_flags(sp) -> None:
    sp.add_argument("-m", "--matrix", required=True, help="STRUCTMAT file")
    sp.add_argument("-f", "--rhs", default="ones", help="VEC file, 'ones' or 'random[:seed]'")
    sp.add_argument("--p", type=int, required=True, help="number of partitions")
    sp.add_argument("--strategy", default="lu", help="lu, lud, cr, arce, lupivot or qr")
    sp.add_argument("--tol", type=float, default=None, help="deferral tolerance of lupivot/qr")
    sp.add_argument("--workers", type=int, default=None)
    sp.add_argument("-o", "--output", default=None, help="write the solution (VEC)")


def _add_ode_flags(sp, problem: str, m: int, p: int, N: Optional[int], T: float) -> None:
    sp.add_argument("--problem", choices=("decay", "random", "heat"), default=problem)
    sp.add_argument("--m", type=int, default=m, help="system size (random/heat)")
    sp.add_argument("--lam", type=float, default=-1.0, help="decay rate (decay)")
    sp.add_argument("--y0", type=float, default=1.0, help="initial value (decay)")
    sp.add_argument("--seed", type=int, default=0)
    sp.add_argument("--forced", action="store_true", help="add a forcing term (random)")
    sp.add_argument("--t0", type=float, default=0.0)
    sp.add_argument("--T", type=float, default=T)
    sp.add_argument("--p", type=int, default=p, help="number of windows")
    sp.add_argument("--N", type=int, default=N, help="fine steps per window")
    sp.add_argument("--workers", type=int, default=None)
    sp.add_argument("-o", "--output", default=None)


def build_parser() -> ArgumentParser:
    parser = ArgumentParser(prog="structsolve", description="Parallel structured solvers and time-parallel IVPs")
    parser.add_argument("--log-level", type=str.upper, default=None, choices=("DEBUG", "INFO", "WARNING", "ERROR"))
    sub = parser.add_subparsers(dest="command", required=True)

    sp = sub.add_parser("generate", help="write a random structured matrix")
    sp.add_argument("--kind", required=True)
    sp.add_argument("--n", type=int, required=True)
    sp.add_argument("--m", type=int, default=1)
    sp.add_argument("--s", type=int, default=None)
    sp.add_argument("--r", type=int, default=None)
    sp.add_argument("--seed", type=int, default=0)
    sp.add_argument("--dominance", type=float, default=0.0)
    sp.add_argument("--corner", default=None, help="upper-right corner shape RxC")
    sp.add_argument("--lower-corner", default=None, help="lower-left corner shape RxC")
    sp.add_argument("-o", "--output", default=None)

    _add_linear_flags(sub.add_parser("solve", help="solve A x = f"))
    sp = sub.add_parser("verify", help="solve and compare with a dense solve")
    _add_linear_flags(sp)
    sp.add_argument("--check-tol", type=float, default=None)

    sp = sub.add_parser("ode", help="time-parallel linear IVP")
    _add_ode_flags(sp, "decay", 4, 4, 25, 1.0)
    sp.add_argument("--method", default="euler")
    sp.add_argument("--tau", default=None, help="explicit coarse points, comma-separated")
    sp.add_argument("--sequential", action="store_true", help="integrate window after window")

    sp = sub.add_parser("parareal", help="Parareal iteration")
    _add_ode_flags(sp, "heat", 32, 8, None, 0.1)
    sp.add_argument("--config", default=str(DEFAULT_PARAREAL_CONFIG))
    sp.add_argument("--method", default=None, help="fine method")
    sp.add_argument("--coarse", default=None, help="coarse propagator: coarse or expm")
    sp.add_argument("--coarse-method", default=None)
    sp.add_argument("--coarse-steps", type=int, default=None)
    sp.add_argument("--tol", type=float, default=None)
    sp.add_argument("--max-iter", type=int, default=None)
    sp.add_argument("--trajectory", default=None, help="also write the fine trajectory (TRAJ)")

    sp = sub.add_parser("bench", help="phase timings (CSV)")
    sp.add_argument("--kind", default="banded")
    sp.add_argument("--n", type=int, default=100000)
    sp.add_argument("--m", type=int, default=1)
    sp.add_argument("--s", type=int, default=None)
    sp.add_argument("--r", type=int, default=None)
    sp.add_argument("--p", type=int, default=4)
    sp.add_argument("--strategy", default="lu")
    sp.add_argument("--workers-list", default=None, help="comma-separated worker counts")
    sp.add_argument("--repeats", type=int, default=None)
    sp.add_argument("--seed", type=int, default=0)
    sp.add_argument("-o", "--output", default=None)

    sp = sub.add_parser("plan", help="print a partition plan")
    sp.add_argument("-m", "--matrix", default=None)
    sp.add_argument("--kind", default=None)
    sp.add_argument("--n", type=int, default=None)
    sp.add_argument("--m", type=int, default=1)
    sp.add_argument("--s", type=int, default=None)
    sp.add_argument("--r", type=int, default=None)
    sp.add_argument("--p", type=int, required=True)
    return parser


COMMANDS: Dict[str, Callable] = {
    "generate": cmd_generate,
    "solve": cmd_solve,
    "verify": cmd_verify,
    "ode": cmd_ode,
    "parareal": cmd_parareal,
    "bench": cmd_bench,
    "plan": cmd_plan,
}


def run(argv: Optional[List[str]] = None) -> int:
    """Run one command; returns the process exit code."""
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        if args.log_level:
            logging.getLogger().setLevel(args.log_level)
        return COMMANDS[args.command](args)
    except StructSolveError as e:
        print(f"ERROR {e.code} {e}", file=sys.stderr)
        return e.exit_code
    except OSError as e:
        print(f"ERROR IOError {e}", file=sys.stderr)
        return 1
    except SystemExit as e:
        # --help
        return int(e.code or 0)
