import logging
import time
from dataclasses import astuple, dataclass
from typing import Dict, List, Optional, Sequence

import numpy as np

from ..localfact.factorization import DEFAULT_PIVOT_TOL
from ..parfact.factorization import parallel_factor, residual, solve_with_stats
from ..shared.utils import system_snapshot
from ..structmat.matrix import StructuredMatrix

logger = logging.getLogger(__name__)

CSV_HEADER = "phase,n,p,workers,median_seconds,op_count"
PHASES = ("factor", "forward", "reduced", "backward", "total")


@dataclass(frozen=True)
class BenchRow:
    phase: str
    n: int
    p: int
    workers: int
    median_seconds: float
    op_count: int


def run_bench(A: StructuredMatrix, p: int, strategy, workers_list: Sequence[int], repeats: int = 5,
              tol: float = DEFAULT_PIVOT_TOL, f: Optional[np.ndarray] = None) -> List[BenchRow]:
    """Median wall-clock time per phase for each worker count."""
    f = np.ones(A.n) if f is None else f
    rows: List[BenchRow] = []
    for workers in workers_list:
        samples: Dict[str, List[float]] = {phase: [] for phase in PHASES}
        flops = 0
        for _ in range(max(1, repeats)):
            t0 = time.perf_counter()
            Fct = parallel_factor(A, p, strategy, tol, workers)
            t1 = time.perf_counter()
            x, stats = solve_with_stats(Fct, f, workers)
            samples["factor"].append(t1 - t0)
            for phase, seconds in stats.phase_seconds.items():
                samples[phase].append(seconds)
            samples["total"].append(t1 - t0 + sum(stats.phase_seconds.values()))
            flops = stats.reduced_flops
        logger.info(f"⏱️ workers={workers}: total {np.median(samples['total']):.4f}s, "
                    f"residual {residual(A, x, f):.2e}")
        for phase in PHASES:
            rows.append(BenchRow(phase, A.n, p, workers, float(np.median(samples[phase])),
                                 flops if phase == "reduced" else 0))
    return rows


def bench_csv(rows: Sequence[BenchRow]) -> str:
    lines = [CSV_HEADER]
    for row in rows:
        phase, n, p, workers, seconds, ops = astuple(row)
        lines.append(f"{phase},{n},{p},{workers},{seconds:.6e},{ops}")
    return "\n".join(lines) + "\n"


def summarize(rows: Sequence[BenchRow]) -> Dict[str, float]:
    """Speedup of the total time against one worker and the reduced-phase share."""
    totals = {row.workers: row.median_seconds for row in rows if row.phase == "total"}
    reduced = {row.workers: row.median_seconds for row in rows if row.phase == "reduced"}
    out: Dict[str, float] = {}
    base = totals.get(1)
    for workers, seconds in sorted(totals.items()):
        if base is not None and seconds > 0:
            out[f"speedup_w{workers}"] = base / seconds
        if seconds > 0:
            out[f"sequential_fraction_w{workers}"] = reduced.get(workers, 0.0) / seconds
    out.update(system_snapshot())
    return out
