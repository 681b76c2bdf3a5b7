from .main import build_parser, run
from .run_config import Command, RunConfig, build_run_config
from .bench import BenchRow, bench_csv, run_bench, summarize

__all__ = [
    "BenchRow",
    "Command",
    "RunConfig",
    "bench_csv",
    "build_parser",
    "build_run_config",
    "run",
    "run_bench",
    "summarize",
]
