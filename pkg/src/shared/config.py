import os
import json
import logging
from dataclasses import dataclass, field, fields
from pathlib import Path

import psutil
from dotenv import load_dotenv

load_dotenv()

logger = logging.getLogger(__name__)


def _env_int(name: str, default: int) -> int:
    return int(os.getenv(name, str(default)))


def _env_float(name: str, default: float) -> float:
    return float(os.getenv(name, repr(default)))


@dataclass
class SolverConfig:
    """Solver settings, defaulting to environment variables."""

    # Processing settings
    max_workers: int = field(default_factory=lambda: _env_int('WORKERS', psutil.cpu_count(logical=True) or 1))
    dense_limit: int = field(default_factory=lambda: _env_int('DENSE_LIMIT', 2048))

    # Numerical tolerances
    pivot_tol: float = field(default_factory=lambda: _env_float('PIVOT_TOL', 1e-8))
    resid_tol: float = field(default_factory=lambda: _env_float('RESID_TOL', 1e-10))

    # Benchmarking
    bench_repeats: int = field(default_factory=lambda: _env_int('BENCH_REPEATS', 5))

    # Caching settings
    expm_cache_size: int = field(default_factory=lambda: _env_int('CACHE_SIZE', 64))

    log_level: str = field(default_factory=lambda: os.getenv('LOG_LEVEL', 'INFO'))

    def __post_init__(self):
        if self.max_workers < 1:
            self.max_workers = 1
        if self.dense_limit < 1:
            self.dense_limit = 1
        if self.bench_repeats < 1:
            self.bench_repeats = 1

    @classmethod
    def from_env(cls) -> 'SolverConfig':
        """Load configuration based on environment."""
        return cls()


def load_config(name: str = "solver") -> SolverConfig:
    """Load configuration for a named profile from config/<name>.json"""

    config_dir = Path(__file__).parent.parent.parent / "config"
    config_file = config_dir / f"{name}.json"

    if config_file.exists():
        try:
            with open(config_file, 'r') as f:
                config_data = json.load(f)
            known = {f.name for f in fields(SolverConfig)}
            unknown = sorted(set(config_data) - known)
            if unknown:
                logger.warning(f"Ignoring unknown keys in {config_file.name}: {unknown}")
            return SolverConfig(**{k: v for k, v in config_data.items() if k in known})
        except Exception as e:
            logger.warning(f"Could not load config from {config_file}: {e}")

    # Return default config
    return SolverConfig()


def default_dense_limit() -> int:
    return SolverConfig().dense_limit
