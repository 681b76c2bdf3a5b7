#!/usr/bin/env python3
"""
structsolve - parallel factorizations of structured matrices and
time-parallel solution of linear initial value problems.

Usage:
    python main.py generate --kind banded --n 100 --s 1 --r 1 --seed 1 --dominance 2 -o a.mat
    python main.py solve -m a.mat -f ones --p 4 --strategy lu
    python main.py parareal --problem heat --m 32 --p 8
"""

import logging
import sys
from pathlib import Path

# Add src to Python path
sys.path.append(str(Path(__file__).parent / "src"))

from src.cli.main import run  # noqa: E402
from src.shared.config import SolverConfig  # noqa: E402

# Configure logging
logging.basicConfig(
    level=getattr(logging, SolverConfig().log_level.upper(), logging.INFO),
    format='%(asctime)s - %(levelname)s - %(message)s'
)
logger = logging.getLogger(__name__)


def main():
    """Main entry point"""
    sys.exit(run(sys.argv[1:]))


if __name__ == "__main__":
    main()
