# src/shared/utils.py

import logging
from concurrent.futures import ThreadPoolExecutor, as_completed
from typing import Callable, Dict, List, Optional, Sequence, TypeVar

import psutil

from .errors import StructSolveError

T = TypeVar("T")
R = TypeVar("R")


def available_workers() -> int:
    """Logical cores visible to this process."""
    try:
        return max(1, len(psutil.Process().cpu_affinity()))
    except (AttributeError, psutil.Error):
        return psutil.cpu_count(logical=True) or 1


def system_snapshot() -> Dict[str, float]:
    """Host facts reported next to benchmark timings."""
    mem = psutil.virtual_memory()
    return {
        "logical_cpus": float(psutil.cpu_count(logical=True) or 1),
        "physical_cpus": float(psutil.cpu_count(logical=False) or 1),
        "memory_total_gb": mem.total / 2**30,
        "memory_used_fraction": mem.percent / 100.0,
    }


def setup_logging(name: str = __name__, level: str = "INFO") -> logging.Logger:
    logger = logging.getLogger(name)
    logger.setLevel(getattr(logging, level.upper()))
    if not logger.handlers:
        handler = logging.StreamHandler()
        formatter = logging.Formatter('%(asctime)s - %(name)s - %(levelname)s - %(message)s')
        handler.setFormatter(formatter)
        logger.addHandler(handler)
    return logger


def map_ordered(fn: Callable[[T], R], items: Sequence[T], workers: Optional[int] = None) -> List[R]:
    """
    Apply ``fn`` to every item on a thread pool and return results in item order.

    Args:
        fn: Callable run once per item.
        items: Work units, typically one per partition or window.
        workers: Pool size cap; ``None`` uses every available core, 1 runs inline.

    Returns:
        List of results, ``results[k] == fn(items[k])``.

    Library errors raised by ``fn`` are re-raised tagged with the 1-based item
    index; when several items fail, the lowest index wins.
    """
    if workers is None:
        workers = available_workers()
    workers = max(1, min(workers, len(items))) if items else 1

    if workers == 1:
        results = []
        for k, item in enumerate(items):
            try:
                results.append(fn(item))
            except StructSolveError as e:
                raise e.tagged(k + 1) from e
        return results

    slots: List[Optional[R]] = [None] * len(items)
    failures: Dict[int, BaseException] = {}
    with ThreadPoolExecutor(max_workers=workers) as executor:
        futures = {executor.submit(fn, item): k for k, item in enumerate(items)}
        for future in as_completed(futures):
            k = futures[future]
            try:
                slots[k] = future.result()
            except BaseException as e:
                failures[k] = e

    if failures:
        k = min(failures)
        err = failures[k]
        if isinstance(err, StructSolveError):
            raise err.tagged(k + 1) from err
        raise err
    return slots  # type: ignore[return-value]
