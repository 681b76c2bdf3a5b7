import hashlib
import threading
from typing import Any, Hashable, Optional, Tuple

import cachetools
import numpy as np


def array_key(a: np.ndarray) -> Tuple[str, Tuple[int, ...]]:
    """Content key for a numpy array (digest of its bytes plus shape)."""
    data = np.ascontiguousarray(a, dtype=np.float64)
    return hashlib.sha1(data.tobytes()).hexdigest(), data.shape


class LRUCacheManager:
    """
    Thread-safe singleton Least Recently Used cache.
    Holds matrix exponentials keyed by matrix content and time step, which
    Parareal requests once per window and iteration.
    """
    _instance = None
    _lock = threading.Lock()

    def __new__(cls, maxsize=64):
        with cls._lock:
            if cls._instance is None:
                cls._instance = super().__new__(cls)
                cls._instance.cache = cachetools.LRUCache(maxsize=maxsize)
                cls._instance.hits = 0
                cls._instance.misses = 0
        return cls._instance

    def get(self, key: Hashable) -> Optional[Any]:
        with self._lock:
            value = self.cache.get(key, None)
            if value is None:
                self.misses += 1
            else:
                self.hits += 1
            return value

    def set(self, key: Hashable, value: Any):
        with self._lock:
            self.cache[key] = value

    def clear(self):
        with self._lock:
            self.cache.clear()
            self.hits = 0
            self.misses = 0

    def __contains__(self, key: Hashable):
        with self._lock:
            return key in self.cache
