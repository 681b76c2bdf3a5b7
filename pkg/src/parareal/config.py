import json
import logging
from pathlib import Path
from typing import Any, Dict, Union

from ..odeparallel.problem import Method
from ..shared.errors import InvalidConfig, InputError
from .propagators import Propagator, PropagatorKind

logger = logging.getLogger(__name__)

PathLike = Union[str, Path]


class PararealConfig:
    """Propagator pair, stopping rule and pool size of a Parareal run."""

    DEFAULTS: Dict[str, Any] = {
        # fine propagator F
        'fine_method': 'euler',
        'fine_steps': 20,

        # coarse propagator G: 'coarse' (discrete) or 'expm'
        'coarse_kind': 'coarse',
        'coarse_method': 'euler',
        'coarse_steps': 1,

        # stop at tol, or after max_iter_factor * p iterations
        'tol': 1e-8,
        'max_iter_factor': 2,

        'max_workers': 4,
    }

    def __init__(self, **overrides):
        self.defaults = dict(self.DEFAULTS)
        values = {**self.defaults, **{k: v for k, v in overrides.items() if k in self.defaults}}
        for key, value in values.items():
            setattr(self, key, value)
        self._validate()

    def _validate(self):
        """Clamp numeric settings into range; unknown method or kind tokens are errors."""
        try:
            Method.parse(str(self.fine_method))
            Method.parse(str(self.coarse_method))
            kind = PropagatorKind.parse(str(self.coarse_kind))
        except InputError as e:
            raise InvalidConfig(e.detail) from None
        self.fine_steps = max(1, int(self.fine_steps))
        self.coarse_steps = max(1, int(self.coarse_steps))
        if kind != PropagatorKind.EXPM and self.coarse_steps > self.fine_steps:
            logger.warning(f"⚠️ coarse_steps {self.coarse_steps} capped at fine_steps {self.fine_steps}")
            self.coarse_steps = self.fine_steps
        if not 0.0 < self.tol < 1.0:
            self.tol = self.DEFAULTS['tol']
        self.max_iter_factor = max(1, int(self.max_iter_factor))
        self.max_workers = max(1, int(self.max_workers))

    @classmethod
    def from_file(cls, config_path: PathLike) -> 'PararealConfig':
        """Settings from a JSON file; a missing or unreadable file gives the defaults."""
        path = Path(config_path)
        if not path.exists():
            return cls()
        try:
            with open(path, 'r', encoding='utf-8') as fh:
                return cls(**json.load(fh))
        except (OSError, TypeError, ValueError) as e:
            logger.warning(f"⚠️ could not read {path}: {e}; using Parareal defaults")
            return cls()

    def save_to_file(self, config_path: PathLike):
        path = Path(config_path)
        path.parent.mkdir(parents=True, exist_ok=True)
        with open(path, 'w', encoding='utf-8') as fh:
            json.dump(self.to_dict(), fh, indent=2, ensure_ascii=False)

    def update(self, **kwargs):
        """Apply the non-None values among known keys (CLI flags left unset are None)."""
        for key, value in kwargs.items():
            if key in self.defaults and value is not None:
                setattr(self, key, value)
        self._validate()

    def get(self, key: str, default=None):
        return getattr(self, key, default)

    def to_dict(self) -> Dict[str, Any]:
        return {key: getattr(self, key) for key in self.defaults}

    def fine_propagator(self) -> Propagator:
        return Propagator.fine(self.fine_method, self.fine_steps)

    def coarse_propagator(self) -> Propagator:
        kind = PropagatorKind.parse(str(self.coarse_kind))
        return Propagator(kind, Method.parse(str(self.coarse_method)), self.coarse_steps)

    def max_iter(self, p: int) -> int:
        return self.max_iter_factor * p

    def __repr__(self):
        return f"PararealConfig({self.to_dict()})"
