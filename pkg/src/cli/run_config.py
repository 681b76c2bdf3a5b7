import logging
from enum import Enum
from typing import Optional

from pydantic import BaseModel, ConfigDict, Field, ValidationError, model_validator

from ..localfact.factorization import Strategy
from ..odeparallel.problem import Method
from ..shared.errors import InvalidConfig
from ..structmat.matrix import MatrixKind

logger = logging.getLogger(__name__)


class Command(str, Enum):
    GENERATE = "generate"
    SOLVE = "solve"
    VERIFY = "verify"
    ODE = "ode"
    PARAREAL = "parareal"
    BENCH = "bench"
    PLAN = "plan"


LINEAR_COMMANDS = (Command.SOLVE, Command.VERIFY, Command.BENCH)


class RunConfig(BaseModel):
    """Validated selector combination of one CLI invocation."""

    model_config = ConfigDict(frozen=True)

    command: Command
    input: Optional[str] = None
    rhs: Optional[str] = None
    output: Optional[str] = None
    kind: Optional[MatrixKind] = None
    strategy: Optional[Strategy] = None
    method: Optional[Method] = None
    p: Optional[int] = Field(default=None, ge=1)
    n: Optional[int] = Field(default=None, ge=1)
    m: Optional[int] = Field(default=None, ge=1)
    s: Optional[int] = Field(default=None, ge=0)
    r: Optional[int] = Field(default=None, ge=0)
    N: Optional[int] = Field(default=None, ge=1)
    seed: int = 0
    tol: Optional[float] = Field(default=None, gt=0)
    max_iter: Optional[int] = Field(default=None, ge=0)
    workers: Optional[int] = Field(default=None, ge=1)

    @model_validator(mode="after")
    def check_combination(self) -> "RunConfig":
        if self.command in LINEAR_COMMANDS and self.p is not None and self.p < 2:
            raise ValueError(f"{self.command.value} needs p >= 2, got {self.p}")
        if self.strategy == Strategy.ARCE and self.kind is not None \
                and self.kind not in (MatrixKind.ABD, MatrixKind.BABD):
            raise ValueError(f"strategy arce needs kind abd or babd, got {self.kind.value}")
        if self.strategy == Strategy.CR and ((self.s or 0) > 1 or (self.r or 0) > 1):
            raise ValueError(f"strategy cr needs s, r <= 1, got s={self.s}, r={self.r}")
        if self.command == Command.GENERATE and (self.kind is None or self.n is None):
            raise ValueError("generate needs --kind and --n")
        return self


def build_run_config(**values) -> RunConfig:
    """RunConfig from keyword values; validation failures become InvalidConfig."""
    try:
        return RunConfig(**{k: v for k, v in values.items() if v is not None})
    except ValidationError as e:
        first = e.errors()[0]
        where = ".".join(str(part) for part in first.get("loc", ())) or "config"
        raise InvalidConfig(f"{where}: {first.get('msg', str(e))}") from None
