"""
Exception hierarchy shared by every structsolve module.

Each class carries the token printed by the CLI after ``ERROR`` and the
process exit code (1 for bad input, 2 for numeric failure).
"""

from typing import Optional


class StructSolveError(Exception):
    """Base class for all library errors."""

    code = "Error"
    exit_code = 1

    def __init__(self, detail: str = "", partition: Optional[int] = None):
        self.detail = detail
        self.partition = partition
        message = f"partition {partition}: {detail}" if partition is not None else detail
        super().__init__(message)

    def tagged(self, partition: int) -> "StructSolveError":
        """Return a copy of this error attributed to a partition index."""
        clone = type(self).__new__(type(self))
        clone.__dict__.update(self.__dict__)
        StructSolveError.__init__(clone, self.detail, partition)
        return clone


class InputError(StructSolveError):
    exit_code = 1


class NumericError(StructSolveError):
    exit_code = 2


# structmat
class DimensionMismatch(InputError):
    code = "DimensionMismatch"


class InvalidBandwidth(InputError):
    code = "InvalidBandwidth"


class CornerForbidden(InputError):
    code = "CornerForbidden"


class InvalidParameter(InputError):
    code = "InvalidParameter"


class TooLargeForDense(InputError):
    code = "TooLargeForDense"


class ParseError(InputError):
    code = "ParseError"

    def __init__(self, detail: str = "", line: Optional[int] = None):
        self.line = line
        if line is not None:
            detail = f"line {line}: {detail}"
        super().__init__(detail)

    def tagged(self, partition: int) -> "StructSolveError":
        return self


class UnsupportedVersion(InputError):
    code = "UnsupportedVersion"


# partition
class TooManyPartitions(InputError):
    code = "TooManyPartitions"


class UnsupportedKind(InputError):
    code = "UnsupportedKind"


class IndexOutOfRange(InputError):
    code = "IndexOutOfRange"


class NothingToPermute(InputError):
    code = "NothingToPermute"


class UnsupportedStructure(InputError):
    code = "UnsupportedStructure"


# configuration
class InvalidInterval(InputError):
    code = "InvalidInterval"


class InvalidConfig(InputError):
    code = "InvalidConfig"


# localfact / parfact
class ZeroPivot(NumericError):
    code = "ZeroPivot"


class SingularBlock(NumericError):
    code = "SingularBlock"


class ExhaustedBody(NumericError):
    code = "ExhaustedBody"


class SingularFactor(NumericError):
    code = "SingularFactor"


class SingularReducedSystem(NumericError):
    code = "SingularReducedSystem"


# odeparallel / parareal
class StepTooLarge(NumericError):
    code = "StepTooLarge"


class SingularWindow(NumericError):
    code = "SingularWindow"


class ExpmFailure(NumericError):
    code = "ExpmFailure"


class NotConverged(NumericError):
    code = "NotConverged"
