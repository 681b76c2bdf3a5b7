"""
Text formats. Every real is written as a hexadecimal float literal so that
write-then-parse is bit-exact; parsers also accept decimal literals. Lines
starting with ``#`` are comments.

    STRUCTMAT 1 <kind> <n> <m> <s> <r> [cr cc [lr lc]]
    VEC 1 <length>
"""

import logging
import re
from typing import Dict, Iterable, Iterator, List, Optional, Tuple

import numpy as np

from ..shared.errors import InputError, ParseError, UnsupportedVersion
from .matrix import MatrixKind, StructuredMatrix, layout_length, make, pack, validate_shape

logger = logging.getLogger(__name__)

FORMAT_VERSION = "1"
_META_RE = re.compile(r"^#\s*rng\s+(\S+)\s+seed=(\S+)")
_HEX_RE = re.compile(r"^[+-]?0[xX]")


def content_lines(text: str) -> Iterator[Tuple[int, str]]:
    """Yield (1-based line number, stripped line) for non-blank, non-comment lines."""
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if line and not line.startswith("#"):
            yield lineno, line


def parse_real(token: str, lineno: int) -> float:
    """Decimal literal, or a hex float when the token carries the 0x prefix."""
    try:
        if _HEX_RE.match(token):
            return float.fromhex(token)
        return float(token)
    except ValueError:
        raise ParseError(f"not a real number: {token!r}", lineno) from None


def parse_count(token: str, lineno: int, name: str) -> int:
    try:
        value = int(token)
    except ValueError:
        raise ParseError(f"{name} must be an integer, got {token!r}", lineno) from None
    if value < 0:
        raise ParseError(f"{name} must be non-negative, got {value}", lineno)
    return value


def check_header(tokens: List[str], magic: str, lineno: int) -> None:
    if not tokens or tokens[0] != magic:
        raise ParseError(f"expected {magic} header", lineno)
    if len(tokens) < 2:
        raise ParseError("missing format version", lineno)
    if tokens[1] != FORMAT_VERSION:
        raise UnsupportedVersion(f"{magic} version {tokens[1]} (supported: {FORMAT_VERSION})")


def read_reals(lines: Iterable[Tuple[int, str]], count: int, last_line: int) -> np.ndarray:
    """Read exactly ``count`` reals, one per line; extra content is an error."""
    values = np.empty(count)
    k = 0
    for lineno, line in lines:
        if k == count:
            raise ParseError("unexpected trailing data", lineno)
        if " " in line or "\t" in line:
            raise ParseError("expected one real per line", lineno)
        values[k] = parse_real(line, lineno)
        k += 1
        last_line = lineno
    if k < count:
        raise ParseError(f"expected {count} reals, found {k}", last_line + 1)
    return values


def format_reals(values: Iterable[float]) -> List[str]:
    return [float(v).hex() for v in values]


def _meta_from_comments(text: str) -> Dict[str, str]:
    for raw in text.splitlines():
        match = _META_RE.match(raw.strip())
        if match:
            return {"rng": match.group(1), "seed": match.group(2)}
    return {}


def parse_matrix(text: str) -> StructuredMatrix:
    """Parse a STRUCTMAT document."""
    lines = content_lines(text)
    try:
        lineno, header = next(lines)
    except StopIteration:
        raise ParseError("empty input", 1) from None
    tokens = header.split()
    check_header(tokens, "STRUCTMAT", lineno)
    if len(tokens) not in (7, 9, 11):
        raise ParseError(f"STRUCTMAT header needs 7, 9 or 11 fields, got {len(tokens)}", lineno)

    try:
        kind = MatrixKind.parse(tokens[2])
    except InputError as e:
        raise ParseError(e.detail, lineno) from None
    n, m, s, r = (parse_count(t, lineno, name) for t, name in zip(tokens[3:7], "nmsr"))
    corner_shape: Optional[Tuple[int, int]] = None
    lower_shape: Optional[Tuple[int, int]] = None
    if len(tokens) >= 9:
        cr, cc = parse_count(tokens[7], lineno, "corner rows"), parse_count(tokens[8], lineno, "corner cols")
        if (cr == 0) != (cc == 0):
            raise ParseError(f"corner shape {cr}x{cc} is degenerate", lineno)
        corner_shape = (cr, cc) if cr else None
    if len(tokens) == 11:
        lr = parse_count(tokens[9], lineno, "lower corner rows")
        lc = parse_count(tokens[10], lineno, "lower corner cols")
        if lr == 0 or lc == 0:
            raise ParseError(f"lower corner shape {lr}x{lc} is degenerate", lineno)
        lower_shape = (lr, lc)

    try:
        validate_shape(kind, n, m, s, r, corner_shape, lower_shape)
    except InputError as e:
        raise ParseError(f"{e.code}: {e.detail}", lineno) from None

    n_band = layout_length(kind, n, m, s, r)
    n_upper = 0 if corner_shape is None else corner_shape[0] * corner_shape[1]
    n_lower = 0 if lower_shape is None else lower_shape[0] * lower_shape[1]
    values = read_reals(lines, n_band + n_upper + n_lower, lineno)

    corner = None if corner_shape is None else values[n_band:n_band + n_upper].reshape(corner_shape)
    lower = None if lower_shape is None else values[n_band + n_upper:].reshape(lower_shape)
    try:
        return make(kind, n, m, s, r, values[:n_band], corner, lower, _meta_from_comments(text))
    except InputError as e:
        raise ParseError(f"{e.code}: {e.detail}", lineno) from None


def write_matrix(A: StructuredMatrix) -> str:
    """Serialize ``A`` as a STRUCTMAT document."""
    header = ["STRUCTMAT", FORMAT_VERSION, A.kind.value, str(A.n), str(A.m), str(A.s), str(A.r)]
    if A.corner is not None:
        header += [str(d) for d in A.corner.shape]
    elif A.lower_corner is not None:
        header += ["0", "0"]
    if A.lower_corner is not None:
        header += [str(d) for d in A.lower_corner.shape]

    out = [" ".join(header)]
    if "rng" in A.meta:
        out.append(f"# rng {A.meta['rng']} seed={A.meta.get('seed', '')}")
    out += format_reals(pack(A))
    if A.corner is not None:
        out += format_reals(A.corner.ravel())
    if A.lower_corner is not None:
        out += format_reals(A.lower_corner.ravel())
    return "\n".join(out) + "\n"


def parse_vector(text: str) -> np.ndarray:
    """Parse a VEC document into a float64 array."""
    lines = content_lines(text)
    try:
        lineno, header = next(lines)
    except StopIteration:
        raise ParseError("empty input", 1) from None
    tokens = header.split()
    check_header(tokens, "VEC", lineno)
    if len(tokens) != 3:
        raise ParseError(f"VEC header needs 3 fields, got {len(tokens)}", lineno)
    length = parse_count(tokens[2], lineno, "length")
    return read_reals(lines, length, lineno)


def write_vector(x) -> str:
    x = np.asarray(x, dtype=np.float64).ravel()
    return "\n".join([f"VEC {FORMAT_VERSION} {x.size}"] + format_reals(x)) + "\n"
