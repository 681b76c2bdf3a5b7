from .matrix import (
    CORNER_KINDS,
    MatrixKind,
    StructuredMatrix,
    from_blocks,
    layout_length,
    make,
    matvec,
    pack,
    to_dense,
    validate_shape,
)
from .generators import generate_random, make_rng
from .io import parse_matrix, parse_vector, write_matrix, write_vector

__all__ = [
    "CORNER_KINDS",
    "MatrixKind",
    "StructuredMatrix",
    "from_blocks",
    "generate_random",
    "layout_length",
    "make",
    "make_rng",
    "matvec",
    "pack",
    "parse_matrix",
    "parse_vector",
    "to_dense",
    "validate_shape",
    "write_matrix",
    "write_vector",
]
