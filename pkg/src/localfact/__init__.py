from .factorization import (
    DEFAULT_PIVOT_TOL,
    ExtraSeparator,
    LocalFactorization,
    Segment,
    Strategy,
    factor,
    factor_arce,
    factor_cyclic_reduction,
    factor_lu,
    factor_lu_pivot,
    factor_lud,
    factor_qr,
    scan_chunks,
)
from .phases import backward_phase, forward_phase, local_apply_N_inv, local_apply_S_inv, local_solve

__all__ = [
    "DEFAULT_PIVOT_TOL",
    "ExtraSeparator",
    "LocalFactorization",
    "Segment",
    "Strategy",
    "backward_phase",
    "factor",
    "factor_arce",
    "factor_cyclic_reduction",
    "factor_lu",
    "factor_lu_pivot",
    "factor_lud",
    "factor_qr",
    "forward_phase",
    "local_apply_N_inv",
    "local_apply_S_inv",
    "local_solve",
    "scan_chunks",
]
