from .linalg import (
    ComplexMatrix,
    ComplexVector,
    check_finite,
    hermitian,
    ls_solve,
    sample_complex_gaussian,
)
from .rng import RngStream, derive_stream_id

__all__ = [
    "ComplexMatrix",
    "ComplexVector",
    "RngStream",
    "check_finite",
    "derive_stream_id",
    "hermitian",
    "ls_solve",
    "sample_complex_gaussian",
]
