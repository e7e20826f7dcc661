import numpy as np
import numpy.typing as npt
import scipy.linalg

from ..errors import InvalidArgumentError, RankDeficientError
from .rng import RngStream

ComplexVector = npt.NDArray[np.complex128]
ComplexMatrix = npt.NDArray[np.complex128]

# Gram matrices here are at most 16x16; anything above this is numerically singular.
MAX_GRAM_CONDITION = 1e12


def sample_complex_gaussian(rng: RngStream, shape, variance: float) -> np.ndarray:
    """Draw i.i.d. CN(0, variance) entries: real and imaginary parts each carry variance/2."""
    if variance < 0:
        raise InvalidArgumentError(f"variance must be >= 0, got {variance}")
    shape = (shape,) if isinstance(shape, (int, np.integer)) else tuple(shape)
    scale = np.sqrt(variance / 2.0)
    draws = rng.standard_normal(shape + (2,))
    return scale * (draws[..., 0] + 1j * draws[..., 1])


def hermitian(a: np.ndarray) -> np.ndarray:
    return np.conj(np.swapaxes(a, -1, -2))


def ls_solve(a: ComplexMatrix, b: ComplexMatrix) -> ComplexMatrix:
    a = np.asarray(a, dtype=np.complex128)
    b = np.asarray(b, dtype=np.complex128)
    if a.ndim != 2 or b.ndim != 2 or a.shape[1] != b.shape[1]:
        raise InvalidArgumentError(f"incompatible shapes {a.shape} and {b.shape}")
    gram = a @ hermitian(a)
    if not np.all(np.isfinite(gram)) or np.linalg.cond(gram) > MAX_GRAM_CONDITION:
        raise RankDeficientError(f"Gram matrix of shape {gram.shape} is singular")
    try:
        # G X^H = A B^H with G Hermitian.
        solution = scipy.linalg.solve(gram, a @ hermitian(b), assume_a="her")
    except np.linalg.LinAlgError as e:
        raise RankDeficientError(f"Gram matrix solve failed: {e}") from e
    return hermitian(solution)


def check_finite(name: str, values: np.ndarray) -> None:
    if not np.all(np.isfinite(values)):
        raise InvalidArgumentError(f"{name} contains non-finite entries")
