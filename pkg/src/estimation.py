from dataclasses import dataclass

import numpy as np
import scipy.linalg

from .constellation import SymbolBook
from .core import check_finite, ls_solve
from .errors import InvalidArgumentError


@dataclass(frozen=True, eq=False)
class PilotBlock:
    x_p: np.ndarray
    y_p: np.ndarray

    def __post_init__(self):
        if self.x_p.ndim != 2 or self.y_p.ndim != 2 or self.x_p.shape[1] != self.y_p.shape[1]:
            raise InvalidArgumentError(f"pilot shapes {self.x_p.shape} and {self.y_p.shape} do not match")
        if self.x_p.shape[1] < self.x_p.shape[0]:
            raise InvalidArgumentError(f"T_p={self.x_p.shape[1]} is smaller than Nt={self.x_p.shape[0]}")
        check_finite("y_p", self.y_p)


def hadamard_order(nt: int) -> int:
    return 1 << max(0, (nt - 1).bit_length())


def make_pilots(book: SymbolBook, nt: int, t_p: int) -> np.ndarray:
    """Orthogonal pilot matrix with X_p X_p^H = T_p I.

    Rows are Sylvester-Hadamard sign patterns applied to one constellation
    point of unit modulus, repeated over blocks of the Hadamard order.
    """
    if t_p < nt:
        raise InvalidArgumentError(f"T_p={t_p} must be >= Nt={nt}")
    order = hadamard_order(nt)
    if t_p % order:
        raise InvalidArgumentError(f"T_p={t_p} must be a multiple of {order} for Nt={nt}")
    moduli = np.abs(book.alphabet)
    base = book.alphabet[np.argmin(np.abs(moduli - 1.0))]
    if not np.isclose(abs(base), 1.0):
        raise InvalidArgumentError("constellation has no unit-modulus point for orthogonal pilots")
    if not np.any(np.isclose(book.alphabet, -base)):
        raise InvalidArgumentError("constellation is not symmetric; cannot apply sign patterns")
    signs = np.tile(scipy.linalg.hadamard(order)[:nt], (1, t_p // order))
    return base * signs.astype(np.complex128)


def ls_estimate(block: PilotBlock) -> np.ndarray:
    """H_hat = Y_p X_p^H (X_p X_p^H)^-1."""
    return ls_solve(block.x_p, block.y_p)
