from dataclasses import dataclass
from functools import cached_property
import math

import numpy as np

from .errors import InvalidArgumentError

ALPHABET_TOLERANCE = 1e-9


@dataclass(frozen=True, eq=False)
class SymbolBook:
    """Constellation plus the enumerated symbol-vector set.

    ``vectors[k]`` is the mixed-radix-M expansion of k with antenna 0 as
    the most significant digit; K = M ** nt.
    """

    alphabet: np.ndarray
    nt: int

    def __post_init__(self):
        if self.nt < 1:
            raise InvalidArgumentError(f"nt must be >= 1, got {self.nt}")
        if self.alphabet.ndim != 1 or self.alphabet.size < 2:
            raise InvalidArgumentError("alphabet must be a 1-D array with at least two points")

    @property
    def m(self) -> int:
        return self.alphabet.size

    @property
    def k(self) -> int:
        return self.m**self.nt

    @cached_property
    def digits(self) -> np.ndarray:
        """(K, nt) alphabet indices of every symbol vector."""
        index = np.arange(self.k)[:, None]
        weights = self.m ** np.arange(self.nt - 1, -1, -1)[None, :]
        return (index // weights) % self.m

    @cached_property
    def vectors(self) -> np.ndarray:
        return self.alphabet[self.digits]

    def index_to_vector(self, k: int) -> np.ndarray:
        if not 0 <= k < self.k:
            raise InvalidArgumentError(f"index {k} outside 0..{self.k - 1}")
        return self.vectors[k].copy()

    def vector_to_index(self, x) -> int:
        return int(self.vectors_to_indices(np.asarray(x)[None, :])[0])

    def vectors_to_indices(self, xs: np.ndarray) -> np.ndarray:
        xs = np.asarray(xs, dtype=np.complex128)
        if xs.ndim != 2 or xs.shape[1] != self.nt:
            raise InvalidArgumentError(f"expected (n, {self.nt}) symbol vectors, got {xs.shape}")
        distance = np.abs(xs[..., None] - self.alphabet[None, None, :])
        nearest = distance.argmin(axis=-1)
        if np.any(np.take_along_axis(distance, nearest[..., None], -1) > ALPHABET_TOLERANCE):
            raise InvalidArgumentError("symbol vector has entries outside the alphabet")
        weights = self.m ** np.arange(self.nt - 1, -1, -1)
        return nearest @ weights

    def symbol_errors(self, k_true, k_hat):
        mismatches = (self.digits[np.asarray(k_true)] != self.digits[np.asarray(k_hat)]).sum(axis=-1)
        return int(mismatches) if np.ndim(mismatches) == 0 else mismatches


def make_qam(order: int, nt: int) -> SymbolBook:
    side = math.isqrt(order)
    if order < 4 or side * side != order:
        raise InvalidArgumentError(f"QAM order must be a square >= 4, got {order}")
    levels = np.arange(-(side - 1), side, 2, dtype=np.float64)
    points = (levels[:, None] + 1j * levels[None, :]).ravel()
    points /= np.sqrt(np.mean(np.abs(points) ** 2))
    return SymbolBook(points, nt)


def make_qam4(nt: int) -> SymbolBook:
    return make_qam(4, nt)


def symbol_errors(book: SymbolBook, k_true, k_hat):
    return book.symbol_errors(k_true, k_hat)
