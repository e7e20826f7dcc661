from dataclasses import dataclass

import numpy as np

from .core import RngStream, sample_complex_gaussian
from .errors import InvalidArgumentError


@dataclass(frozen=True, eq=False)
class ChannelTrace:
    """Channel matrices for every slot of a frame, pilots first.

    ``matrices`` has shape (T_total, Nr, Nt).
    """

    matrices: np.ndarray
    zeta: float

    def __post_init__(self):
        if self.matrices.ndim != 3:
            raise InvalidArgumentError(f"expected (T, Nr, Nt) matrices, got {self.matrices.shape}")

    @property
    def slots(self) -> int:
        return self.matrices.shape[0]

    @property
    def nr(self) -> int:
        return self.matrices.shape[1]

    @property
    def nt(self) -> int:
        return self.matrices.shape[2]

    def split(self, t_p: int) -> tuple[np.ndarray, np.ndarray]:
        return self.matrices[:t_p], self.matrices[t_p:]


@dataclass(frozen=True)
class NoiseConfig:
    sigma2: float

    def __post_init__(self):
        if not self.sigma2 > 0:
            raise InvalidArgumentError(f"sigma2 must be > 0, got {self.sigma2}")

    @classmethod
    def from_snr_db(cls, snr_db: float, nt: int) -> "NoiseConfig":
        return cls(snr_to_sigma2(snr_db, nt))


def snr_to_sigma2(snr_db: float, nt: int) -> float:
    """SNR is Nt / sigma^2."""
    return nt / 10.0 ** (snr_db / 10.0)


def generate_trace(
    rng: RngStream,
    nt: int,
    nr: int,
    t_total: int,
    zeta: float,
    hold_slots: int = 1,
) -> ChannelTrace:
    """Rayleigh start followed by Gauss-Markov evolution.

    H[n] = zeta H[n-1] + sqrt(1 - zeta^2) G[n]. The first ``hold_slots``
    slots all carry H[1]; evolution starts after them (``hold_slots = T_p``
    freezes the channel over the pilots).
    """
    if not 0.0 <= zeta <= 1.0:
        raise InvalidArgumentError(f"zeta must lie in [0, 1], got {zeta}")
    if min(nt, nr, t_total) < 1:
        raise InvalidArgumentError(f"dimensions must be positive, got nt={nt} nr={nr} T={t_total}")
    hold_slots = max(1, min(hold_slots, t_total))
    h = np.empty((t_total, nr, nt), dtype=np.complex128)
    h[0] = sample_complex_gaussian(rng, (nr, nt), 1.0)
    h[1:hold_slots] = h[0]
    if zeta == 1.0:
        h[hold_slots:] = h[0]
        return ChannelTrace(h, zeta)
    innovations = sample_complex_gaussian(rng, (t_total - hold_slots, nr, nt), 1.0)
    drive = np.sqrt(1.0 - zeta**2)
    for n in range(hold_slots, t_total):
        h[n] = zeta * h[n - 1] + drive * innovations[n - hold_slots]
    return ChannelTrace(h, zeta)
