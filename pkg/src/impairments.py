"""Transmitter and receiver distortion models.

Three scenarios share one entry point, :func:`apply_scenario`:

* ``ideal``      y = H x + z
* ``additive``   y = H (x + eta_tx) + eta_rx + z, with eta_tx ~ CN(0, k_tx I)
                 and eta_rx ~ CN(0, k_rx H H^H)
* ``realistic``  y = ADC(H PA(x) + z), a Saleh power amplifier and a uniform
                 low-resolution ADC applied per I/Q component

All functions accept a leading batch axis: ``x`` of shape (..., Nt) with
``H`` of shape (Nr, Nt) or (..., Nr, Nt).
"""

import enum
from dataclasses import dataclass, field
from functools import cached_property

import numpy as np

from .core import RngStream, sample_complex_gaussian
from .errors import InvalidArgumentError
from .logger import logger

SATURATION_WARN_RATE = 0.2


class Scenario(str, enum.Enum):
    IDEAL = "ideal"
    ADDITIVE = "additive"
    REALISTIC = "realistic"

    @classmethod
    def parse(cls, value: "Scenario | str") -> "Scenario":
        try:
            return cls(value)
        except ValueError:
            raise InvalidArgumentError(f"unknown scenario {value!r}") from None


@dataclass(frozen=True)
class AdditiveImpairment:
    kappa_tx: float = 0.05**2
    kappa_rx: float = 0.05**2

    def __post_init__(self):
        if self.kappa_tx < 0 or self.kappa_rx < 0:
            raise InvalidArgumentError(
                f"kappas must be >= 0, got kappa_tx={self.kappa_tx} kappa_rx={self.kappa_rx}"
            )


@dataclass(frozen=True)
class SalehPa:
    alpha_a: float = 1.96
    eps_a: float = 0.99
    alpha_phi: float = 2.53
    eps_phi: float = 2.82

    def __post_init__(self):
        if self.alpha_a <= 0:
            raise InvalidArgumentError(f"alpha_a must be > 0, got {self.alpha_a}")
        # 1 + eps |x|^2 > 0 for every x.
        if self.eps_a < 0 or self.eps_phi < 0:
            raise InvalidArgumentError(
                f"eps_a and eps_phi must be >= 0, got {self.eps_a}, {self.eps_phi}"
            )

    def amplitude(self, magnitude: np.ndarray) -> np.ndarray:
        return self.alpha_a * magnitude / (1.0 + self.eps_a * magnitude**2)

    def phase_shift(self, magnitude: np.ndarray) -> np.ndarray:
        return self.alpha_phi * magnitude**2 / (1.0 + self.eps_phi * magnitude**2)


@dataclass(frozen=True)
class UniformAdc:
    """Mid-rise uniform quantizer with 2^bits levels spaced ``step`` apart.

    For bits=3 and step=0.5 the levels are -1.75, -1.25, ..., 1.75.
    ``gain`` scales the input before quantization.
    """

    bits: int = 3
    step: float = 0.5
    gain: float = 1.0

    def __post_init__(self):
        if self.bits < 1:
            raise InvalidArgumentError(f"ADC needs at least one bit, got {self.bits}")
        if self.step <= 0 or self.gain <= 0:
            raise InvalidArgumentError(f"step and gain must be > 0, got {self.step}, {self.gain}")

    @cached_property
    def levels(self) -> np.ndarray:
        count = 2**self.bits
        return -(count - 1) * self.step / 2.0 + self.step * np.arange(count)

    @cached_property
    def boundaries(self) -> np.ndarray:
        levels = self.levels
        return (levels[:-1] + levels[1:]) / 2.0

    def quantize_real(self, values: np.ndarray) -> np.ndarray:
        # side="left" gives b_{k-1} < v <= b_k.
        return self.levels[np.searchsorted(self.boundaries, values, side="left")]

    def saturation_rate(self, r: np.ndarray) -> float:
        edge = self.levels[-1] + self.step / 2.0
        parts = np.concatenate([np.ravel(r.real), np.ravel(r.imag)]) * self.gain
        return float(np.mean(np.abs(parts) > edge)) if parts.size else 0.0


@dataclass(frozen=True)
class ImpairmentModel:
    additive: AdditiveImpairment = field(default_factory=AdditiveImpairment)
    pa: SalehPa = field(default_factory=SalehPa)
    adc: UniformAdc = field(default_factory=UniformAdc)


def additive_tx(rng: RngStream, x: np.ndarray, kappa_tx: float) -> np.ndarray:
    x = np.asarray(x, dtype=np.complex128)
    if kappa_tx == 0:
        return x.copy()
    return x + sample_complex_gaussian(rng, x.shape, kappa_tx)


def additive_rx(rng: RngStream, r: np.ndarray, h: np.ndarray, kappa_rx: float) -> np.ndarray:
    """Add eta_rx ~ CN(0, kappa_rx H H^H), realized as H w with w ~ CN(0, kappa_rx I)."""
    r = np.asarray(r, dtype=np.complex128)
    h = np.asarray(h, dtype=np.complex128)
    if h.shape[-2] != r.shape[-1]:
        raise InvalidArgumentError(f"channel {h.shape} does not match receive vector {r.shape}")
    if kappa_rx == 0:
        return r.copy()
    w = sample_complex_gaussian(rng, r.shape[:-1] + (h.shape[-1],), kappa_rx)
    return r + _apply_channel(h, w)


def saleh_pa(x, pa: SalehPa = SalehPa()):
    """Elementwise PA(x) = A(|x|) exp(j(angle(x) + Phi(|x|)))."""
    x = np.asarray(x, dtype=np.complex128)
    magnitude = np.abs(x)
    out = pa.amplitude(magnitude) * np.exp(1j * (np.angle(x) + pa.phase_shift(magnitude)))
    return out if out.ndim else out.item()


def adc_quantize(r, adc: UniformAdc = UniformAdc()):
    r = np.asarray(r, dtype=np.complex128) * adc.gain
    out = adc.quantize_real(r.real) + 1j * adc.quantize_real(r.imag)
    return out if out.ndim else out.item()


def apply_scenario(
    rng: RngStream,
    scenario: Scenario | str,
    x: np.ndarray,
    h: np.ndarray,
    sigma2: float,
    model: ImpairmentModel = ImpairmentModel(),
) -> np.ndarray:
    """Pass symbol vectors through f_rx(H f_tx(x) + z).

    Draw order is fixed (eta_tx, eta_rx, z) so one stream reproduces a frame.
    """
    scenario = Scenario.parse(scenario)
    x = np.asarray(x, dtype=np.complex128)
    h = np.asarray(h, dtype=np.complex128)
    if h.shape[-1] != x.shape[-1]:
        raise InvalidArgumentError(f"channel {h.shape} does not match symbol vector {x.shape}")
    out_shape = np.broadcast_shapes(x.shape[:-1], h.shape[:-2]) + (h.shape[-2],)

    if scenario is Scenario.IDEAL:
        return _apply_channel(h, x) + _awgn(rng, out_shape, sigma2)

    if scenario is Scenario.ADDITIVE:
        s = additive_tx(rng, x, model.additive.kappa_tx)
        r = additive_rx(rng, np.broadcast_to(_apply_channel(h, s), out_shape), h, model.additive.kappa_rx)
        return r + _awgn(rng, out_shape, sigma2)

    r = _apply_channel(h, saleh_pa(x, model.pa)) + _awgn(rng, out_shape, sigma2)
    rate = model.adc.saturation_rate(r)
    if rate > SATURATION_WARN_RATE:
        logger.warning(f"ADC saturates on {rate:.1%} of I/Q samples; consider adc_gain < 1")
    else:
        logger.debug(f"ADC saturation rate {rate:.2%}")
    return np.asarray(adc_quantize(r, model.adc))


def _apply_channel(h: np.ndarray, x: np.ndarray) -> np.ndarray:
    return (h @ x[..., None])[..., 0]


def _awgn(rng: RngStream, shape, sigma2: float) -> np.ndarray:
    if sigma2 == 0:
        return np.zeros(shape, dtype=np.complex128)
    return sample_complex_gaussian(rng, shape, sigma2)
