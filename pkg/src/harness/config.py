"""Experiment configuration.

Values resolve in layers: dataclass defaults, then a ``key = value`` file,
then ``MIMOSIM_<KEY>`` environment variables, then CLI flags.
"""

import os
from collections.abc import Mapping
from dataclasses import asdict, dataclass, field, fields, replace
from pathlib import Path

from ..constellation import make_qam
from ..detectors import available
from ..emnl import EmnlSettings
from ..errors import ConfigError, InvalidArgumentError
from ..estimation import make_pilots
from ..impairments import AdditiveImpairment, ImpairmentModel, SalehPa, Scenario, UniformAdc
from ..robust_train import TrainingHyperparams

ENV_PREFIX = "MIMOSIM_"
TRUE_WORDS = {"1", "true", "yes", "on"}
FALSE_WORDS = {"0", "false", "no", "off"}


def _bool(text: str) -> bool:
    word = text.strip().lower()
    if word in TRUE_WORDS:
        return True
    if word in FALSE_WORDS:
        return False
    raise ValueError(f"not a boolean: {text!r}")


def _items(text: str) -> list[str]:
    return [item.strip() for item in text.split(",") if item.strip()]


def _floats(text: str) -> tuple[float, ...]:
    return tuple(float(item) for item in _items(text))


def _ints(text: str) -> tuple[int, ...]:
    return tuple(int(item) for item in _items(text))


def _names(text: str) -> tuple[str, ...]:
    return tuple(_items(text))


def _optional_str(text: str) -> str | None:
    text = text.strip()
    return text or None


def _opt(default, parse, help_text=""):
    return field(default=default, metadata={"parse": parse, "help": help_text})


@dataclass(frozen=True)
class ExperimentConfig:
    nt: int = _opt(2, int, "transmit antennas")
    nr: int = _opt(8, int, "receive antennas")
    snr_db: tuple[float, ...] = _opt((0.0, 4.0, 8.0, 12.0), _floats, "comma-separated SNR points in dB")
    scenario: str = _opt("additive", str, "ideal, additive or realistic")
    zeta: float = _opt(1.0, float, "temporal correlation of the channel (1 = time-invariant)")
    t: int = _opt(500, int, "data slots per frame")
    t_p: int = _opt(4, int, "pilot slots per frame")
    frames: int = _opt(10, int, "Monte-Carlo frames per SNR point")
    seed: int = _opt(0, int, "master seed")
    detectors: tuple[str, ...] = _opt(("coarse_ml", "model_driven", "data_driven"), _names, "detectors to run")
    modulation_order: int = _opt(4, int, "square QAM order")
    freeze_pilots: bool = _opt(False, _bool, "hold the channel fixed over the pilot slots")
    kappa_tx: float = _opt(0.05**2, float, "additive transmitter distortion power")
    kappa_rx: float = _opt(0.05**2, float, "additive receiver distortion power")
    pa_alpha_a: float = _opt(1.96, float, "Saleh AM/AM gain")
    pa_eps_a: float = _opt(0.99, float, "Saleh AM/AM compression")
    pa_alpha_phi: float = _opt(2.53, float, "Saleh AM/PM gain")
    pa_eps_phi: float = _opt(2.82, float, "Saleh AM/PM compression")
    adc_bits: int = _opt(3, int, "ADC resolution in bits")
    adc_gain: float = _opt(1.0, float, "gain applied before the ADC")
    emnl_iterations: int = _opt(20, int, "EMNL iterations")
    emnl_eps: float = _opt(1e-8, float, "responsibility floor")
    nu_floor: float = _opt(1e-12, float, "lower bound on class variances")
    epochs: int = _opt(100, int, "DNN training epochs")
    warmup: int = _opt(40, int, "warm-up epochs")
    n_batch: int = _opt(4, int, "mini-batches per epoch")
    tau: float = _opt(0.1, float, "fraction of each batch treated as false")
    ema_alpha: float = _opt(0.1, float, "EMA weight of the prediction in target updates")
    select_eps: float = _opt(1e-8, float, "clean-sample confidence margin")
    lr0: float = _opt(0.01, float, "initial learning rate")
    hidden: tuple[int, ...] = _opt((100, 100), _ints, "hidden layer widths")
    workers: int = _opt(1, int, "frames processed in parallel")
    record_timing: bool = _opt(False, _bool, "write wall-clock seconds (false writes 0.0)")
    out: str | None = _opt(None, _optional_str, "results path")
    format: str = _opt("csv", str, "csv or json")
    debug_dumps: str | None = _opt(None, _optional_str, "directory for per-frame diagnostic CSVs")

    def validate(self) -> "ExperimentConfig":
        checks = [
            (self.nt >= 1 and self.nr >= 1, f"nt and nr must be >= 1, got {self.nt}, {self.nr}"),
            (self.frames >= 1, f"frames must be >= 1, got {self.frames}"),
            (self.t >= 1, f"t must be >= 1, got {self.t}"),
            (self.t_p >= self.nt, f"t_p={self.t_p} must be >= nt={self.nt}"),
            (len(self.snr_db) > 0, "snr_db is empty"),
            (0.0 <= self.zeta <= 1.0, f"zeta must lie in [0, 1], got {self.zeta}"),
            (len(self.detectors) > 0, "no detectors selected"),
            (self.workers >= 1, f"workers must be >= 1, got {self.workers}"),
            (self.format in ("csv", "json"), f"format must be csv or json, got {self.format}"),
        ]
        for ok, message in checks:
            if not ok:
                raise ConfigError(message)
        unknown = [name for name in self.detectors if name not in available()]
        if unknown:
            raise ConfigError(f"unknown detectors {', '.join(unknown)}; available: {', '.join(available())}")
        if len(set(self.detectors)) != len(self.detectors):
            raise ConfigError(f"duplicate detectors in {', '.join(self.detectors)}")
        try:
            Scenario.parse(self.scenario)
            self.impairment_model()
            self.emnl_settings()
            self.training_hyperparams()
            make_pilots(make_qam(self.modulation_order, self.nt), self.nt, self.t_p)
        except InvalidArgumentError as e:
            raise ConfigError(str(e)) from e
        return self

    def impairment_model(self) -> ImpairmentModel:
        return ImpairmentModel(
            additive=AdditiveImpairment(self.kappa_tx, self.kappa_rx),
            pa=SalehPa(self.pa_alpha_a, self.pa_eps_a, self.pa_alpha_phi, self.pa_eps_phi),
            adc=UniformAdc(bits=self.adc_bits, gain=self.adc_gain),
        )

    def emnl_settings(self) -> EmnlSettings:
        return EmnlSettings(iterations=self.emnl_iterations, eps=self.emnl_eps, nu_floor=self.nu_floor)

    def training_hyperparams(self) -> TrainingHyperparams:
        return TrainingHyperparams(
            epochs=self.epochs,
            warmup=self.warmup,
            n_batch=self.n_batch,
            tau=self.tau,
            alpha=self.ema_alpha,
            eps=self.select_eps,
            lr0=self.lr0,
            hidden=self.hidden,
        )

    def as_dict(self) -> dict:
        resolved = asdict(self)
        for key, value in resolved.items():
            if isinstance(value, tuple):
                resolved[key] = list(value)
        return resolved


def config_keys() -> list[str]:
    return [f.name for f in fields(ExperimentConfig)]


def parse_value(key: str, text: str):
    field_by_name = {f.name: f for f in fields(ExperimentConfig)}
    if key not in field_by_name:
        raise ConfigError(f"unknown config key {key}")
    try:
        return field_by_name[key].metadata["parse"](text)
    except ValueError as e:
        raise ConfigError(f"bad value for {key}: {text!r} ({e})") from e


def read_config_file(path: str | Path) -> dict[str, str]:
    try:
        lines = Path(path).read_text(encoding="utf-8").splitlines()
    except OSError as e:
        raise ConfigError(f"cannot read config {path}: {e}") from e
    values: dict[str, str] = {}
    keys = set(config_keys())
    for number, line in enumerate(lines, start=1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"{path}:{number}: expected 'key = value'")
        key, value = (part.strip() for part in line.split("=", 1))
        if key not in keys:
            raise ConfigError(f"{path}:{number}: unknown key {key}")
        values[key] = value
    return values


def env_overrides(env: Mapping[str, str]) -> dict[str, str]:
    return {key: env[ENV_PREFIX + key.upper()] for key in config_keys() if ENV_PREFIX + key.upper() in env}


def load_config(
    path: str | Path | None = None,
    env: Mapping[str, str] | None = None,
    overrides: Mapping[str, str] | None = None,
) -> ExperimentConfig:
    """Resolve defaults < file < environment < overrides and validate."""
    raw: dict[str, str] = {}
    if path is not None:
        raw.update(read_config_file(path))
    raw.update(env_overrides(os.environ if env is None else env))
    raw.update({k: v for k, v in (overrides or {}).items() if v is not None})
    values = {key: parse_value(key, text) for key, text in raw.items()}
    return replace(ExperimentConfig(), **values).validate()
