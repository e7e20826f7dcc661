import abc
import time
from dataclasses import dataclass, field

import numpy as np

from ..constellation import SymbolBook
from ..core import RngStream
from ..emnl import EmnlSettings, GaussianModelParams, NoisyDataset, run_emnl
from ..robust_train import TrainingHyperparams, TrainingLog


@dataclass(eq=False)
class FrameContext:
    """What the receiver knows about one frame, shared by every detector.

    ``true_indexes`` is simulator knowledge; detectors must only use it
    for diagnostics.
    """

    book: SymbolBook
    h_hat: np.ndarray
    sigma2: float
    coarse: NoisyDataset
    rng: RngStream
    emnl: EmnlSettings = field(default_factory=EmnlSettings)
    training: TrainingHyperparams = field(default_factory=TrainingHyperparams)
    true_indexes: np.ndarray | None = None
    collect_diagnostics: bool = False
    emnl_history: list[float] = field(default_factory=list)
    training_logs: dict[str, TrainingLog] = field(default_factory=dict)
    # Wall-clock cost of the shared EMNL fit and how often it was requested.
    md_seconds: float = 0.0
    md_requests: int = 0
    _md_params: GaussianModelParams | None = field(default=None, repr=False)

    @property
    def signals(self) -> np.ndarray:
        return self.coarse.signals

    @property
    def md_fitted(self) -> bool:
        return self._md_params is not None

    def md_params(self) -> GaussianModelParams:
        self.md_requests += 1
        if self._md_params is None:
            started = time.perf_counter()
            self._md_params = run_emnl(
                self.coarse,
                self.h_hat,
                self.sigma2,
                self.book,
                iterations=self.emnl.iterations,
                eps=self.emnl.eps,
                nu_floor=self.emnl.nu_floor,
                history=self.emnl_history if self.collect_diagnostics else None,
            )
            self.md_seconds = time.perf_counter() - started
        return self._md_params


class Detector(abc.ABC):
    name: str = ""

    @abc.abstractmethod
    def detect(self, ctx: FrameContext) -> np.ndarray:
        """Return the detected symbol-vector index of every data slot."""
