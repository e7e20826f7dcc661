"""One Monte-Carlo frame: channel, pilots, data, coarse labels and every detector."""

import time
from dataclasses import dataclass, field

import numpy as np

from ..channel import NoiseConfig, generate_trace
from ..constellation import SymbolBook, make_qam
from ..core import RngStream, derive_stream_id
from ..detectors import FrameContext, create
from ..emnl import NoisyDataset, coarse_detect
from ..estimation import PilotBlock, ls_estimate, make_pilots
from ..impairments import apply_scenario
from ..logger import logger
from .config import ExperimentConfig


@dataclass
class DetectorCounts:
    symbols: int = 0
    symbol_errors: int = 0
    vectors: int = 0
    vector_errors: int = 0
    seconds: float = 0.0

    def add(self, other: "DetectorCounts") -> None:
        self.symbols += other.symbols
        self.symbol_errors += other.symbol_errors
        self.vectors += other.vectors
        self.vector_errors += other.vector_errors
        self.seconds += other.seconds


@dataclass(eq=False)
class FrameOutcome:
    counts: dict[str, DetectorCounts]
    true_indexes: np.ndarray
    signals: np.ndarray
    h_hat: np.ndarray
    decisions: dict[str, np.ndarray] = field(default_factory=dict)
    context: FrameContext | None = None


def frame_rng(seed: int, snr_index: int, frame_index: int) -> RngStream:
    """Frame stream keyed by (seed, snr index, frame index), independent of scheduling."""
    return RngStream(seed, derive_stream_id(seed, snr_index, frame_index))


def run_frame(
    cfg: ExperimentConfig,
    snr_db: float,
    rng: RngStream,
    book: SymbolBook | None = None,
    collect_diagnostics: bool = False,
) -> FrameOutcome:
    """Transmit T_p pilots and T data vectors and run every configured detector on them."""
    book = book or make_qam(cfg.modulation_order, cfg.nt)
    sigma2 = NoiseConfig.from_snr_db(snr_db, cfg.nt).sigma2
    model = cfg.impairment_model()

    trace = generate_trace(
        rng.spawn("channel"),
        cfg.nt,
        cfg.nr,
        cfg.t_p + cfg.t,
        cfg.zeta,
        hold_slots=cfg.t_p if cfg.freeze_pilots else 1,
    )
    h_pilot, h_data = trace.split(cfg.t_p)
    true_indexes = rng.spawn("symbols").integers(0, book.k, size=cfg.t)

    x_p = make_pilots(book, cfg.nt, cfg.t_p)
    y_p = apply_scenario(rng.spawn("pilots"), cfg.scenario, x_p.T, h_pilot, sigma2, model).T
    h_hat = ls_estimate(PilotBlock(x_p, y_p))

    signals = apply_scenario(rng.spawn("data"), cfg.scenario, book.vectors[true_indexes], h_data, sigma2, model)
    coarse = NoisyDataset(coarse_detect(signals, h_hat, book), signals)

    ctx = FrameContext(
        book=book,
        h_hat=h_hat,
        sigma2=sigma2,
        coarse=coarse,
        rng=rng.spawn("detectors"),
        emnl=cfg.emnl_settings(),
        training=cfg.training_hyperparams(),
        true_indexes=true_indexes,
        collect_diagnostics=collect_diagnostics,
    )

    outcome = FrameOutcome({}, true_indexes, signals, h_hat, context=ctx if collect_diagnostics else None)
    for name in cfg.detectors:
        decided, elapsed = _timed_detect(create(name), ctx)
        outcome.decisions[name] = decided
        outcome.counts[name] = DetectorCounts(
            symbols=cfg.t * cfg.nt,
            symbol_errors=int(np.sum(book.symbol_errors(true_indexes, decided))),
            vectors=cfg.t,
            vector_errors=int(np.count_nonzero(decided != true_indexes)),
            seconds=elapsed if cfg.record_timing else 0.0,
        )
        logger.debug(
            f"{name}: {outcome.counts[name].symbol_errors}/{cfg.t * cfg.nt} symbol errors at {snr_db:g} dB"
        )
    return outcome


def _timed_detect(detector, ctx: FrameContext) -> tuple[np.ndarray, float]:
    """Decisions and wall-clock time; every detector that uses the shared EMNL fit is charged its cost."""
    requests, fitted_before = ctx.md_requests, ctx.md_fitted
    started = time.perf_counter()
    decided = np.asarray(detector.detect(ctx))
    elapsed = time.perf_counter() - started
    if fitted_before and ctx.md_requests > requests:
        elapsed += ctx.md_seconds
    return decided, elapsed
