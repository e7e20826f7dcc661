import threading
from collections.abc import Callable
from pathlib import Path

from ..constellation import make_qam
from ..logger import logger
from .config import ExperimentConfig
from .diagnostics import dump_frame
from .frame import DetectorCounts, frame_rng, run_frame
from .results import SerRecord, SerResult


def run_experiment(
    cfg: ExperimentConfig,
    progress: Callable[[int], None] | None = None,
) -> SerResult:
    """Run ``frames`` frames at every SNR point and aggregate the error counts.

    Frames are handed to ``cfg.workers`` threads; each frame owns a stream
    derived from (seed, snr index, frame index), so the totals do not depend
    on scheduling. ``progress`` is called with 1 after every finished frame.
    """
    cfg.validate()
    book = make_qam(cfg.modulation_order, cfg.nt)
    jobs = [(i, f) for i in range(len(cfg.snr_db)) for f in range(cfg.frames)]
    totals = {(name, i): DetectorCounts() for name in cfg.detectors for i in range(len(cfg.snr_db))}
    errors: list[BaseException] = []
    lock = threading.Lock()
    dumps = Path(cfg.debug_dumps) if cfg.debug_dumps else None
    if dumps is not None:
        dumps.mkdir(parents=True, exist_ok=True)

    def next_job():
        with lock:
            if errors or not jobs:
                return None
            return jobs.pop(0)

    def worker():
        while (job := next_job()) is not None:
            snr_index, frame_index = job
            try:
                outcome = run_frame(
                    cfg,
                    cfg.snr_db[snr_index],
                    frame_rng(cfg.seed, snr_index, frame_index),
                    book=book,
                    collect_diagnostics=dumps is not None,
                )
                if dumps is not None:
                    dump_frame(dumps, snr_index, frame_index, outcome)
            except BaseException as e:
                with lock:
                    errors.append(e)
                return
            with lock:
                for name, counts in outcome.counts.items():
                    totals[(name, snr_index)].add(counts)
            if progress is not None:
                progress(1)

    threads = [threading.Thread(target=worker, daemon=True) for _ in range(min(cfg.workers, len(jobs)))]
    for t in threads:
        t.start()
    for t in threads:
        t.join()
    if errors:
        raise errors[0]

    records = []
    for i, snr_db in enumerate(cfg.snr_db):
        for name in cfg.detectors:
            counts = totals[(name, i)]
            records.append(
                SerRecord(
                    detector=name,
                    snr_db=snr_db,
                    symbols=counts.symbols,
                    symbol_errors=counts.symbol_errors,
                    vectors=counts.vectors,
                    vector_errors=counts.vector_errors,
                    seconds=counts.seconds,
                )
            )
        summary = ", ".join(f"{r.detector}={r.ser:.3e}" for r in records[-len(cfg.detectors):])
        logger.info(f"SNR {snr_db:g} dB: SER {summary}")
    return SerResult(records, config=cfg.as_dict())
