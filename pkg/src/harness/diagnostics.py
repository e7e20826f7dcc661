"""Per-frame CSV dumps of the EMNL fit and of DNN training."""

import csv
from pathlib import Path

import numpy as np

from ..emnl import md_detect
from ..errors import ResultsIOError
from ..robust_train import TrainingLog
from .frame import FrameOutcome

TRAINING_COLUMNS = ("epoch", "lr", "mean_loss", "n_false", "n_clean", "n_reassignable", "agreement")


def frame_prefix(snr_index: int, frame_index: int) -> str:
    return f"snr{snr_index:02d}_frame{frame_index:05d}"


def dump_frame(directory: Path, snr_index: int, frame_index: int, outcome: FrameOutcome) -> list[Path]:
    """Write whatever the frame's detectors recorded; returns the files written."""
    ctx = outcome.context
    if ctx is None:
        return []
    prefix = directory / frame_prefix(snr_index, frame_index)
    written = []
    if ctx.emnl_history:
        params = ctx.md_params()
        written.append(_write(f"{prefix}_emnl_loglik.csv", ("iteration", "loglik"), enumerate(ctx.emnl_history)))
        written.append(_write(f"{prefix}_emnl_theta.csv", None, params.theta.tolist()))
    if ctx.training_logs:
        label_correct = md_detect(ctx.signals, ctx.md_params(), ctx.book) == outcome.true_indexes
        for name, log in ctx.training_logs.items():
            written.append(_write(f"{prefix}_training_{name}.csv", TRAINING_COLUMNS, _training_rows(log)))
            written.append(
                _write(
                    f"{prefix}_losses_{name}.csv",
                    ("epoch", "sample", "loss", "label_correct"),
                    _loss_rows(log, label_correct),
                )
            )
    return written


def _training_rows(log: TrainingLog):
    for r in log.epochs:
        yield (r.epoch, r.lr, r.mean_loss, r.n_false, r.n_clean, r.n_reassignable, r.agreement)


def _loss_rows(log: TrainingLog, label_correct: np.ndarray):
    for epoch, losses in sorted(log.loss_snapshots.items()):
        for sample, loss in enumerate(losses):
            yield (epoch, sample, float(loss), int(label_correct[sample]))


def _write(path: str, header, rows) -> Path:
    try:
        with open(path, "w", newline="", encoding="utf-8") as f:
            writer = csv.writer(f, lineterminator="\n")
            if header:
                writer.writerow(header)
            writer.writerows(rows)
    except OSError as e:
        raise ResultsIOError(f"cannot write diagnostics to {path}: {e}") from e
    return Path(path)
