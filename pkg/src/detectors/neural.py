import abc

import numpy as np

from ..mlp import encode_input
from ..robust_train import TrainingLog, build_md_dataset, dd_detect, naive_train, train_dd
from .base import Detector, FrameContext
from .registry import register

# Shared so that both networks start from the same weights and batch order.
TRAINING_STREAM = "dnn-training"


class _NeuralDetector(Detector):
    @abc.abstractmethod
    def train(self, features, labels, ctx: FrameContext, log: TrainingLog | None): ...

    def detect(self, ctx: FrameContext) -> np.ndarray:
        md_labels, _ = build_md_dataset(ctx.coarse, ctx.md_params(), ctx.book)
        features = encode_input(ctx.signals, ctx.h_hat)
        log = TrainingLog() if ctx.collect_diagnostics else None
        state = self.train(features, md_labels, ctx, log)
        if log is not None:
            ctx.training_logs[self.name] = log
        return dd_detect(state, ctx.signals, ctx.h_hat)


@register
class DataDrivenDetector(_NeuralDetector):
    """DNN trained robustly on the model-driven labels of the same frame."""

    name = "data_driven"

    def train(self, features, labels, ctx, log):
        return train_dd(
            features, labels, ctx.book.k, ctx.training, ctx.rng.spawn(TRAINING_STREAM), log, ctx.true_indexes
        )


@register
class NaiveDnnDetector(_NeuralDetector):
    """Same DNN trained with the plain mean loss for every epoch."""

    name = "naive_dnn"

    def train(self, features, labels, ctx, log):
        return naive_train(
            features, labels, ctx.book.k, ctx.training, ctx.rng.spawn(TRAINING_STREAM), log, ctx.true_indexes
        )
