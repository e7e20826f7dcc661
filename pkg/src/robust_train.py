"""Data-driven detection: robust DNN training on labels produced by the model-driven detector.

Training runs ``epochs`` passes over the frame, each split into ``n_batch``
random mini-batches. The first ``warmup`` epochs take plain mean-loss steps
against the one-hot labels. Afterwards every mini-batch is partitioned:

* false          the floor(|B| tau) highest-loss samples, ignored
* clean          targets whose confidence max_k t_k exceeds 1 - eps
* reassignable   the rest, weighted by their confidence

and targets of non-false samples drift toward the network's predictions
through an exponential moving average.
"""

from dataclasses import dataclass, field, replace
import math

import numpy as np

from .constellation import SymbolBook
from .core import RngStream
from .emnl import GaussianModelParams, NoisyDataset, md_detect
from .errors import InvalidArgumentError
from .logger import logger
from .mlp import (
    HIDDEN_LAYERS,
    MlpState,
    adam_step,
    backward,
    encode_input,
    forward,
    init_mlp,
    loss_ce,
    lr_schedule,
)

# Guards floor(|B| tau) against products such as 100 * 0.29 = 28.999999999999996.
FLOOR_SLACK = 1e-9


@dataclass(frozen=True)
class TrainingHyperparams:
    epochs: int = 100
    warmup: int = 40
    n_batch: int = 4
    tau: float = 0.1
    alpha: float = 0.1
    eps: float = 1e-8
    lr0: float = 0.01
    hidden: tuple[int, ...] = HIDDEN_LAYERS

    def __post_init__(self):
        if self.epochs < 0 or not 0 <= self.warmup <= self.epochs:
            raise InvalidArgumentError(f"need 0 <= warmup <= epochs, got {self.warmup}, {self.epochs}")
        if self.n_batch < 1:
            raise InvalidArgumentError(f"n_batch must be >= 1, got {self.n_batch}")
        if not 0 <= self.tau < 1:
            raise InvalidArgumentError(f"tau must lie in [0, 1), got {self.tau}")
        if not 0 <= self.alpha <= 1:
            raise InvalidArgumentError(f"alpha must lie in [0, 1], got {self.alpha}")
        if not 0 <= self.eps < 1:
            raise InvalidArgumentError(f"eps must lie in [0, 1), got {self.eps}")
        if not self.lr0 > 0:
            raise InvalidArgumentError(f"lr0 must be > 0, got {self.lr0}")
        if any(width < 1 for width in self.hidden):
            raise InvalidArgumentError(f"every hidden width must be >= 1, got {self.hidden}")


@dataclass(eq=False)
class TargetStore:
    """Soft targets t[n], one probability vector per sample."""

    targets: np.ndarray

    @classmethod
    def from_labels(cls, labels: np.ndarray, k: int) -> "TargetStore":
        return cls(one_hot(labels, k))

    def confidence(self, indexes: np.ndarray) -> np.ndarray:
        return self.targets[indexes].max(axis=1)

    def ema_update(self, indexes: np.ndarray, predictions: np.ndarray, alpha: float) -> None:
        self.targets[indexes] = alpha * predictions + (1.0 - alpha) * self.targets[indexes]


@dataclass(frozen=True, eq=False)
class BatchPartition:
    batch: np.ndarray
    false: np.ndarray
    clean: np.ndarray
    reassignable: np.ndarray
    # Label confidence of every reassignable sample, aligned with ``reassignable``.
    confidence: np.ndarray

    @property
    def weight_total(self) -> float:
        return float(self.clean.size + self.confidence.sum())


@dataclass
class EpochRecord:
    epoch: int
    lr: float
    mean_loss: float
    n_false: int = 0
    n_clean: int = 0
    n_reassignable: int = 0
    agreement: float = float("nan")


@dataclass
class TrainingLog:
    epochs: list[EpochRecord] = field(default_factory=list)
    loss_snapshots: dict[int, np.ndarray] = field(default_factory=dict)


def one_hot(labels: np.ndarray, k: int) -> np.ndarray:
    encoded = np.zeros((labels.size, k))
    encoded[np.arange(labels.size), labels] = 1.0
    return encoded


def build_md_dataset(
    dataset_coarse: NoisyDataset,
    md_params: GaussianModelParams,
    book: SymbolBook,
) -> tuple[np.ndarray, np.ndarray]:
    """Relabel the frame with the model-driven detector; returns (labels, one-hot targets)."""
    labels = md_detect(dataset_coarse.signals, md_params, book)
    return labels, one_hot(labels, book.k)


def partition_epoch(rng: RngStream, size: int, n_batch: int) -> list[np.ndarray]:
    return [batch for batch in np.array_split(rng.permutation(size), n_batch) if batch.size]


def plain_update(state: MlpState, features: np.ndarray, targets: np.ndarray, batch: np.ndarray, lr: float) -> MlpState:
    return adam_step(state, backward(state, features[batch], targets[batch]), lr)


def warmup_epochs(
    state: MlpState,
    features: np.ndarray,
    targets: np.ndarray,
    hyper: TrainingHyperparams,
    rng: RngStream,
    log: TrainingLog | None = None,
    reference: np.ndarray | None = None,
) -> MlpState:
    """Run the first ``hyper.warmup`` epochs with uniform weights on every sample."""
    for epoch in range(1, hyper.warmup + 1):
        lr = lr_schedule(epoch, hyper.epochs, hyper.lr0)
        for batch in partition_epoch(rng, features.shape[0], hyper.n_batch):
            state = plain_update(state, features, targets, batch, lr)
        _record_epoch(log, state, features, targets, epoch, lr, reference)
    return state


def select_samples(
    state: MlpState,
    store: TargetStore,
    batch: np.ndarray,
    features: np.ndarray,
    tau: float,
    alpha: float,
    eps: float,
) -> tuple[BatchPartition, TargetStore]:
    """Split a mini-batch into false, clean and reassignable samples.

    Losses are taken against the current targets; ties in the false set go
    to the lower index. Targets of the non-false samples receive one EMA
    step toward the current predictions before their confidence is read.
    """
    batch = np.asarray(batch)
    losses = loss_ce(store.targets[batch], forward(state, features[batch]))
    n_false = math.floor(batch.size * tau + FLOOR_SLACK)
    order = np.lexsort((batch, -losses))
    false = np.sort(batch[order[:n_false]])
    kept = np.sort(batch[order[n_false:]])

    if kept.size:
        store.ema_update(kept, forward(state, features[kept]), alpha)
    confidence = store.confidence(kept)
    is_clean = confidence > 1.0 - eps
    partition = BatchPartition(
        batch=batch,
        false=false,
        clean=kept[is_clean],
        reassignable=kept[~is_clean],
        confidence=confidence[~is_clean],
    )
    return partition, store


def corrected_update(
    state: MlpState,
    partition: BatchPartition,
    store: TargetStore,
    features: np.ndarray,
    lr: float,
) -> MlpState:
    """Gradient step on (sum_C loss + sum_R omega loss) / (|C| + sum_R omega).

    Returns ``state`` unchanged when the denominator is zero.
    """
    if partition.weight_total <= 0:
        logger.warning(f"skipping update: empty clean and reassignable sets in a batch of {partition.batch.size}")
        return state
    members = np.concatenate([partition.clean, partition.reassignable])
    weights = np.concatenate([np.ones(partition.clean.size), partition.confidence])
    grads = backward(state, features[members], store.targets[members], sample_weights=weights)
    return adam_step(state, grads, lr)


def train_dd(
    features: np.ndarray,
    md_labels: np.ndarray,
    k: int,
    hyper: TrainingHyperparams,
    rng: RngStream,
    log: TrainingLog | None = None,
    reference: np.ndarray | None = None,
) -> MlpState:
    """Warm-up, then sample selection with loss correction.

    ``rng`` seeds the weights and every mini-batch partition. ``reference``
    (the true labels, when known) only feeds the agreement column of ``log``.
    """
    if features.shape[0] != md_labels.size or md_labels.size == 0:
        raise InvalidArgumentError(f"{features.shape[0]} feature rows for {md_labels.size} labels")
    state = init_mlp(rng.spawn("init"), (features.shape[1], *hyper.hidden, k))
    batches_rng = rng.spawn("batches")
    labels_onehot = one_hot(md_labels, k)
    store = TargetStore(labels_onehot.copy())

    if log is not None:
        log.loss_snapshots[0] = loss_ce(labels_onehot, forward(state, features))
    state = warmup_epochs(state, features, labels_onehot, hyper, batches_rng, log, reference)
    if log is not None and hyper.warmup:
        log.loss_snapshots[hyper.warmup] = loss_ce(labels_onehot, forward(state, features))

    for epoch in range(hyper.warmup + 1, hyper.epochs + 1):
        lr = lr_schedule(epoch, hyper.epochs, hyper.lr0)
        sizes = np.zeros(3, dtype=int)
        for batch in partition_epoch(batches_rng, features.shape[0], hyper.n_batch):
            partition, store = select_samples(state, store, batch, features, hyper.tau, hyper.alpha, hyper.eps)
            state = corrected_update(state, partition, store, features, lr)
            sizes += (partition.false.size, partition.clean.size, partition.reassignable.size)
        _record_epoch(log, state, features, store.targets, epoch, lr, reference, sizes)
    return state


def naive_train(
    features: np.ndarray,
    md_labels: np.ndarray,
    k: int,
    hyper: TrainingHyperparams,
    rng: RngStream,
    log: TrainingLog | None = None,
    reference: np.ndarray | None = None,
) -> MlpState:
    """Plain mean-loss training for every epoch."""
    return train_dd(features, md_labels, k, replace(hyper, warmup=hyper.epochs), rng, log, reference)


def dd_detect(state: MlpState, y: np.ndarray, h_hat: np.ndarray):
    """argmax of the network's class probabilities, lowest index on ties."""
    probabilities = forward(state, encode_input(y, h_hat))
    return int(np.argmax(probabilities)) if np.ndim(y) == 1 else probabilities.argmax(axis=1)


def _record_epoch(
    log: TrainingLog | None,
    state: MlpState,
    features: np.ndarray,
    targets: np.ndarray,
    epoch: int,
    lr: float,
    reference: np.ndarray | None,
    sizes: np.ndarray | None = None,
) -> None:
    if log is None:
        return
    probabilities = forward(state, features)
    record = EpochRecord(epoch=epoch, lr=lr, mean_loss=float(np.mean(loss_ce(targets, probabilities))))
    if sizes is not None:
        record.n_false, record.n_clean, record.n_reassignable = (int(s) for s in sizes)
    if reference is not None:
        record.agreement = float(np.mean(probabilities.argmax(axis=1) == reference))
    log.epochs.append(record)
    logger.debug(
        f"epoch {epoch}: lr={lr:g} loss={record.mean_loss:.4f} "
        f"F/C/R={record.n_false}/{record.n_clean}/{record.n_reassignable}"
    )
