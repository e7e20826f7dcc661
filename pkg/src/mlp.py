"""Fully-connected ReLU network with softmax output, trained by hand-written backprop and Adam.

Parameters are kept as one flat list ``[W1, b1, W2, b2, ...]`` with
``W`` of shape (fan_in, fan_out); gradients and Adam moments share that
layout. Inputs are row batches of shape (B, d).
"""

import struct
from dataclasses import dataclass, field, replace
from pathlib import Path

import numpy as np
from scipy.special import softmax

from .core import RngStream
from .errors import InvalidArgumentError

HIDDEN_LAYERS = (100, 100)
LOG_FLOOR = 1e-12
ADAM_BETA1 = 0.9
ADAM_BETA2 = 0.999
ADAM_EPS = 1e-8
LR_MILESTONES = (0.5, 0.75)
LR_DECAY = 5.0

PARAMS_MAGIC = b"MLP1"
COUNT_FMT = "<I"


@dataclass(eq=False)
class MlpState:
    params: list[np.ndarray]
    adam_m: list[np.ndarray] = field(default_factory=list)
    adam_v: list[np.ndarray] = field(default_factory=list)
    step_count: int = 0

    def __post_init__(self):
        if len(self.params) % 2 or not self.params:
            raise InvalidArgumentError("params must alternate weights and biases")
        if not self.adam_m:
            self.adam_m = [np.zeros_like(p) for p in self.params]
        if not self.adam_v:
            self.adam_v = [np.zeros_like(p) for p in self.params]

    @property
    def layers(self) -> list[tuple[np.ndarray, np.ndarray]]:
        return list(zip(self.params[0::2], self.params[1::2]))

    @property
    def dims(self) -> tuple[int, ...]:
        weights = self.params[0::2]
        return (weights[0].shape[0],) + tuple(w.shape[1] for w in weights)


def init_mlp(rng: RngStream, dims: tuple[int, ...]) -> MlpState:
    """He-normal weights (variance 2 / fan_in) and zero biases."""
    if len(dims) < 2 or min(dims) < 1:
        raise InvalidArgumentError(f"invalid layer dims {dims}")
    params = []
    for fan_in, fan_out in zip(dims[:-1], dims[1:]):
        params.append(rng.standard_normal((fan_in, fan_out)) * np.sqrt(2.0 / fan_in))
        params.append(np.zeros(fan_out))
    return MlpState(params)


def encode_input(y: np.ndarray, h_hat: np.ndarray) -> np.ndarray:
    """[Re y; Im y; Re vec(H); Im vec(H)] with column-major vec; batches give (T, d)."""
    y = np.asarray(y)
    h_vec = np.asarray(h_hat).flatten(order="F")
    channel = np.concatenate([h_vec.real, h_vec.imag])
    if y.ndim == 1:
        return np.concatenate([y.real, y.imag, channel])
    return np.hstack([y.real, y.imag, np.broadcast_to(channel, (y.shape[0], channel.size))])


def forward(state: MlpState, x: np.ndarray) -> np.ndarray:
    pre, _ = _forward_pass(state, np.atleast_2d(x))
    return softmax(pre[-1], axis=1).reshape(_out_shape(state, x))


def loss_ce(t: np.ndarray, p_hat: np.ndarray):
    """-sum_k t_k ln(p_k + 1e-12); per sample for batches."""
    losses = -np.sum(np.asarray(t) * np.log(np.asarray(p_hat) + LOG_FLOOR), axis=-1)
    return float(losses) if np.ndim(losses) == 0 else losses


def backward(
    state: MlpState,
    x: np.ndarray,
    t: np.ndarray,
    sample_weights: np.ndarray | None = None,
) -> list[np.ndarray]:
    """Exact gradient of sum_n w_n loss_ce(t_n, p_n) / sum_n w_n.

    Unit weights give the batch mean; one input gives its own gradient.
    """
    x = np.atleast_2d(x)
    t = np.atleast_2d(t)
    weights = np.ones(x.shape[0]) if sample_weights is None else np.asarray(sample_weights, dtype=float)
    total = weights.sum()
    if total <= 0:
        raise InvalidArgumentError("sample weights must have a positive sum")

    pre, post = _forward_pass(state, x)
    p = softmax(pre[-1], axis=1)
    # d/dz of -sum t ln(p + floor) through the softmax.
    r = t * p / (p + LOG_FLOOR)
    delta = (p * r.sum(axis=1, keepdims=True) - r) * (weights / total)[:, None]

    grads: list[np.ndarray] = [None] * len(state.params)  # type: ignore[list-item]
    weights_list = state.params[0::2]
    for layer in range(len(weights_list) - 1, -1, -1):
        grads[2 * layer] = post[layer].T @ delta
        grads[2 * layer + 1] = delta.sum(axis=0)
        if layer:
            delta = (delta @ weights_list[layer].T) * (pre[layer - 1] > 0)
    return grads


def adam_step(
    state: MlpState,
    grads: list[np.ndarray],
    lr: float,
    beta1: float = ADAM_BETA1,
    beta2: float = ADAM_BETA2,
    eps: float = ADAM_EPS,
) -> MlpState:
    """One bias-corrected Adam update; returns a new state."""
    if len(grads) != len(state.params):
        raise InvalidArgumentError(f"expected {len(state.params)} gradients, got {len(grads)}")
    step = state.step_count + 1
    params, moments_m, moments_v = [], [], []
    for p, g, m, v in zip(state.params, grads, state.adam_m, state.adam_v):
        m = beta1 * m + (1.0 - beta1) * g
        v = beta2 * v + (1.0 - beta2) * g * g
        m_hat = m / (1.0 - beta1**step)
        v_hat = v / (1.0 - beta2**step)
        params.append(p - lr * m_hat / (np.sqrt(v_hat) + eps))
        moments_m.append(m)
        moments_v.append(v)
    return replace(state, params=params, adam_m=moments_m, adam_v=moments_v, step_count=step)


def lr_schedule(epoch: int, total_epochs: int, lr0: float) -> float:
    """lr0, divided by 5 after half of the epochs and again after three quarters (epochs are 1-based)."""
    if not 1 <= epoch <= total_epochs:
        raise InvalidArgumentError(f"epoch {epoch} outside 1..{total_epochs}")
    passed = sum(epoch > fraction * total_epochs for fraction in LR_MILESTONES)
    return lr0 / LR_DECAY**passed


def save_params(state: MlpState, path: str | Path) -> None:
    dims = state.dims
    header = PARAMS_MAGIC + struct.pack(COUNT_FMT, len(dims)) + struct.pack(f"<{len(dims)}I", *dims)
    body = b"".join(np.ascontiguousarray(p, dtype="<f8").tobytes() for p in state.params)
    Path(path).write_bytes(header + body)


def load_params(path: str | Path) -> MlpState:
    raw = Path(path).read_bytes()
    if raw[: len(PARAMS_MAGIC)] != PARAMS_MAGIC:
        raise InvalidArgumentError(f"{path}: not an MLP parameter file")
    offset = len(PARAMS_MAGIC)
    try:
        (count,) = struct.unpack_from(COUNT_FMT, raw, offset)
        offset += struct.calcsize(COUNT_FMT)
        dims = struct.unpack_from(f"<{count}I", raw, offset)
    except struct.error as e:
        raise InvalidArgumentError(f"{path}: truncated header ({e})") from e
    offset += 4 * count
    params = []
    for fan_in, fan_out in zip(dims[:-1], dims[1:]):
        for shape in ((fan_in, fan_out), (fan_out,)):
            size = int(np.prod(shape))
            if offset + 8 * size > len(raw):
                raise InvalidArgumentError(f"{path}: truncated parameter file")
            params.append(np.frombuffer(raw, dtype="<f8", count=size, offset=offset).reshape(shape).astype(np.float64))
            offset += 8 * size
    if offset != len(raw):
        raise InvalidArgumentError(f"{path}: {len(raw) - offset} trailing bytes")
    return MlpState(params)


def _forward_pass(state: MlpState, x: np.ndarray) -> tuple[list[np.ndarray], list[np.ndarray]]:
    pre, post = [], [x]
    layers = state.layers
    for i, (w, b) in enumerate(layers):
        z = post[-1] @ w + b
        pre.append(z)
        if i < len(layers) - 1:
            post.append(np.maximum(z, 0.0))
    return pre, post


def _out_shape(state: MlpState, x: np.ndarray) -> tuple[int, ...]:
    k = state.dims[-1]
    return (k,) if np.ndim(x) == 1 else (np.shape(x)[0], k)
