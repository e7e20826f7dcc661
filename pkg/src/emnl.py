"""Model-driven detection: expectation-maximization with noisy labels.

The received signal for true class k is modelled as CN(mu_k, nu_k I) and
the coarse detector's label as a noisy observation of the true class
through a column-stochastic transition matrix Theta, with
Theta[i, j] = P(true = i | noisy = j). EM alternates

  E: alpha[n, i] ∝ Theta[i, khat[n]] p(y[n]; mu_i, nu_i)     (floored at eps)
  M: mu_i = weighted mean, nu_i = weighted variance per complex dimension
     Theta[:, j] = mean of alpha rows whose noisy label is j

and the fine detector picks argmax_k p(y; mu_k, nu_k).
"""

from dataclasses import dataclass

import numpy as np
from scipy.special import logsumexp

from .constellation import SymbolBook
from .errors import InvalidArgumentError
from .logger import logger

DEFAULT_EPS = 1e-8
DEFAULT_ITERATIONS = 20
NU_FLOOR = 1e-12
# Classes holding less total responsibility than this keep their previous parameters.
MIN_CLASS_MASS = 1e-3


@dataclass(frozen=True, eq=False)
class NoisyDataset:
    """Noisy labels (T,) and received signals (T, Nr)."""

    labels: np.ndarray
    signals: np.ndarray

    def __post_init__(self):
        if self.signals.ndim != 2 or self.labels.shape != (self.signals.shape[0],):
            raise InvalidArgumentError(
                f"labels {self.labels.shape} do not match signals {self.signals.shape}"
            )
        if self.labels.size and self.labels.min() < 0:
            raise InvalidArgumentError("labels must be non-negative")

    def __len__(self) -> int:
        return self.labels.size

    @property
    def nr(self) -> int:
        return self.signals.shape[1]

    def check_classes(self, k: int) -> None:
        if self.labels.size and self.labels.max() >= k:
            raise InvalidArgumentError(f"label {self.labels.max()} outside 0..{k - 1}")


@dataclass(frozen=True, eq=False)
class GaussianModelParams:
    """Per-class means (K, Nr), variances (K,) and transition matrix (K, K)."""

    mu: np.ndarray
    nu: np.ndarray
    theta: np.ndarray

    def __post_init__(self):
        k = self.nu.shape[0]
        if self.mu.shape[0] != k or self.theta.shape != (k, k):
            raise InvalidArgumentError(
                f"inconsistent shapes mu={self.mu.shape} nu={self.nu.shape} theta={self.theta.shape}"
            )
        if np.any(self.nu <= 0):
            raise InvalidArgumentError("every nu must be > 0")

    @property
    def k(self) -> int:
        return self.nu.shape[0]


@dataclass(frozen=True)
class EmnlSettings:
    iterations: int = DEFAULT_ITERATIONS
    eps: float = DEFAULT_EPS
    nu_floor: float = NU_FLOOR

    def __post_init__(self):
        if self.iterations < 0:
            raise InvalidArgumentError(f"iterations must be >= 0, got {self.iterations}")
        if not 0 <= self.eps < 1:
            raise InvalidArgumentError(f"eps must lie in [0, 1), got {self.eps}")
        if not self.nu_floor > 0:
            raise InvalidArgumentError(f"nu_floor must be > 0, got {self.nu_floor}")


def coarse_detect(y, h_hat: np.ndarray, book: SymbolBook):
    """argmin_k ||y - H_hat x_k||^2, lowest index on ties.

    ``y`` is one received vector (Nr,) or a batch (T, Nr).
    """
    signals = np.atleast_2d(y)
    candidates = book.vectors @ h_hat.T
    distances = _squared_distances(signals, candidates)
    labels = distances.argmin(axis=1)
    return int(labels[0]) if np.ndim(y) == 1 else labels


def gauss_loglik(y: np.ndarray, mu_k: np.ndarray, nu_k: float, nr: int) -> float:
    """log of the isotropic complex Gaussian density CN(mu_k, nu_k I_Nr) at y."""
    if nu_k <= 0:
        raise InvalidArgumentError(f"nu must be > 0, got {nu_k}")
    residual = np.asarray(y) - np.asarray(mu_k)
    return float(-nr * np.log(np.pi * nu_k) - np.vdot(residual, residual).real / nu_k)


def log_likelihoods(signals: np.ndarray, mu: np.ndarray, nu: np.ndarray) -> np.ndarray:
    nr = signals.shape[1]
    return -nr * np.log(np.pi * nu)[None, :] - _squared_distances(signals, mu) / nu[None, :]


def e_step(
    params: GaussianModelParams,
    dataset: NoisyDataset,
    eps: float = DEFAULT_EPS,
    use_labels: bool = True,
) -> np.ndarray:
    """Posterior of the true label given y[n] and the noisy label, floored at ``eps``.

    With ``use_labels=False`` the noisy labels carry no information and the
    posterior is p(y; omega_i) / sum_j p(y; omega_j); this is how the
    algorithm is started before any transition matrix exists.
    """
    log_joint = log_likelihoods(dataset.signals, params.mu, params.nu)
    if use_labels:
        with np.errstate(divide="ignore"):
            log_joint = log_joint + np.log(params.theta[:, dataset.labels].T)
    alpha = np.exp(log_joint - logsumexp(log_joint, axis=1, keepdims=True))
    return floor_responsibilities(alpha, eps)


def floor_responsibilities(alpha: np.ndarray, eps: float) -> np.ndarray:
    floored = np.maximum(alpha, eps)
    return floored / floored.sum(axis=1, keepdims=True)


def m_step(
    alpha: np.ndarray,
    dataset: NoisyDataset,
    previous: GaussianModelParams | None = None,
    nu_floor: float = NU_FLOOR,
) -> tuple[np.ndarray, np.ndarray]:
    """Weighted mean, then weighted variance around the new mean.

    Classes whose total responsibility is below MIN_CLASS_MASS keep the
    parameters of ``previous``; without ``previous`` they get the global
    mean and variance of the data.
    """
    signals = dataset.signals
    nr = dataset.nr
    mass = alpha.sum(axis=0)
    supported = mass >= MIN_CLASS_MASS
    safe_mass = np.where(supported, mass, 1.0)

    mu = (alpha.T @ signals) / safe_mass[:, None]
    spread = (alpha * _squared_distances(signals, mu)).sum(axis=0)
    nu = np.maximum(spread / (nr * safe_mass), nu_floor)

    if not np.all(supported):
        if previous is not None:
            fallback_mu, fallback_nu = previous.mu, previous.nu
        else:
            centre = signals.mean(axis=0)
            fallback_mu = np.broadcast_to(centre, mu.shape)
            spread_all = np.mean(np.sum(np.abs(signals - centre) ** 2, axis=1)) / nr
            fallback_nu = np.full(nu.shape, max(spread_all, nu_floor))
        mu = np.where(supported[:, None], mu, fallback_mu)
        nu = np.where(supported, nu, fallback_nu)
    return mu, nu


def theta_step(alpha: np.ndarray, dataset: NoisyDataset) -> np.ndarray:
    """Theta[i, j] = average of alpha[:, i] over samples labelled j.

    Columns of never-observed labels fall back to the identity column.
    """
    k = alpha.shape[1]
    label_onehot = np.zeros((len(dataset), k))
    label_onehot[np.arange(len(dataset)), dataset.labels] = 1.0
    counts = label_onehot.sum(axis=0)
    totals = alpha.T @ label_onehot
    theta = np.eye(k)
    observed = counts > 0
    if not np.all(observed):
        logger.warning(f"labels {np.flatnonzero(~observed).tolist()} never observed; their Theta columns fall back to identity")
    theta[:, observed] = totals[:, observed] / counts[observed]
    return theta


def log_likelihood(params: GaussianModelParams, dataset: NoisyDataset) -> float:
    """sum_n ln sum_j Theta[j, khat[n]] p(y[n]; omega_j)."""
    with np.errstate(divide="ignore"):
        log_prior = np.log(params.theta[:, dataset.labels].T)
    log_joint = log_prior + log_likelihoods(dataset.signals, params.mu, params.nu)
    return float(logsumexp(log_joint, axis=1).sum())


def initial_params(h_hat: np.ndarray, sigma2: float, book: SymbolBook) -> GaussianModelParams:
    mu = book.vectors @ h_hat.T
    return GaussianModelParams(mu, np.full(book.k, float(sigma2)), np.eye(book.k))


def run_emnl(
    dataset: NoisyDataset,
    h_hat: np.ndarray,
    sigma2: float,
    book: SymbolBook,
    iterations: int = DEFAULT_ITERATIONS,
    eps: float = DEFAULT_EPS,
    nu_floor: float = NU_FLOOR,
    history: list[float] | None = None,
) -> GaussianModelParams:
    """Fit the per-class Gaussians and Theta from coarse labels.

    If ``history`` is given, the log-likelihood after initialization and
    after every iteration is appended to it.
    """
    if len(dataset) == 0:
        raise InvalidArgumentError("EMNL needs a nonempty dataset")
    dataset.check_classes(book.k)

    params = initial_params(h_hat, sigma2, book)
    alpha = e_step(params, dataset, eps, use_labels=False)
    params = GaussianModelParams(params.mu, params.nu, theta_step(alpha, dataset))
    if history is not None:
        history.append(log_likelihood(params, dataset))

    for t in range(iterations):
        alpha = e_step(params, dataset, eps)
        mu, nu = m_step(alpha, dataset, previous=params, nu_floor=nu_floor)
        params = GaussianModelParams(mu, nu, theta_step(alpha, dataset))
        if history is not None:
            history.append(log_likelihood(params, dataset))
            logger.debug(f"EMNL iteration {t + 1}/{iterations}: L={history[-1]:.6f}")
    return params


def md_detect(y, params: GaussianModelParams, book: SymbolBook):
    """argmax_k log p(y; mu_k, nu_k), lowest index on ties."""
    if params.k != book.k:
        raise InvalidArgumentError(f"params cover {params.k} classes, book has {book.k}")
    signals = np.atleast_2d(y)
    labels = log_likelihoods(signals, params.mu, params.nu).argmax(axis=1)
    return int(labels[0]) if np.ndim(y) == 1 else labels


def _squared_distances(signals: np.ndarray, centres: np.ndarray) -> np.ndarray:
    diff = signals[:, None, :] - centres[None, :, :]
    return np.sum(diff.real**2 + diff.imag**2, axis=2)
