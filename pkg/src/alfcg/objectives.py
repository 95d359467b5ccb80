"""Finite-sum smooth losses with exact full and mini-batch gradients."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.special import logsumexp, softmax

from .exceptions import InvalidParameterError


@dataclass(frozen=True)
class Dataset:
    features: np.ndarray  # (N, d)
    labels: np.ndarray    # (N,) integers in [0, classes)
    classes: int
    name: str = "dataset"
    targets: np.ndarray | None = None  # real responses for least squares

    def __post_init__(self):
        X = np.asarray(self.features, dtype=np.float64)
        y = np.asarray(self.labels, dtype=np.int64).ravel()
        if X.ndim != 2 or X.shape[0] < 1:
            raise InvalidParameterError("features must be a non-empty (N, d) array")
        if y.shape[0] != X.shape[0]:
            raise InvalidParameterError("labels and features disagree on N")
        if self.classes < 1 or np.any(y < 0) or np.any(y >= self.classes):
            raise InvalidParameterError("labels must lie in [0, classes)")
        if not np.all(np.isfinite(X)):
            raise InvalidParameterError("features contain non-finite values")
        object.__setattr__(self, "features", X)
        object.__setattr__(self, "labels", y)
        if self.targets is not None:
            t = np.asarray(self.targets, dtype=np.float64).ravel()
            if t.shape[0] != X.shape[0]:
                raise InvalidParameterError("targets and features disagree on N")
            object.__setattr__(self, "targets", t)

    @property
    def n_samples(self) -> int:
        return self.features.shape[0]

    @property
    def n_features(self) -> int:
        return self.features.shape[1]


def sample_batch(rng: np.random.Generator, N: int, b: int, replace: bool) -> np.ndarray:
    """Mini-batch indices. ``replace=True`` models the expectation setting,
    ``replace=False`` the finite-sum setting."""
    if b < 1:
        raise InvalidParameterError("batch size must be >= 1")
    if not replace and b > N:
        raise InvalidParameterError("batch larger than dataset without replacement")
    if not replace and b == N:
        return np.arange(N)
    if replace:
        return rng.integers(0, N, size=b)
    return np.sort(rng.choice(N, size=b, replace=False))


class Objective:
    """Base class: f(x) = (1/N) sum_i f_i(x) over a :class:`Dataset`.

    ``noise_sigma > 0`` makes :meth:`grad` add Gaussian noise with
    ``E||noise||^2 = noise_sigma**2`` to batched calls. Full-gradient calls
    stay exact.
    """

    def __init__(self, dataset: Dataset, noise_sigma: float = 0.0):
        if noise_sigma < 0:
            raise InvalidParameterError("noise_sigma must be >= 0")
        self.dataset = dataset
        self.noise_sigma = float(noise_sigma)

    @property
    def n_samples(self) -> int:
        return self.dataset.n_samples

    @property
    def dim(self) -> int:
        raise NotImplementedError

    def _check(self, x) -> np.ndarray:
        x = np.asarray(x, dtype=np.float64).ravel()
        if x.shape[0] != self.dim:
            raise InvalidParameterError(f"expected a point of length {self.dim}, got {x.shape[0]}")
        return x

    def _rows(self, batch):
        if batch is None:
            return self.dataset.features, slice(None)
        batch = np.asarray(batch, dtype=np.int64).ravel()
        if batch.size == 0:
            raise InvalidParameterError("empty batch")
        if batch.min() < 0 or batch.max() >= self.n_samples:
            raise InvalidParameterError("batch index out of range")
        return self.dataset.features[batch], batch

    def value(self, x) -> float:
        raise NotImplementedError

    def _batch_grad(self, x, X, idx) -> np.ndarray:
        raise NotImplementedError

    def sample_noise(self, rng) -> np.ndarray | float:
        """One noise draw, shared by all gradient calls that reuse a batch."""
        if self.noise_sigma == 0.0 or rng is None:
            return 0.0
        return rng.normal(0.0, self.noise_sigma / np.sqrt(self.dim), size=self.dim)

    def grad(self, x, batch=None, rng=None) -> np.ndarray:
        x = self._check(x)
        X, idx = self._rows(batch)
        g = self._batch_grad(x, X, idx)
        if batch is not None:
            g = g + self.sample_noise(rng)
        return g

    def batch_grad(self, x, batch, noise=0.0) -> np.ndarray:
        """Mean gradient over ``batch`` plus a caller-supplied noise draw."""
        x = self._check(x)
        X, idx = self._rows(batch)
        return self._batch_grad(x, X, idx) + noise


class MultinomialLogistic(Objective):
    """Softmax cross-entropy; the parameter is the row-major ``(classes, d)`` matrix W."""

    @property
    def shape(self) -> tuple[int, int]:
        return self.dataset.classes, self.dataset.n_features

    @property
    def dim(self) -> int:
        c, d = self.shape
        return c * d

    def value(self, x):
        W = self._check(x).reshape(self.shape)
        X, y = self.dataset.features, self.dataset.labels
        Z = X @ W.T
        return float(np.mean(logsumexp(Z, axis=1) - Z[np.arange(len(y)), y]))

    def _batch_grad(self, x, X, idx):
        W = x.reshape(self.shape)
        y = self.dataset.labels[idx]
        P = softmax(X @ W.T, axis=1)
        P[np.arange(X.shape[0]), y] -= 1.0
        return (P.T @ X).ravel() / X.shape[0]


class BinaryLogistic(Objective):
    """Logistic loss with labels {0, 1} mapped to {-1, +1}."""

    def __init__(self, dataset, noise_sigma=0.0):
        super().__init__(dataset, noise_sigma)
        if np.any(dataset.labels > 1):
            raise InvalidParameterError("binary logistic needs labels in {0, 1}")
        self._signs = 2.0 * dataset.labels - 1.0

    @property
    def dim(self):
        return self.dataset.n_features

    def value(self, x):
        x = self._check(x)
        m = self._signs * (self.dataset.features @ x)
        return float(np.mean(np.logaddexp(0.0, -m)))

    def _batch_grad(self, x, X, idx):
        s = self._signs[idx]
        m = s * (X @ x)
        # d/dm log(1 + e^{-m}) = -sigmoid(-m)
        w = -s * np.exp(-np.logaddexp(0.0, m))
        return X.T @ w / X.shape[0]


class LeastSquares(Objective):
    """(1/2N)||Xw - y||^2, with y the dataset targets (labels if none given)."""

    def __init__(self, dataset, noise_sigma=0.0):
        super().__init__(dataset, noise_sigma)
        t = dataset.targets
        self._y = t if t is not None else dataset.labels.astype(np.float64)

    @property
    def dim(self):
        return self.dataset.n_features

    def value(self, x):
        x = self._check(x)
        r = self.dataset.features @ x - self._y
        return float(0.5 * np.dot(r, r) / r.shape[0])

    def _batch_grad(self, x, X, idx):
        r = X @ x - self._y[idx]
        return X.T @ r / X.shape[0]


OBJECTIVES = {
    "multinomial_logistic": MultinomialLogistic,
    "binary_logistic": BinaryLogistic,
    "least_squares": LeastSquares,
}


def make_objective(kind: str, dataset: Dataset, noise_sigma: float = 0.0) -> Objective:
    try:
        cls = OBJECTIVES[kind]
    except KeyError:
        raise InvalidParameterError(f"unknown objective {kind!r}") from None
    return cls(dataset, noise_sigma)
