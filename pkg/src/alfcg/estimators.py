"""Gradient estimators behind one ``estimate(x, alpha, obj, rng)`` interface.

Estimators that evaluate two points per step (Spider, Mvr2) reuse a single
batch and a single noise draw for both evaluations. The variance-reduction
telescoping needs that.
"""
from __future__ import annotations

import numpy as np

from .exceptions import ConfigError
from .objectives import Objective, sample_batch


class Estimator:
    replace = True

    def __init__(self, b: int = 1):
        if b < 1:
            raise ConfigError("batch size must be >= 1")
        self.b = int(b)
        self.g_prev = None
        self.x_prev = None
        self.t = 0
        self.grad_oracle_count = 0

    def _draw(self, obj: Objective, rng):
        batch = sample_batch(rng, obj.n_samples, self.b, self.replace)
        return batch, obj.sample_noise(rng)

    def _compute(self, x, alpha, obj, rng) -> np.ndarray:
        raise NotImplementedError

    def estimate(self, x, alpha, obj: Objective, rng) -> np.ndarray:
        x = np.asarray(x, dtype=np.float64)
        if self.g_prev is None:
            self.g_prev = np.zeros(obj.dim)
            self.x_prev = x.copy()
        g = self._compute(x, alpha, obj, rng)
        self.g_prev = g
        self.x_prev = x.copy()
        self.t += 1
        return g


class FullGradient(Estimator):
    """Exact gradient every step (ALFCG-D)."""

    def __init__(self):
        super().__init__(1)

    def _compute(self, x, alpha, obj, rng):
        self.grad_oracle_count += obj.n_samples
        return obj.grad(x)


class Spider(Estimator):
    """Full gradient every ``q`` steps, path-difference corrections in between."""

    replace = False

    def __init__(self, q: int, b: int):
        if q < 1:
            raise ConfigError("SPIDER period q must be >= 1")
        super().__init__(b)
        self.q = int(q)

    def _compute(self, x, alpha, obj, rng):
        if self.t % self.q == 0:
            self.grad_oracle_count += obj.n_samples
            return obj.grad(x)
        batch, noise = self._draw(obj, rng)
        self.grad_oracle_count += 2 * len(batch)
        return (self.g_prev + obj.batch_grad(x, batch, noise)
                - obj.batch_grad(self.x_prev, batch, noise))


class Mvr1(Estimator):
    """Exponential moving average of single-batch gradients."""

    def _compute(self, x, alpha, obj, rng):
        batch, noise = self._draw(obj, rng)
        self.grad_oracle_count += len(batch)
        return (1.0 - alpha) * self.g_prev + alpha * obj.batch_grad(x, batch, noise)


class Mvr2(Estimator):
    """STORM-type recursion with a same-batch correction term."""

    def _compute(self, x, alpha, obj, rng):
        batch, noise = self._draw(obj, rng)
        self.grad_oracle_count += 2 * len(batch)
        g_new = obj.batch_grad(x, batch, noise)
        g_old = obj.batch_grad(self.x_prev, batch, noise)
        return (1.0 - alpha) * (self.g_prev - g_old) + g_new
