"""Adaptive Lipschitz estimate, momentum weights and the closed-form step size."""
from __future__ import annotations

import math
import warnings

import numpy as np

from .exceptions import InvalidParameterError

VARIANTS = ("FS", "MVR1", "MVR2")


class AdaptiveState:
    """Running accumulators over past steps ``delta_i = L_i * ||x_{i+1} - x_i||``.

    ``A = sum delta_i^2``, ``S = sum (beta + delta_i^2)`` and
    ``M = max (beta + delta_i^2)`` (0 when empty). ``L`` is the estimate that
    produced the most recent step, starting at ``rho``.
    """

    def __init__(self, variant: str = "FS", rho: float = 1e-5, beta: float = 100.0):
        variant = variant.upper()
        if variant == "D":
            variant = "FS"
        if variant not in VARIANTS:
            raise InvalidParameterError(f"unknown variant {variant!r}")
        if not rho > 0:
            raise InvalidParameterError("rho must be > 0")
        if not beta >= 0:
            raise InvalidParameterError("beta must be >= 0")
        self.variant = variant
        self.rho = float(rho)
        self.beta = float(beta)
        self.A = 0.0
        self.S = 0.0
        self.M = 0.0
        self.alpha_min = 1.0
        self.L = self.rho
        self.alpha = 1.0
        self.t = 0

    def record_step(self, step_norm: float) -> None:
        if step_norm < 0 or math.isnan(step_norm):
            raise InvalidParameterError("step_norm must be >= 0")
        delta_sq = (self.L * step_norm) ** 2
        self.A += delta_sq
        self.S += self.beta + delta_sq
        self.M = max(self.M, self.beta + delta_sq)
        self.t += 1

    def next_L_and_alpha(self) -> tuple[float, float]:
        base = self.rho * math.sqrt(1.0 + self.A)
        if self.variant == "FS":
            alpha, L = 1.0, base
        elif self.variant == "MVR1":
            alpha = 1.0 / math.sqrt(1.0 + self.S)
            L = base / math.sqrt(alpha)
        else:
            alpha_hat = ((1.0 + self.M) / (1.0 + self.S)) ** (2.0 / 3.0)
            self.alpha_min = min(self.alpha_min, alpha_hat)
            alpha = self.alpha_min
            L = base * alpha ** -0.25
        self.L, self.alpha = L, alpha
        return L, alpha


def step_size(h_x: float, h_v: float, g, v, x, L_t: float, tol: float = 1e-12) -> float:
    """Minimizer over [0, 1] of the quadratic model with curvature ``L_t``."""
    if not L_t > 0:
        raise InvalidParameterError("L_t must be > 0")
    d = np.asarray(v, dtype=np.float64) - np.asarray(x, dtype=np.float64)
    dsq = float(np.dot(d, d))
    if math.sqrt(dsq) <= tol:
        return 0.0
    num = h_x - h_v - float(np.dot(g, d))
    if num < -tol * (1.0 + abs(num)):
        warnings.warn(f"negative step-size numerator {num:.3e}; LMO output is not optimal",
                      RuntimeWarning, stacklevel=2)
    return min(max(num, 0.0) / (L_t * dsq), 1.0)
