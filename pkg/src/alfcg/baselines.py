"""Classic and stochastic Frank-Wolfe baselines.

All methods update ``x_{t+1} = x_t + eta_t (v_t - x_t)`` with
``v_t = lmo(g_t)`` and share the solver's trace format so curves can be
overlaid. Schedules written as ``2/(t+1)`` are capped at 1 so the first
step stays inside the set.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .exceptions import ConfigError, LineSearchError
from .feasible_sets import FeasibleSet, WarmStart
from .numerics import PowerConfig
from .objectives import Objective, sample_batch
from .schedule import step_size
from .solver import TraceRecorder, check_start, default_batch, run_streams

DETERMINISTIC = ("FW-OpenLoop", "FW-ShortStep", "FW-Momentum", "FW-Armijo")
FINITE_SUM = ("SVFW", "SPIDER-CG")
EXPECTATION = ("SFW", "OneSample-EMA", "OneSample-STORM")
METHODS = DETERMINISTIC + FINITE_SUM + EXPECTATION


@dataclass
class BaselineConfig:
    method: str
    T: int = 1000
    eval_every: int = 10
    seed: int = 0
    L: float = 10.0
    momentum: float = 0.9
    armijo_init: float = 1.0
    armijo_contraction: float = 0.5
    armijo_c: float = 1e-4
    armijo_max_backtracks: int = 60
    epoch: int = 50
    b: int | None = None  # None -> floor(sqrt(N))
    q: int | None = None  # SPIDER-CG period, None -> floor(sqrt(N))
    inner_b: int = 32
    decay_exponent: float = 2.0 / 3.0
    power_tol: float = 1e-10
    power_max_iter: int = 100
    stop_gap: float | None = None

    def __post_init__(self):
        if self.method not in METHODS:
            raise ConfigError(f"unknown baseline {self.method!r}; choose from {METHODS}")
        if self.T < 0 or self.eval_every < 1:
            raise ConfigError("T must be >= 0 and eval_every >= 1")
        if not self.L > 0:
            raise ConfigError("L must be > 0")
        if not 0 < self.armijo_contraction < 1:
            raise ConfigError("armijo_contraction must lie in (0, 1)")
        for name in ("b", "q"):
            val = getattr(self, name)
            if val is not None and val < 1:
                raise ConfigError(f"{name} must be >= 1")
        if self.inner_b < 1 or self.epoch < 1:
            raise ConfigError("inner_b and epoch must be >= 1")


def open_loop(t: int) -> float:
    return 2.0 / (t + 2.0)


def capped_open_loop(t: int) -> float:
    return min(1.0, 2.0 / (t + 1.0))


class _Method:
    replace = True
    uses_L = False

    def __init__(self, cfg: BaselineConfig, obj: Objective, rng):
        self.cfg = cfg
        self.obj = obj
        self.rng = rng
        self.N = obj.n_samples
        self.b = cfg.b if cfg.b is not None else default_batch(self.N)
        self.oracles = 0
        self.f_evals = 0
        self.g_prev = np.zeros(obj.dim)
        self.x_prev = None
        self.weight = None  # momentum/decay weight reported as alpha_t

    def draw(self, size):
        batch = sample_batch(self.rng, self.N, min(size, self.N) if not self.replace else size,
                             self.replace)
        return batch, self.obj.sample_noise(self.rng)

    def full(self, x):
        self.oracles += self.N
        return self.obj.grad(x)

    def estimate(self, t, x) -> np.ndarray:
        raise NotImplementedError

    def eta(self, t, x, g, v) -> float:
        raise NotImplementedError


class OpenLoop(_Method):
    def estimate(self, t, x):
        return self.full(x)

    def eta(self, t, x, g, v):
        return open_loop(t)


class ShortStep(_Method):
    uses_L = True

    def estimate(self, t, x):
        return self.full(x)

    def eta(self, t, x, g, v):
        return step_size(0.0, 0.0, g, v, x, self.cfg.L)


class Momentum(_Method):
    def estimate(self, t, x):
        m = self.cfg.momentum
        self.weight = 1.0 - m
        return m * self.g_prev + (1.0 - m) * self.full(x)

    def eta(self, t, x, g, v):
        return open_loop(t)


class Armijo(_Method):
    def estimate(self, t, x):
        return self.full(x)

    def eta(self, t, x, g, v):
        d = v - x
        slope = -float(np.dot(g, d))
        if slope <= 0.0:
            return 0.0
        f0 = self.obj.value(x)
        self.f_evals += 1
        eta = self.cfg.armijo_init
        for _ in range(self.cfg.armijo_max_backtracks + 1):
            self.f_evals += 1
            if self.obj.value(x + eta * d) <= f0 - self.cfg.armijo_c * eta * slope:
                return eta
            eta *= self.cfg.armijo_contraction
        raise LineSearchError(
            f"Armijo search exceeded {self.cfg.armijo_max_backtracks} backtracks at t={t}")


class Svfw(_Method):
    replace = False

    def estimate(self, t, x):
        if t % self.cfg.epoch == 0:
            self.anchor = x.copy()
            self.anchor_grad = self.full(x)
            return self.anchor_grad
        batch, noise = self.draw(self.b)
        self.oracles += 2 * len(batch)
        return (self.obj.batch_grad(x, batch, noise) - self.obj.batch_grad(self.anchor, batch, noise)
                + self.anchor_grad)

    def eta(self, t, x, g, v):
        return capped_open_loop(t)


class SpiderCG(_Method):
    replace = False

    def estimate(self, t, x):
        q = self.cfg.q if self.cfg.q is not None else default_batch(self.N)
        if t % q == 0:
            batch, noise = self.draw(self.b)
            self.oracles += len(batch)
            return self.obj.batch_grad(x, batch, noise)
        batch, noise = self.draw(self.cfg.inner_b)
        self.oracles += 2 * len(batch)
        return (self.g_prev + self.obj.batch_grad(x, batch, noise)
                - self.obj.batch_grad(self.x_prev, batch, noise))

    def eta(self, t, x, g, v):
        return capped_open_loop(t)


class Sfw(_Method):
    def estimate(self, t, x):
        batch, noise = self.draw(self.b)
        self.oracles += len(batch)
        return self.obj.batch_grad(x, batch, noise)

    def eta(self, t, x, g, v):
        return open_loop(t)


class OneSampleEma(_Method):
    def estimate(self, t, x):
        r = (t + 1.0) ** -self.cfg.decay_exponent
        self.weight = r
        batch, noise = self.draw(self.b)
        self.oracles += len(batch)
        return (1.0 - r) * self.g_prev + r * self.obj.batch_grad(x, batch, noise)

    def eta(self, t, x, g, v):
        return capped_open_loop(t)


class OneSampleStorm(_Method):
    def estimate(self, t, x):
        r = (t + 1.0) ** -self.cfg.decay_exponent
        self.weight = r
        batch, noise = self.draw(self.b)
        self.oracles += 2 * len(batch)
        g_new = self.obj.batch_grad(x, batch, noise)
        g_old = self.obj.batch_grad(self.x_prev, batch, noise)
        return (1.0 - r) * (self.g_prev - g_old) + g_new

    def eta(self, t, x, g, v):
        return (t + 1.0) ** -self.cfg.decay_exponent


_IMPLS = {
    "FW-OpenLoop": OpenLoop,
    "FW-ShortStep": ShortStep,
    "FW-Momentum": Momentum,
    "FW-Armijo": Armijo,
    "SVFW": Svfw,
    "SPIDER-CG": SpiderCG,
    "SFW": Sfw,
    "OneSample-EMA": OneSampleEma,
    "OneSample-STORM": OneSampleStorm,
}


def run_baseline(cfg: BaselineConfig, obj: Objective, fset: FeasibleSet, x0):
    """Run one baseline for ``cfg.T`` iterations; returns ``(x_best, trace)``."""
    x = check_start(x0, obj, fset)
    sample_rng, lmo_rng, gap_rng = run_streams(cfg.seed)
    power = PowerConfig(cfg.power_tol, cfg.power_max_iter)
    warm = WarmStart(rng=lmo_rng)
    rec = TraceRecorder(obj, fset, power, WarmStart(rng=gap_rng))
    method = _IMPLS[cfg.method](cfg, obj, sample_rng)
    method.x_prev = x.copy()
    L_t = cfg.L if method.uses_L else None
    lmo_calls = 0
    track_f = cfg.method == "FW-Armijo"

    for t in range(cfg.T):
        g = method.estimate(t, x)
        v = fset.lmo(g, power, warm)
        lmo_calls += 1
        eta = method.eta(t, x, g, v)
        if not 0.0 <= eta <= 1.0 or math.isnan(eta):
            raise ConfigError(f"{cfg.method} produced step {eta} outside [0, 1]")
        if t % cfg.eval_every == 0:
            gap = rec.record(t, x, method.oracles, lmo_calls, L_t, method.weight, eta, g,
                             method.f_evals if track_f else None)
            if cfg.stop_gap is not None and gap <= cfg.stop_gap:
                return rec.x_best, rec.trace
        method.g_prev = g
        method.x_prev = x
        x = x + eta * (v - x)

    rec.record(cfg.T, x, method.oracles, lmo_calls, L_t, None, None, None,
               method.f_evals if track_f else None)
    return rec.x_best, rec.trace
