"""Driver for the adaptive Lipschitz-free conditional-gradient iteration.

Each iteration forms an estimate ``g_t`` and calls the LMO for ``v_t``. It
then takes the closed-form step ``eta_t``, sets
``x_{t+1} = x_t + eta_t (v_t - x_t)`` and feeds ``||x_{t+1} - x_t||`` back into
the adaptive state. The FW gap is evaluated every ``eval_every`` iterations
with an exact full gradient. That cost is not charged to the oracle counters.
"""
from __future__ import annotations

import math
import time
from dataclasses import dataclass

import numpy as np

from .estimators import Estimator, FullGradient, Mvr1, Mvr2, Spider
from .exceptions import ConfigError, InfeasibleStartError, NonFiniteObjectiveError
from .feasible_sets import FeasibleSet, WarmStart
from .numerics import PowerConfig, as_vec, spawn_rngs
from .objectives import Objective
from .schedule import AdaptiveState, step_size

SOLVER_VARIANTS = ("D", "FS", "MVR1", "MVR2")


LMO_ROOT_SEED = 20240601


@dataclass
class SolverConfig:
    variant: str = "D"
    rho: float = 1e-5
    beta: float = 100.0
    q: int | None = None  # None -> floor(sqrt(N))
    b: int | None = None  # None -> floor(sqrt(N))
    T: int = 1000
    eval_every: int = 10
    seed: int = 0
    power_tol: float = 1e-10
    power_max_iter: int = 100
    stop_gap: float | None = None

    def __post_init__(self):
        self.variant = self.variant.upper()
        if self.variant not in SOLVER_VARIANTS:
            raise ConfigError(f"variant must be one of {SOLVER_VARIANTS}, got {self.variant!r}")
        if self.T < 0:
            raise ConfigError("T must be >= 0")
        if self.eval_every < 1:
            raise ConfigError("eval_every must be >= 1")
        if not self.rho > 0:
            raise ConfigError("rho must be > 0")
        if not self.beta >= 0:
            raise ConfigError("beta must be >= 0")
        for name in ("q", "b"):
            val = getattr(self, name)
            if val is not None and val < 1:
                raise ConfigError(f"{name} must be >= 1")

    @property
    def power(self) -> PowerConfig:
        return PowerConfig(self.power_tol, self.power_max_iter)


@dataclass
class TraceRecord:
    t: int
    grad_oracles: int
    lmo_calls: int
    F: float
    gap: float | None = None
    L_t: float | None = None
    alpha_t: float | None = None
    eta_t: float | None = None
    s_sq: float | None = None
    wall_ns: int | None = None
    f_evals: int | None = None  # line-search baselines only; not part of the CSV schema


def default_batch(N: int) -> int:
    return max(1, math.isqrt(N))


def fw_gap(x, obj: Objective, fset: FeasibleSet, power: PowerConfig | None = None,
           warm: WarmStart | None = None) -> float:
    """Frank-Wolfe gap ``<grad f(x), x - lmo(grad f(x))>`` with h = 0."""
    return _gap_and_grad(as_vec(x), obj, fset, power, warm)[0]


def _gap_and_grad(x, obj, fset, power, warm):
    grad = obj.grad(x)
    v = fset.lmo(grad, power, warm)
    return float(np.dot(grad, x - v)), grad


class TraceRecorder:
    """Evaluates and stores trace rows; tracks the best-gap iterate."""

    def __init__(self, obj, fset, power, warm):
        self.obj = obj
        self.fset = fset
        self.power = power
        self.warm = warm
        self.trace: list[TraceRecord] = []
        self.best_gap = math.inf
        self.x_best = None
        self._t0 = time.perf_counter_ns()

    def record(self, t, x, grad_oracles, lmo_calls, L_t=None, alpha_t=None, eta_t=None,
               g=None, f_evals=None) -> float:
        F = self.obj.value(x)
        if not math.isfinite(F):
            raise NonFiniteObjectiveError(f"objective is not finite at t={t}", self.trace)
        gap, full = _gap_and_grad(x, self.obj, self.fset, self.power, self.warm)
        s_sq = None
        if g is not None:
            r = g - full
            s_sq = float(np.dot(r, r))
        self.trace.append(TraceRecord(
            t=t, grad_oracles=grad_oracles, lmo_calls=lmo_calls, F=F, gap=gap,
            L_t=L_t, alpha_t=alpha_t, eta_t=eta_t, s_sq=s_sq,
            wall_ns=time.perf_counter_ns() - self._t0, f_evals=f_evals))
        if gap < self.best_gap or self.x_best is None:
            self.best_gap = gap
            self.x_best = np.array(x, copy=True)
        return gap


def run_streams(seed: int):
    """(sample, lmo, gap) generators for one run.

    Only mini-batch sampling follows the run seed. The power-iteration starts
    come from a fixed root so deterministic methods give the same trace for
    every seed.
    """
    sample_rng = spawn_rngs(seed, 3)[0]
    _, lmo_rng, gap_rng = spawn_rngs(LMO_ROOT_SEED, 3)
    return sample_rng, lmo_rng, gap_rng


def check_start(x0, obj: Objective, fset: FeasibleSet) -> np.ndarray:
    x = as_vec(x0, "x0")
    if x.shape[0] != obj.dim:
        raise ConfigError(f"x0 has length {x.shape[0]}, objective expects {obj.dim}")
    if not fset.contains(x, 1e-9):
        raise InfeasibleStartError("x0 lies outside the feasible set")
    return x


def make_estimator(cfg: SolverConfig, N: int) -> Estimator:
    b = cfg.b if cfg.b is not None else default_batch(N)
    if cfg.variant == "D":
        return FullGradient()
    if cfg.variant == "FS":
        q = cfg.q if cfg.q is not None else default_batch(N)
        return Spider(q, b)
    est = Mvr1(b) if cfg.variant == "MVR1" else Mvr2(b)
    if b == N:
        est.replace = False  # a batch the size of the data is the data
    return est


def run(cfg: SolverConfig, obj: Objective, fset: FeasibleSet, x0):
    """Run ``cfg.T`` iterations from ``x0``; return ``(x_best, trace)``.

    ``x_best`` is the evaluated iterate with the smallest FW gap. Trace rows
    are written at ``t = 0``, every ``eval_every`` iterations and at ``t = T``.
    Row ``t`` describes ``x_t`` together with the ``L_t``, ``alpha_t``, ``eta_t``
    and estimator error used to leave it. The final row has no step fields.
    """
    x = check_start(x0, obj, fset)
    sample_rng, lmo_rng, gap_rng = run_streams(cfg.seed)
    est = make_estimator(cfg, obj.n_samples)
    sched = AdaptiveState("FS" if cfg.variant == "D" else cfg.variant, cfg.rho, cfg.beta)
    power = cfg.power
    warm = WarmStart(rng=lmo_rng)
    rec = TraceRecorder(obj, fset, power, WarmStart(rng=gap_rng))
    lmo_calls = 0

    for t in range(cfg.T):
        L_t, alpha_t = sched.next_L_and_alpha()
        g = est.estimate(x, alpha_t, obj, sample_rng)
        v = fset.lmo(g, power, warm)
        lmo_calls += 1
        eta = step_size(0.0, 0.0, g, v, x, L_t)
        if t % cfg.eval_every == 0:
            gap = rec.record(t, x, est.grad_oracle_count, lmo_calls, L_t, alpha_t, eta, g)
            if cfg.stop_gap is not None and gap <= cfg.stop_gap:
                return rec.x_best, rec.trace
        x_next = x + eta * (v - x)
        step = x_next - x
        sched.record_step(float(np.sqrt(np.dot(step, step))))
        x = x_next

    L_t, alpha_t = sched.next_L_and_alpha()
    rec.record(cfg.T, x, est.grad_oracle_count, lmo_calls, L_t, alpha_t)
    return rec.x_best, rec.trace
