"""Constraint sets with linear minimization oracles.

Every set works on flat parameter vectors. ``NuclearBall`` reshapes them to
``(rows, cols)`` in row-major order.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .exceptions import InvalidParameterError
from .numerics import PowerConfig, make_rng, norm, top_singular_pair


@dataclass
class WarmStart:
    """Caller-owned power-iteration memory for repeated nuclear LMO calls."""

    vector: np.ndarray | None = None
    rng: np.random.Generator = field(default_factory=lambda: make_rng(0))
    last_converged: bool = True


class FeasibleSet:
    radius: float

    def lmo(self, d, power: PowerConfig | None = None, warm: WarmStart | None = None) -> np.ndarray:
        raise NotImplementedError

    def diameter(self, dim: int | None = None) -> float:
        raise NotImplementedError

    def constraint_norm(self, x) -> float:
        raise NotImplementedError

    def dual_norm(self, d) -> float:
        raise NotImplementedError

    def contains(self, x, tol: float = 1e-9) -> bool:
        return self.constraint_norm(x) <= self.radius * (1.0 + tol)

    def _check_radius(self):
        if not (self.radius > 0 and math.isfinite(self.radius)):
            raise InvalidParameterError("radius must be > 0")


@dataclass(frozen=True)
class LpBall(FeasibleSet):
    """``{x : ||x||_p <= radius}`` for ``p > 1``."""

    radius: float
    p: float
    dim: int | None = None

    def __post_init__(self):
        self._check_radius()
        if not self.p > 1:
            raise InvalidParameterError("LpBall needs p > 1 (use L1Ball for p = 1)")

    @property
    def q(self) -> float:
        if self.p == math.inf:
            return 1.0
        return self.p / (self.p - 1.0)

    def lmo(self, d, power=None, warm=None):
        d = np.asarray(d, dtype=np.float64).ravel()
        scale = np.max(np.abs(d)) if d.size else 0.0
        if scale == 0.0:
            return np.zeros_like(d)
        a = d / scale
        if self.p == math.inf:
            return -self.radius * np.sign(a)
        q = self.q
        w = np.abs(a) ** (q - 1.0)
        # ||w||_p == ||a||_q^(q-1), so normalizing w puts v on the sphere
        return -self.radius * np.sign(a) * w / norm(w, self.p)

    def diameter(self, dim=None):
        if self.p >= 2:
            return 2.0 * self.radius
        n = dim if dim is not None else self.dim
        if n is None:
            raise InvalidParameterError("diameter of an l_p ball with p < 2 needs the dimension")
        return 2.0 * self.radius * n ** (1.0 / self.p - 0.5)

    def constraint_norm(self, x):
        return norm(x, "inf" if self.p == math.inf else self.p)

    def dual_norm(self, d):
        return norm(d, self.q)


@dataclass(frozen=True)
class L1Ball(FeasibleSet):
    radius: float

    def __post_init__(self):
        self._check_radius()

    def lmo(self, d, power=None, warm=None):
        d = np.asarray(d, dtype=np.float64).ravel()
        v = np.zeros_like(d)
        if d.size == 0 or not np.any(d):
            return v
        i = int(np.argmax(np.abs(d)))  # argmax returns the first index on ties
        v[i] = -self.radius * np.sign(d[i])
        return v

    def diameter(self, dim=None):
        return 2.0 * self.radius

    def constraint_norm(self, x):
        return norm(x, 1)

    def dual_norm(self, d):
        return norm(d, "inf")


@dataclass(frozen=True)
class NuclearBall(FeasibleSet):
    """``{X in R^{rows x cols} : ||X||_* <= radius}`` on flattened matrices."""

    radius: float
    rows: int
    cols: int

    def __post_init__(self):
        self._check_radius()
        if self.rows < 1 or self.cols < 1:
            raise InvalidParameterError("rows and cols must be positive")

    def _as_matrix(self, x) -> np.ndarray:
        x = np.asarray(x, dtype=np.float64)
        if x.size != self.rows * self.cols:
            raise InvalidParameterError(
                f"expected {self.rows * self.cols} entries, got {x.size}")
        return x.reshape(self.rows, self.cols)

    def lmo(self, d, power=None, warm=None):
        D = self._as_matrix(d)
        if not np.any(D):
            return np.zeros(D.size)
        power = power or PowerConfig()
        warm = warm if warm is not None else WarmStart()
        pair = top_singular_pair(D, tol=power.tol, max_iter=power.max_iter,
                                 warm_start=warm.vector, rng=warm.rng)
        warm.vector = pair.v
        warm.last_converged = pair.converged
        return (-self.radius * np.outer(pair.u, pair.v)).ravel()

    def diameter(self, dim=None):
        # extreme points are rank one with Frobenius norm equal to the radius
        return 2.0 * self.radius

    def constraint_norm(self, x):
        X = self._as_matrix(x)
        fro = float(np.linalg.norm(X))
        if X.size > 10_000:
            return math.sqrt(min(X.shape)) * fro
        return float(np.sum(np.linalg.svd(X, compute_uv=False)))

    def contains(self, x, tol=1e-9):
        X = self._as_matrix(x)
        bound = self.radius * (1.0 + tol)
        fro = float(np.linalg.norm(X))
        if math.sqrt(min(X.shape)) * fro <= bound:
            return True
        if X.size > 10_000:
            return False
        return float(np.sum(np.linalg.svd(X, compute_uv=False))) <= bound

    def dual_norm(self, d):
        return float(np.linalg.norm(self._as_matrix(d), 2))


def make_feasible_set(kind: str, radius: float, *, p: float | None = None,
                      shape: tuple[int, int] | None = None, dim: int | None = None) -> FeasibleSet:
    kind = kind.lower()
    if kind in ("nuclear", "nuclear_ball"):
        if shape is None:
            raise InvalidParameterError("nuclear ball needs a matrix shape")
        return NuclearBall(radius, *shape)
    if kind in ("lp", "lp_ball"):
        if p is None:
            raise InvalidParameterError("lp ball needs an exponent p")
        return LpBall(radius, p, dim)
    if kind in ("l1", "l1_ball"):
        return L1Ball(radius)
    raise InvalidParameterError(f"unknown constraint kind {kind!r}")
