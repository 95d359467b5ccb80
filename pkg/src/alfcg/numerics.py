"""Linear-algebra helpers shared by every other module.

Vectors and matrices are plain float64 numpy arrays. Random streams come
from :func:`make_rng`, which always uses the PCG64 bit generator so that a
seed reproduces the same draws on every platform.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .exceptions import DegenerateDirectionError, InvalidParameterError

DEFAULT_POWER_TOL = 1e-10
DEFAULT_POWER_MAX_ITER = 100


def make_rng(seed: int) -> np.random.Generator:
    """Seeded PCG64 generator (the only RNG algorithm used in the package)."""
    return np.random.Generator(np.random.PCG64(seed))


def as_vec(x, name: str = "x") -> np.ndarray:
    """Copy ``x`` into a finite 1-D float64 array."""
    v = np.array(x, dtype=np.float64).ravel()
    if not np.all(np.isfinite(v)):
        raise InvalidParameterError(f"{name} contains non-finite entries")
    return v


def norm(v, p=2) -> float:
    """The l_p norm of ``v`` for ``p >= 1`` or ``p == "inf"``."""
    v = np.asarray(v, dtype=np.float64).ravel()
    if isinstance(p, str):
        if p != "inf":
            raise InvalidParameterError(f"unknown norm order {p!r}")
        p = np.inf
    if not p >= 1:
        raise InvalidParameterError(f"norm order must be >= 1, got {p}")
    if v.size == 0:
        return 0.0
    if p == np.inf:
        return float(np.max(np.abs(v)))
    if p == 2:
        return float(np.sqrt(np.dot(v, v)))
    if p == 1:
        return float(np.sum(np.abs(v)))
    a = np.abs(v)
    scale = a.max()
    if scale == 0.0:
        return 0.0
    # rescale before powering to keep large p from overflowing
    return float(scale * np.sum((a / scale) ** p) ** (1.0 / p))


@dataclass(frozen=True)
class PowerConfig:
    tol: float = DEFAULT_POWER_TOL
    max_iter: int = DEFAULT_POWER_MAX_ITER


@dataclass
class SingularPair:
    sigma: float
    u: np.ndarray
    v: np.ndarray
    converged: bool
    n_iter: int


RITZ_WINDOW = 20


def top_singular_pair(M, tol=DEFAULT_POWER_TOL, max_iter=DEFAULT_POWER_MAX_ITER,
                      warm_start=None, rng=None) -> SingularPair:
    """Leading singular triple of ``M`` by power iteration on ``M^T M``.

    Iteration stops once the relative change of sigma drops below ``tol``.
    If ``max_iter`` runs out first the best pair is still returned with
    ``converged=False``.
    """
    M = np.asarray(M, dtype=np.float64)
    if M.ndim != 2:
        raise InvalidParameterError("top_singular_pair expects a 2-D matrix")
    if tol <= 0:
        raise InvalidParameterError("tol must be positive")
    if not np.any(M):
        raise DegenerateDirectionError("matrix is identically zero")

    v = None
    if warm_start is not None:
        v = np.array(warm_start, dtype=np.float64).ravel()
        if v.shape[0] != M.shape[1] or not np.any(M @ v):
            v = None
    if v is None:
        if rng is None:
            rng = make_rng(0)
        v = rng.standard_normal(M.shape[1])
        if not np.any(M @ v):
            # random vector in the null space; fall back to the heaviest column
            v = np.zeros(M.shape[1])
            v[int(np.argmax(np.sum(M * M, axis=0)))] = 1.0
    v = v / np.sqrt(np.dot(v, v))

    Mv = M @ v
    sigma = float(np.sqrt(np.dot(Mv, Mv)))
    converged = False
    recent = [v]
    it = 0
    for it in range(1, max_iter + 1):
        u = Mv / sigma
        w = M.T @ u
        v = w / np.sqrt(np.dot(w, w))
        Mv = M @ v
        new_sigma = float(np.sqrt(np.dot(Mv, Mv)))
        change = abs(new_sigma - sigma)
        sigma = new_sigma
        recent.append(v)
        if len(recent) > RITZ_WINDOW:
            recent.pop(0)
        if change <= tol * sigma:
            converged = True
            break
    if not converged and len(recent) > 1:
        v, Mv, sigma = _ritz_refine(M, recent, v, Mv, sigma)
    u = Mv / sigma
    return SingularPair(sigma=sigma, u=u, v=v, converged=converged, n_iter=it)


def _ritz_refine(M, iterates, v, Mv, sigma):
    # Slow convergence means sigma_2 is close to sigma_1. The recent iterates
    # span that cluster, so the best pair in their span beats the last iterate.
    Q, _ = np.linalg.qr(np.column_stack(iterates))
    _, S, Wt = np.linalg.svd(M @ Q, full_matrices=False)
    if S[0] <= sigma:
        return v, Mv, sigma
    v_r = Q @ Wt[0]
    v_r /= np.sqrt(np.dot(v_r, v_r))
    Mv_r = M @ v_r
    return v_r, Mv_r, float(np.sqrt(np.dot(Mv_r, Mv_r)))


def spawn_rngs(seed: int, n: int) -> list[np.random.Generator]:
    """``n`` independent PCG64 streams derived from one seed."""
    children = np.random.SeedSequence(seed).spawn(n)
    return [np.random.Generator(np.random.PCG64(s)) for s in children]
