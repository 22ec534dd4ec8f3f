"""Nonnegative matrix factorization of histogram matrices.

Squared Frobenius loss minimised with multiplicative updates::

    H <- H * (W^T V) / (W^T W H + eps)
    W <- W * (V H^T) / (W H H^T + eps)

The basis is learned once on the training histograms; new histograms are
projected onto the frozen basis by running the coefficient update alone.
"""

from __future__ import annotations

from typing import NamedTuple

import numpy as np

from .errors import DimensionMismatch, NonFiniteObjective, RankTooLarge

EPS = 1e-12


class Factorization(NamedTuple):
    W: np.ndarray
    H: np.ndarray
    objective: list[float]


def _uniform_open_closed(rng: np.random.Generator, shape) -> np.ndarray:
    # rng.random() draws from [0, 1); flip it to (0, 1]
    return 1.0 - rng.random(shape)


def reconstruction_error(V, W, H) -> float:
    """Squared Frobenius norm of V - W H."""
    V = np.asarray(V, dtype=np.float64)
    W = np.asarray(W, dtype=np.float64)
    H = np.asarray(H, dtype=np.float64)
    if V.ndim == 1:
        V = V[:, None]
    if H.ndim == 1:
        H = H[:, None]
    if W.ndim != 2 or W.shape[1] != H.shape[0] or V.shape != (W.shape[0], H.shape[1]):
        raise DimensionMismatch(
            f"cannot compare V{V.shape} with W{W.shape} @ H{H.shape}")
    R = V - W @ H
    return float(np.sum(R * R))


def _check_nonnegative(name, M):
    if M.ndim != 2:
        raise DimensionMismatch(f"{name} must be 2-D")
    if not np.all(np.isfinite(M)) or np.any(M < 0):
        raise ValueError(f"{name} must be finite and nonnegative")


def _converged(prev: float, cur: float, tol: float) -> bool:
    if prev <= 0.0:
        return True
    return (prev - cur) / prev < tol


def nmf_factorize(V, R: int, max_iters: int = 200, tol: float = 1e-6,
                  seed: int = 0) -> Factorization:
    """Factorize a K x N nonnegative matrix as W (K x R) times H (R x N).

    ``objective`` holds the loss at initialisation followed by the loss after
    every full sweep (H update then W update).
    """
    V = np.asarray(V, dtype=np.float64)
    _check_nonnegative("V", V)
    K, N = V.shape
    if R < 1 or R > min(K, N):
        raise RankTooLarge(f"rank {R} must lie in [1, min(K, N)] = [1, {min(K, N)}]")
    if max_iters < 1 or tol <= 0:
        raise ValueError("max_iters and tol must be positive")

    rng = np.random.default_rng(seed)
    W = _uniform_open_closed(rng, (K, R))
    H = _uniform_open_closed(rng, (R, N))
    trace = [reconstruction_error(V, W, H)]
    for _ in range(max_iters):
        H *= (W.T @ V) / (W.T @ W @ H + EPS)
        assert np.all(H >= 0)
        W *= (V @ H.T) / (W @ (H @ H.T) + EPS)
        assert np.all(W >= 0)
        f = reconstruction_error(V, W, H)
        if not np.isfinite(f):
            raise NonFiniteObjective(f"objective became {f} after {len(trace)} sweeps")
        trace.append(f)
        if _converged(trace[-2], f, tol):
            break
    # an all-zero basis column would make projection degenerate
    W = np.maximum(W, EPS)
    return Factorization(W, H, trace)


def nmf_project(h, W, max_iters: int = 200, tol: float = 1e-6, seed: int = 0,
                return_trace: bool = False):
    """Nonnegative coefficients c with W c close to ``h``; W is held fixed."""
    h = np.asarray(h, dtype=np.float64)
    W = np.asarray(W, dtype=np.float64)
    if W.ndim != 2 or h.ndim != 1 or h.shape[0] != W.shape[0]:
        raise DimensionMismatch(
            f"histogram of shape {h.shape} does not match basis of shape {W.shape}")
    if max_iters < 1 or tol <= 0:
        raise ValueError("max_iters and tol must be positive")
    rng = np.random.default_rng(seed)
    c = _uniform_open_closed(rng, W.shape[1])
    WtW = W.T @ W
    Wth = W.T @ h

    def loss(c):
        r = h - W @ c
        return float(r @ r)

    trace = [loss(c)]
    for _ in range(max_iters):
        c *= Wth / (WtW @ c + EPS)
        f = loss(c)
        if not np.isfinite(f):
            raise NonFiniteObjective(f"projection objective became {f}")
        trace.append(f)
        if _converged(trace[-2], f, tol):
            break
    if return_trace:
        return c, trace
    return c


def project_columns(V, W, max_iters: int = 200, tol: float = 1e-6, seed: int = 0) -> np.ndarray:
    """Project every column of V onto the fixed basis W; returns R x N."""
    V = np.asarray(V, dtype=np.float64)
    if V.ndim != 2:
        raise DimensionMismatch("V must be 2-D")
    return np.column_stack([nmf_project(V[:, n], W, max_iters, tol, seed)
                            for n in range(V.shape[1])])
