"""Contextual similarity by graph transduction over a kNN graph.

Node 0 of every graph is the query; nodes 1..N are the database. The
query's score is pinned to 1 and diffused backwards through a row-stochastic
transition matrix, so after T steps ``f[i]`` is the probability that a walk
started at database node i has reached the query.
"""

from __future__ import annotations

import numpy as np
from scipy.spatial.distance import cdist

from .errors import DimensionMismatch, KTooLarge


def knn_indices(D: np.ndarray, k: int) -> np.ndarray:
    """k nearest neighbours of every node from a distance matrix, self excluded.

    Ties are broken by the lower index.
    """
    D = D.copy()
    np.fill_diagonal(D, np.inf)
    return np.argsort(D, axis=1, kind="stable")[:, :k]


def build_graph(vectors, k: int = 10, sigma="auto") -> np.ndarray:
    """Row-stochastic transition matrix of a directed Gaussian kNN graph.

    ``sigma`` is either ``"auto"`` (mean distance from each node to its k-th
    nearest neighbour, falling back to 1 when that mean is 0) or a positive
    bandwidth. Rows whose weights all vanish become a self-transition.
    """
    X = np.asarray(vectors, dtype=np.float64)
    if X.ndim != 2:
        raise DimensionMismatch("vectors must be a 2-D array of shape (N+1, R)")
    n = X.shape[0]
    if n < 2:
        raise ValueError("a graph needs the query and at least one database node")
    if k < 1 or k > n - 1:
        raise KTooLarge(f"k={k} must lie in [1, {n - 1}]")

    D = cdist(X, X, "euclidean")
    nbrs = knn_indices(D, k)
    rows = np.arange(n)[:, None]
    d_nbr = D[rows, nbrs]

    if isinstance(sigma, str):
        if sigma != "auto":
            raise ValueError(f"unknown sigma mode {sigma!r}")
        s = float(np.mean(d_nbr[:, -1]))
        if s == 0.0:
            s = 1.0
    else:
        s = float(sigma)
        if not s > 0:
            raise ValueError("sigma must be positive")

    # Each row is scaled by exp(d_min^2 / s^2) before normalising. P is
    # unchanged, but rows far from everything no longer underflow to zero.
    W = np.zeros((n, n))
    W[rows, nbrs] = np.exp(-(d_nbr ** 2 - d_nbr[:, :1] ** 2) / s ** 2)
    deg = W.sum(axis=1)
    dead = deg == 0
    W[dead, dead] = 1.0
    deg[dead] = 1.0
    return W / deg[:, None]


def transduce(P, T: int = 20) -> np.ndarray:
    """Diffuse the clamped query score for T steps; returns f of length N+1."""
    P = np.asarray(P, dtype=np.float64)
    if P.ndim != 2 or P.shape[0] != P.shape[1]:
        raise DimensionMismatch("transition matrix must be square")
    if T < 1:
        raise ValueError("T must be at least 1")
    f = np.zeros(P.shape[0])
    f[0] = 1.0
    for _ in range(T):
        f = P @ f
        f[0] = 1.0
        # row sums are 1 only up to rounding
        np.clip(f, 0.0, 1.0, out=f)
    return f


def rank(f) -> np.ndarray:
    """Database indices (1..N) by descending score, ties by ascending index."""
    f = np.asarray(f, dtype=np.float64)
    return np.argsort(-f[1:], kind="stable") + 1


def baseline_cosine_scores(query_vec, db_vecs) -> np.ndarray:
    """Pairwise cosine similarity mapped to [0, 1]; f[0] is the query itself."""
    q = np.asarray(query_vec, dtype=np.float64)
    X = np.asarray(db_vecs, dtype=np.float64)
    if X.ndim != 2 or q.ndim != 1 or X.shape[1] != q.shape[0]:
        raise DimensionMismatch(
            f"query of shape {q.shape} does not match database of shape {X.shape}")
    qn = np.linalg.norm(q)
    xn = np.linalg.norm(X, axis=1)
    scores = np.full(X.shape[0], 0.5)
    ok = (xn > 0) & (qn > 0)
    cos = (X[ok] @ q) / (xn[ok] * qn)
    scores[ok] = (np.clip(cos, -1.0, 1.0) + 1.0) / 2.0
    return np.concatenate(([1.0], scores))


def contextual_scores(query_vec, db_vecs, k: int = 10, sigma="auto", T: int = 20) -> np.ndarray:
    """Build the query-augmented graph and transduce; returns f of length N+1."""
    q = np.asarray(query_vec, dtype=np.float64)
    X = np.asarray(db_vecs, dtype=np.float64)
    if X.ndim != 2 or q.ndim != 1 or X.shape[1] != q.shape[0]:
        raise DimensionMismatch(
            f"query of shape {q.shape} does not match database of shape {X.shape}")
    P = build_graph(np.vstack([q, X]), k=k, sigma=sigma)
    return transduce(P, T)
