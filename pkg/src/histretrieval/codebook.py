"""Visual codebook: k-means training and hard-assignment histograms."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy import sparse
from scipy.spatial.distance import cdist

from .errors import DimensionMismatch, EmptyPatchSet, TooFewDescriptors

_MOVE_TOL = 1e-6
# relative slack for the descent check; Lloyd steps are exact up to rounding
_DESCENT_RTOL = 1e-9
_CHUNK = 8192
# well above the rounding error of the norm expansion
_AMBIGUOUS_RTOL = 1e-9


@dataclass(eq=False)
class Codebook:
    centroids: np.ndarray
    objective: list[float] = field(default_factory=list)
    n_iter: int = 0

    def __post_init__(self):
        self.centroids = np.asarray(self.centroids, dtype=np.float64)
        if self.centroids.ndim != 2 or self.centroids.shape[0] < 1:
            raise ValueError("centroids must be a non-empty 2-D array")
        if not np.all(np.isfinite(self.centroids)):
            raise ValueError("centroids must be finite")

    @property
    def K(self) -> int:
        return self.centroids.shape[0]

    @property
    def D(self) -> int:
        return self.centroids.shape[1]


def _as_descriptors(descriptors) -> np.ndarray:
    X = np.asarray(descriptors, dtype=np.float64)
    if X.ndim == 1:
        X = X[None, :]
    if X.ndim != 2:
        raise DimensionMismatch("descriptors must form a 2-D array")
    return X


def nearest_centroids(X: np.ndarray, centroids: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Index of and squared distance to the nearest centroid for each row of X.

    Candidates come from the fast ``|x|^2 - 2 x.c + |c|^2`` expansion; rows
    whose two best candidates are closer than the expansion's rounding error
    are re-decided with exact pairwise distances. The result for a row never
    depends on the other rows, and ties go to the lowest index.
    """
    X = np.ascontiguousarray(X, dtype=np.float64)
    cc = np.einsum("ij,ij->i", centroids, centroids)
    labels = np.empty(X.shape[0], dtype=np.int64)
    for start in range(0, X.shape[0], _CHUNK):
        xb = X[start:start + _CHUNK]
        xx = np.einsum("ij,ij->i", xb, xb)
        d = xb @ centroids.T
        d *= -2.0
        d += cc
        d += xx[:, None]
        idx = np.argmin(d, axis=1)
        if centroids.shape[0] > 1:
            rows = np.arange(d.shape[0])
            best = d[rows, idx]
            d[rows, idx] = np.inf
            slack = _AMBIGUOUS_RTOL * (xx + cc.max())
            amb = np.flatnonzero(d.min(axis=1) - best <= slack)
            if amb.size:
                idx[amb] = np.argmin(cdist(xb[amb], centroids, "sqeuclidean"), axis=1)
        labels[start:start + _CHUNK] = idx
    diff = X - centroids[labels]
    return labels, np.einsum("ij,ij->i", diff, diff)


def _cluster_sums(X: np.ndarray, labels: np.ndarray, K: int) -> np.ndarray:
    onehot = sparse.csr_matrix((np.ones(labels.size), (labels, np.arange(labels.size))),
                               shape=(K, labels.size))
    return np.asarray(onehot @ X)


def _kmeans_plusplus(X: np.ndarray, K: int, rng: np.random.Generator) -> np.ndarray:
    n = X.shape[0]
    chosen = [int(rng.integers(n))]
    closest = cdist(X, X[chosen], "sqeuclidean")[:, 0]
    for _ in range(1, K):
        total = closest.sum()
        # total > 0 while fewer than K distinct points have been picked
        i = int(rng.choice(n, p=closest / total))
        chosen.append(i)
        closest = np.minimum(closest, cdist(X, X[i:i + 1], "sqeuclidean")[:, 0])
    return X[chosen].copy()


def _repair_empty(X, centroids, labels, dist, counts):
    """Move each empty centroid onto the point farthest from its own centroid."""
    empty = np.flatnonzero(counts == 0)
    if empty.size == 0:
        return
    dist = dist.copy()
    for j in empty:
        i = int(np.argmax(dist))
        centroids[j] = X[i]
        counts[labels[i]] -= 1
        labels[i] = j
        counts[j] = 1
        dist[i] = 0.0


def train_codebook(descriptors, K: int, seed: int = 0, max_iters: int = 100) -> Codebook:
    """Lloyd's k-means with k-means++ seeding.

    Stops when no assignment changes, when no centroid moves by more than
    1e-6, or after ``max_iters`` iterations. The within-cluster sum of
    squares after each assignment step is kept in ``Codebook.objective`` and
    checked to be non-increasing.
    """
    X = _as_descriptors(descriptors)
    if X.shape[0] == 0:
        raise TooFewDescriptors("no descriptors to cluster")
    if K < 1 or max_iters < 1:
        raise ValueError("K and max_iters must be positive")
    n_distinct = np.unique(X, axis=0).shape[0]
    if K > n_distinct:
        raise TooFewDescriptors(f"K={K} exceeds {n_distinct} distinct descriptors")

    rng = np.random.default_rng(seed)
    centroids = _kmeans_plusplus(X, K, rng)
    labels, dist = nearest_centroids(X, centroids)
    trace = [float(dist.sum())]
    n_iter = 0
    for n_iter in range(1, max_iters + 1):
        counts = np.bincount(labels, minlength=K)
        sums = _cluster_sums(X, labels, K)
        new = centroids.copy()
        filled = counts > 0
        new[filled] = sums[filled] / counts[filled, None]
        # distances of every point to its (moved) own centroid
        own = np.sum((X - new[labels]) ** 2, axis=1)
        _repair_empty(X, new, labels, own, counts)
        shift = np.sqrt(np.max(np.sum((new - centroids) ** 2, axis=1)))
        centroids = new
        new_labels, dist = nearest_centroids(X, centroids)
        obj = float(dist.sum())
        if obj > trace[-1] * (1 + _DESCENT_RTOL) + 1e-12:
            raise AssertionError(
                f"k-means objective increased at iteration {n_iter}: {trace[-1]} -> {obj}")
        trace.append(obj)
        changed = np.any(new_labels != labels)
        labels = new_labels
        if not changed or shift < _MOVE_TOL:
            break
    return Codebook(centroids=centroids, objective=trace, n_iter=n_iter)


def assign(descriptor, codebook: Codebook) -> int:
    """Bin index of the nearest visual word (lowest index on ties)."""
    x = np.asarray(descriptor, dtype=np.float64)
    if x.ndim != 1 or x.shape[0] != codebook.D:
        raise DimensionMismatch(
            f"descriptor of shape {x.shape} does not match codebook dimension {codebook.D}")
    labels, _ = nearest_centroids(x[None, :], codebook.centroids)
    return int(labels[0])


def quantize_image(descriptors, codebook: Codebook) -> np.ndarray:
    """L1-normalised bag-of-words histogram of one image's descriptors."""
    X = _as_descriptors(descriptors)
    if X.shape[0] == 0:
        raise EmptyPatchSet("cannot quantize an empty descriptor set")
    if X.shape[1] != codebook.D:
        raise DimensionMismatch(
            f"descriptor dimension {X.shape[1]} does not match codebook dimension {codebook.D}")
    labels, _ = nearest_centroids(X, codebook.centroids)
    return np.bincount(labels, minlength=codebook.K) / X.shape[0]
