"""Seeded k-means clustering: k-means++ initialization plus Lloyd iterations.

Hand-rolled rather than delegated so the contracts the selectors rely on are
exact: deterministic seeding, smallest-index tie-breaks, empty-cluster repair,
and a per-iteration inertia trace.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np


@dataclass(frozen=True)
class ClusterModel:
    """Result of one k-means run.  Cluster ids are 0-based."""

    k: int
    assignments: np.ndarray  # (N,) cluster id per sample
    centroids: np.ndarray  # (k, d)
    inertia: float  # sum of squared sample-to-assigned-centroid distances
    member_lists: tuple[np.ndarray, ...]  # per-cluster sorted sample indices
    inertia_history: tuple[float, ...] = ()  # inertia after each assignment step

    def __post_init__(self):
        for arr in (self.assignments, self.centroids, *self.member_lists):
            np.asarray(arr).setflags(write=False)


def _squared_distances(X: np.ndarray, centroids: np.ndarray) -> np.ndarray:
    # (N, k); squared Euclidean keeps exact ties exact (no sqrt noise)
    diff = X[:, None, :] - centroids[None, :, :]
    return np.einsum("nkd,nkd->nk", diff, diff)


def _plus_plus_init(X: np.ndarray, k: int, rng: np.random.Generator) -> np.ndarray:
    n = X.shape[0]
    chosen = [int(rng.integers(n))]
    d2 = ((X - X[chosen[0]]) ** 2).sum(axis=1)
    for _ in range(1, k):
        total = d2.sum()
        if total > 0:
            idx = int(rng.choice(n, p=d2 / total))
        else:
            # remaining mass is zero (duplicate points): take the smallest unchosen index
            idx = int(next(i for i in range(n) if i not in set(chosen)))
        chosen.append(idx)
        d2 = np.minimum(d2, ((X - X[idx]) ** 2).sum(axis=1))
    return X[chosen].copy()


def _assign(X, centroids):
    d2 = _squared_distances(X, centroids)
    assignments = d2.argmin(axis=1)  # ties resolve to the lowest cluster id
    return assignments, d2[np.arange(X.shape[0]), assignments]


def _repair_empty(X, centroids, assignments, point_d2):
    """Give each empty cluster the point currently farthest from its centroid."""
    k = centroids.shape[0]
    counts = np.bincount(assignments, minlength=k)
    for empty in np.flatnonzero(counts == 0):
        movable = counts[assignments] > 1  # never drain a singleton cluster
        scores = np.where(movable, point_d2, -1.0)
        pick = int(scores.argmax())
        counts[assignments[pick]] -= 1
        assignments[pick] = empty
        counts[empty] = 1
        centroids[empty] = X[pick]
        point_d2[pick] = 0.0
    return assignments, centroids, point_d2


def kmeans(
    points: np.ndarray,
    k: int,
    seed: int,
    max_iter: int = 100,
    tol: float = 1e-6,
    init_centroids: np.ndarray | None = None,
) -> ClusterModel:
    """Cluster ``points`` into ``k`` groups, deterministically for a given seed.

    Stops when the largest centroid movement drops to ``tol`` or after
    ``max_iter`` Lloyd iterations.  Every returned cluster is non-empty.
    ``init_centroids`` bypasses the k-means++ seeding (reproducibility hook).
    """
    X = np.asarray(points, dtype=float)
    if X.ndim != 2:
        raise ValueError(f"points must be 2-D, got shape {X.shape}")
    if not np.isfinite(X).all():
        raise ValueError("points contain non-finite values")
    n = X.shape[0]
    if not 1 <= k <= n:
        raise ValueError(f"need 1 <= k <= N, got k={k}, N={n}")
    if max_iter < 1:
        raise ValueError(f"max_iter must be >= 1, got {max_iter}")
    if tol < 0:
        raise ValueError(f"tol must be >= 0, got {tol}")

    if init_centroids is not None:
        centroids = np.array(init_centroids, dtype=float)
        if centroids.shape != (k, X.shape[1]):
            raise ValueError(f"init_centroids must have shape ({k}, {X.shape[1]})")
    else:
        centroids = _plus_plus_init(X, k, np.random.default_rng(seed))
    history = []
    for _ in range(max_iter):
        assignments, point_d2 = _assign(X, centroids)
        assignments, centroids, point_d2 = _repair_empty(X, centroids, assignments, point_d2)
        history.append(float(point_d2.sum()))
        new_centroids = np.stack([X[assignments == m].mean(axis=0) for m in range(k)])
        shift = float(np.sqrt(((new_centroids - centroids) ** 2).sum(axis=1)).max())
        centroids = new_centroids
        if shift <= tol:
            break

    # settle assignments against the final centroids
    assignments, point_d2 = _assign(X, centroids)
    assignments, centroids, point_d2 = _repair_empty(X, centroids, assignments, point_d2)
    history.append(float(point_d2.sum()))
    member_lists = tuple(np.flatnonzero(assignments == m) for m in range(k))
    return ClusterModel(
        k=k,
        assignments=assignments,
        centroids=centroids,
        inertia=float(point_d2.sum()),
        member_lists=member_lists,
        inertia_history=tuple(history),
    )


def nearest_to_centroid(model: ClusterModel, points: np.ndarray, cluster: int) -> int:
    """Index of the cluster member closest to its centroid (ties: smallest index)."""
    if not 0 <= cluster < model.k:
        raise ValueError(f"cluster id {cluster} out of range [0, {model.k})")
    members = model.member_lists[cluster]
    if members.size == 0:
        raise RuntimeError(f"cluster {cluster} is empty; ClusterModel invariant violated")
    X = np.asarray(points, dtype=float)
    d2 = ((X[members] - model.centroids[cluster]) ** 2).sum(axis=1)
    return int(members[d2.argmin()])
