"""Deterministic weighted k-means over distinct count vectors.

Used by the gradual refinement to split one color class. Inputs are the
*distinct* neighbor signatures of the class, so equal signatures can never be
separated; ``weights`` carries their multiplicities.
"""
from __future__ import annotations

import numpy as np


def _sq_dists(points: np.ndarray, centers: np.ndarray) -> np.ndarray:
    diff = points[:, None, :] - centers[None, :, :]
    return np.einsum("ijk,ijk->ij", diff, diff)


def farthest_point_seeds(points: np.ndarray, k: int, rng: np.random.Generator) -> np.ndarray:
    """Greedy max-min seeding.

    The first seed is row 0 (callers pass points sorted lexicographically);
    every further seed is a point farthest from the chosen ones, with exact
    ties resolved by ``rng``.
    """
    chosen = [0]
    closest = np.sum((points - points[0]) ** 2, axis=1)
    for _ in range(1, k):
        best = closest.max()
        candidates = np.flatnonzero(closest == best)
        pick = int(candidates[0] if len(candidates) == 1 else rng.choice(candidates))
        chosen.append(pick)
        closest = np.minimum(closest, np.sum((points - points[pick]) ** 2, axis=1))
    return np.asarray(chosen)


def _weighted_means(points, weights, assign, k):
    totals = np.zeros((k, points.shape[1]))
    np.add.at(totals, assign, points * weights[:, None])
    mass = np.bincount(assign, weights=weights, minlength=k)
    return totals / np.maximum(mass, 1e-300)[:, None]


def _repair_empty(points, assign, centers, k):
    """Give each empty cluster the point farthest from the centroid of the largest cluster."""
    while True:
        sizes = np.bincount(assign, minlength=k)
        empty = np.flatnonzero(sizes == 0)
        if len(empty) == 0:
            return assign, centers
        donor = int(np.argmax(sizes))
        idx = np.flatnonzero(assign == donor)
        d = np.sum((points[idx] - centers[donor]) ** 2, axis=1)
        far = int(idx[int(np.argmax(d))])
        assign[far] = empty[0]
        centers[empty[0]] = points[far]


def weighted_kmeans(points, weights, k, rng, max_iter=100, tol=0.0):
    """Cluster distinct ``points`` into ``k`` groups.

    Returns ``(labels, centers)``. Labels are canonical: cluster ids appear in
    order of their first member row, so the output depends only on the data,
    ``k`` and the tie-breaking stream of ``rng``. Whenever there are at least
    two distinct points the result has at least two non-empty clusters.
    """
    points = np.asarray(points, dtype=np.float64)
    weights = np.asarray(weights, dtype=np.float64)
    n = points.shape[0]
    if n == 0:
        return np.zeros(0, dtype=np.int64), np.zeros((0, points.shape[1]))
    if n <= k:
        return np.arange(n), points.copy()

    centers = points[farthest_point_seeds(points, k, rng)].copy()
    assign = None
    for _ in range(max_iter):
        # argmin keeps the lowest cluster index on distance ties
        new_assign = np.argmin(_sq_dists(points, centers), axis=1)
        new_assign, centers = _repair_empty(points, new_assign, centers, k)
        new_centers = _weighted_means(points, weights, new_assign, k)
        shift = np.max(np.abs(new_centers - centers))
        centers = new_centers
        if assign is not None and np.array_equal(assign, new_assign):
            assign = new_assign
            break
        assign = new_assign
        if shift <= tol and tol > 0:
            break

    if len(np.unique(assign)) < 2:
        # separate the two most distant points, everything else joins the nearer one
        d = _sq_dists(points, points)
        i, j = np.unravel_index(int(np.argmax(d)), d.shape)
        centers = points[[i, j]]
        assign = np.argmin(_sq_dists(points, centers), axis=1)
        k = 2

    # canonical relabeling by first occurrence
    _, first = np.unique(assign, return_index=True)
    order = np.argsort(first)
    remap = np.full(k, -1, dtype=np.int64)
    remap[np.unique(assign)[order]] = np.arange(len(order))
    labels = remap[assign]
    final_centers = _weighted_means(points, weights, labels, len(order))
    return labels, final_centers
