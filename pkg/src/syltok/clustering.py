"""K-means on the unit hypersphere.

Assignment is by highest cosine similarity (equivalently, dot product on
unit vectors) and the centroid update is the L2-normalized mean of the
assigned vectors, so centroids stay on the sphere. Seeding follows the
k-means++ scheme with weights 1 - max-cosine to the centroids chosen so
far, which on unit vectors is proportional to squared Euclidean distance.
"""

from __future__ import annotations

import logging

import numpy as np
from sklearn.base import BaseEstimator, ClusterMixin

logger = logging.getLogger(__name__)


def _normalize_rows(x: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    norms = np.linalg.norm(x, axis=1)
    safe = np.where(norms == 0.0, 1.0, norms)
    return x / safe[:, None], norms


def _plusplus_init(xn: np.ndarray, k: int, rng: np.random.Generator) -> np.ndarray:
    n = xn.shape[0]
    centers = np.empty((k, xn.shape[1]), dtype=np.float64)
    centers[0] = xn[rng.integers(n)]
    best_cos = xn @ centers[0]
    for j in range(1, k):
        weights = np.clip(1.0 - best_cos, 0.0, None)
        total = weights.sum()
        if total <= 0.0:
            idx = int(rng.integers(n))
        else:
            idx = int(rng.choice(n, p=weights / total))
        centers[j] = xn[idx]
        np.maximum(best_cos, xn @ centers[j], out=best_cos)
    return centers


class SphericalKMeans(ClusterMixin, BaseEstimator):
    """Cluster unit-normalized vectors by cosine similarity.

    Parameters
    ----------
    n_clusters : int
        Number of centroids.
    max_iter : int, default 300
        Iteration cap; training also stops as soon as an assignment pass
        changes no labels.
    random_state : int or None
        Seed for k-means++ and empty-cluster reseeding. A fixed seed with
        fixed input reproduces the run bit for bit.

    Attributes
    ----------
    cluster_centers_ : (n_clusters, D) float64 array of unit rows.
    labels_ : final assignment of the (zero-norm-filtered) training vectors.
    n_iter_ : number of assignment passes run.
    converged_ : whether an assignment pass repeated before ``max_iter``.
    objective_history_ : mean max-cosine after every assignment pass. The
        fit raises if this ever decreases; the update and reassignment steps
        both cannot lower it.
    n_dropped_zero_ : zero vectors removed from the training set.
    n_reseeds_ : how many times a cluster lost all members (or had them
        cancel out) and was restarted from a worst-fit point.

    Notes
    -----
    Empty clusters are reseeded from the point with the lowest cosine to its
    assigned centroid, worst first, so every centroid stays meaningful.
    """

    def __init__(self, n_clusters: int, max_iter: int = 300, random_state: int | None = None):
        self.n_clusters = n_clusters
        self.max_iter = max_iter
        self.random_state = random_state

    def _validate(self, x) -> np.ndarray:
        x = np.asarray(x, dtype=np.float64)
        if x.ndim != 2:
            raise ValueError(f"expected 2-D (n_samples, D), got shape {x.shape}")
        if not np.isfinite(x).all():
            raise ValueError("input contains non-finite values")
        return x

    def fit(self, X, y=None):
        if not isinstance(self.n_clusters, (int, np.integer)) or self.n_clusters < 1:
            raise ValueError(f"n_clusters must be a positive integer, got {self.n_clusters!r}")
        if self.max_iter < 1:
            raise ValueError(f"max_iter must be >= 1, got {self.max_iter}")
        x = self._validate(X)
        xn, norms = _normalize_rows(x)
        keep = norms > 0.0
        self.n_dropped_zero_ = int(x.shape[0] - np.count_nonzero(keep))
        if self.n_dropped_zero_:
            logger.warning("dropped %d zero vector(s) before clustering", self.n_dropped_zero_)
            xn = xn[keep]
        n = xn.shape[0]
        if n < self.n_clusters:
            raise ValueError(f"need at least n_clusters={self.n_clusters} nonzero vectors, got {n}")

        rng = np.random.default_rng(self.random_state)
        centers = _plusplus_init(xn, self.n_clusters, rng)

        history: list[float] = []
        prev_labels = None
        self.converged_ = False
        self.n_reseeds_ = 0
        for iteration in range(1, self.max_iter + 1):
            sims = xn @ centers.T
            labels = np.argmax(sims, axis=1)
            assigned_cos = sims[np.arange(n), labels]
            objective = float(assigned_cos.mean())
            if history and objective < history[-1] - 1e-12 * max(1.0, abs(history[-1])):
                raise AssertionError(
                    f"objective decreased at iteration {iteration}: "
                    f"{history[-1]!r} -> {objective!r}"
                )
            history.append(objective)
            if prev_labels is not None and np.array_equal(labels, prev_labels):
                self.converged_ = True
                break
            prev_labels = labels

            counts = np.bincount(labels, minlength=self.n_clusters)
            sums = np.zeros_like(centers)
            for d in range(xn.shape[1]):
                sums[:, d] = np.bincount(labels, weights=xn[:, d], minlength=self.n_clusters)
            sum_norms = np.linalg.norm(sums, axis=1)
            dead = (counts == 0) | (sum_norms < 1e-12)
            live = ~dead
            centers[live] = sums[live] / sum_norms[live, None]
            if np.any(dead):
                # Worst-fit points, in deterministic order, become the new
                # centroids for clusters that lost all members (or whose
                # members cancelled out).
                order = np.argsort(assigned_cos, kind="stable")
                for slot, point in zip(np.flatnonzero(dead), order):
                    centers[slot] = xn[point]
                    self.n_reseeds_ += 1
            # Row norms must survive the update exactly enough to stay on
            # the sphere within 1e-6.
            drift = np.abs(np.linalg.norm(centers, axis=1) - 1.0).max()
            if drift > 1e-6:
                raise AssertionError(f"centroid left the unit sphere by {drift:g}")

        self.cluster_centers_ = centers
        self.labels_ = labels
        self.n_iter_ = iteration
        self.objective_history_ = np.asarray(history)
        return self

    def predict(self, X) -> np.ndarray:
        """Index of the highest-cosine centroid per row; ties pick the lowest index."""
        x = self._validate(X)
        xn, _ = _normalize_rows(x)
        return np.argmax(xn @ self.cluster_centers_.T, axis=1)
