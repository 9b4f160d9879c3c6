"""Feature compression and similarity primitives.

PCA here is exact and deterministic: fitted by singular value decomposition
of the centered data with a fixed sign convention (the largest-magnitude
coordinate of each component is positive), so identical inputs always give
identical models. Rank-deficient inputs are fine; LAPACK returns orthonormal
directions for the zero-variance tail as well.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ValidationError


@dataclass(frozen=True)
class PcaModel:
    """Mean, principal directions (rows, descending variance), and their variances."""

    mean: np.ndarray
    components: np.ndarray
    explained_variance: np.ndarray

    @property
    def n_components(self) -> int:
        return self.components.shape[0]

    @property
    def dim(self) -> int:
        return self.components.shape[1]


def pca_fit(X: np.ndarray, n_components: int) -> PcaModel:
    """Fit a PCA model retaining the top ``n_components`` directions.

    Requires at least two samples and n_components <= min(n - 1, dim).
    Explained variances use the unbiased (n - 1) normalization.
    """
    X = np.asarray(X, dtype=np.float64)
    if X.ndim != 2:
        raise ValidationError("pca_fit expects a 2-D matrix")
    n, dim = X.shape
    if n < 2:
        raise ValidationError("pca_fit needs at least 2 samples")
    if not np.isfinite(X).all():
        raise ValidationError("pca_fit input contains non-finite values")
    if n_components < 1 or n_components > min(n - 1, dim):
        raise ValidationError(
            f"n_components={n_components} outside [1, min(n-1, dim)] = "
            f"[1, {min(n - 1, dim)}]"
        )

    mean = X.mean(axis=0)
    _, s, vt = np.linalg.svd(X - mean, full_matrices=False)
    components = vt[:n_components].copy()
    variance = (s[:n_components] ** 2) / (n - 1)

    # Deterministic orientation: flip each component so its largest-magnitude
    # coordinate is positive (first such coordinate on exact ties).
    for row in components:
        pivot = int(np.argmax(np.abs(row)))
        if row[pivot] < 0:
            row *= -1.0

    return PcaModel(mean=mean, components=components, explained_variance=variance)


def pca_project(model: PcaModel, X: np.ndarray) -> np.ndarray:
    """Center rows of ``X`` and project onto the model's components."""
    X = np.asarray(X, dtype=np.float64)
    if X.ndim == 1:
        X = X[None, :]
    if X.shape[1] != model.dim:
        raise ValidationError(
            f"dim mismatch: data has {X.shape[1]}, model expects {model.dim}"
        )
    return (X - model.mean) @ model.components.T


def dot(u: np.ndarray, v: np.ndarray) -> float:
    """Plain inner product; the relevance score in a shared embedding space."""
    u = np.asarray(u, dtype=np.float64).ravel()
    v = np.asarray(v, dtype=np.float64).ravel()
    if u.shape != v.shape:
        raise ValidationError(f"dot dims differ: {u.shape} vs {v.shape}")
    return float(u @ v)


def cosine_sim(u: np.ndarray, v: np.ndarray) -> float:
    """Cosine similarity clamped to [-1, 1]; zero vectors score 0 by convention."""
    u = np.asarray(u, dtype=np.float64).ravel()
    v = np.asarray(v, dtype=np.float64).ravel()
    if u.shape != v.shape:
        raise ValidationError(f"cosine dims differ: {u.shape} vs {v.shape}")
    nu = np.linalg.norm(u)
    nv = np.linalg.norm(v)
    if nu == 0.0 or nv == 0.0:
        return 0.0
    return float(np.clip((u @ v) / (nu * nv), -1.0, 1.0))


def unit_rows(M: np.ndarray) -> np.ndarray:
    """Row-normalize a matrix; all-zero rows stay zero rather than becoming NaN."""
    M = np.asarray(M, dtype=np.float64)
    norms = np.linalg.norm(M, axis=1, keepdims=True)
    norms[norms == 0.0] = 1.0
    return M / norms
