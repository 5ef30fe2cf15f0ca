"""Ground truth and scoring.

Batch PCA solves the covariance eigenproblem exactly and serves as the
reference the streaming estimates are graded against; the metrics express
how much optimal captured energy an estimate misses.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from .errors import (DegenerateSpectrum, DimensionMismatch,
                     InsufficientSamples, ZeroEnergy)
from .linalg import projection_energy

LOG_CONVERGENCE_FLOOR = 1e-16


@dataclass(frozen=True)
class CovarianceSpec:
    """Data matrix plus the covariance convention applied to it.

    The covariance is sum_i x_i x_iᵀ / (n - 1); samples are the columns of
    ``data`` and are mean-subtracted first only when ``centered`` is set.
    """

    data: np.ndarray     # (d, n)
    centered: bool = False

    def __post_init__(self):
        X = np.asarray(self.data, dtype=np.float64)
        if X.ndim != 2:
            raise DimensionMismatch(f"data must be 2-d, got shape {X.shape}")
        if X.shape[1] < 2:
            raise InsufficientSamples(
                f"need n >= 2 for the n-1 divisor, got n={X.shape[1]}")
        object.__setattr__(self, "data", X)

    @property
    def divisor(self):
        return self.data.shape[1] - 1


class EigenPair(NamedTuple):
    value: float
    vector: np.ndarray


def batch_pca(spec, k):
    """Top-k eigenpairs of the covariance, (basis (d, k), values descending).

    Small-d inputs eigendecompose the d×d covariance directly. When n < d
    the n×n sample Gram matrix XᵀX/(n−1) is decomposed instead and its
    eigenvectors mapped through u -> X u / ||X u|| — same top spectrum, and
    the d×d matrix is never formed, which is what keeps wide data (d in the
    tens of thousands, n a few thousand) tractable.
    """
    X = spec.data
    d, n = X.shape
    if not 1 <= k <= min(d, n):
        raise InsufficientSamples(
            f"need 1 <= k <= min(d, n) = {min(d, n)}, got k={k}")
    if spec.centered:
        X = X - X.mean(axis=1, keepdims=True)

    if d <= n:
        cov = (X @ X.T) / spec.divisor
        eigvals, eigvecs = np.linalg.eigh(cov)
        order = np.argsort(eigvals)[::-1]
        values = eigvals[order[:k]]
        basis = np.ascontiguousarray(eigvecs[:, order[:k]])
        next_value = eigvals[order[k]] if k < d else None
    else:
        gram = (X.T @ X) / spec.divisor
        eigvals, eigvecs = np.linalg.eigh(gram)
        order = np.argsort(eigvals)[::-1]
        values = eigvals[order[:k]]
        scale = max(1.0, float(eigvals[order[0]]))
        if np.any(values <= 1e-12 * scale):
            raise InsufficientSamples(
                "data rank is below k; trailing eigenvectors are undefined")
        mapped = X @ eigvecs[:, order[:k]]
        basis = np.ascontiguousarray(mapped / np.linalg.norm(mapped, axis=0))
        next_value = eigvals[order[k]] if k < n else None

    if next_value is not None and values[-1] - next_value < 1e-10:
        warnings.warn(
            f"eigenvalues {k} and {k + 1} coincide within 1e-10; "
            "the top-k basis is not unique", DegenerateSpectrum, stacklevel=2)
    return basis, values


def top_eigenpairs(spec, k):
    """``batch_pca`` reshaped into a list of (value, vector) pairs."""
    basis, values = batch_pca(spec, k)
    return [EigenPair(float(values[i]), basis[:, i]) for i in range(k)]


def eigengap(values):
    """Gap between the two leading eigenvalues, a scale diagnostic."""
    values = np.asarray(values, dtype=np.float64)
    if values.shape[0] < 2:
        raise InsufficientSamples("need at least two eigenvalues for a gap")
    return float(values[0] - values[1])


def convergence(X, W, V_star):
    """Fraction of the optimal captured energy the estimate misses.

    1 − ||Xᵀ W||²_F / ||Xᵀ V*||²_F, clamped to [0, 1] (tiny negatives from
    rounding clamp to 0). ``V_star`` must be the batch reference for the
    same X and k.
    """
    reference = projection_energy(X, V_star)
    if reference == 0.0:
        raise ZeroEnergy("reference basis captures zero energy")
    value = 1.0 - projection_energy(X, W) / reference
    return min(max(value, 0.0), 1.0)


def accuracy(conv):
    """Complement of the convergence metric."""
    return 1.0 - conv


def log_convergence(conv, floor=LOG_CONVERGENCE_FLOOR):
    """log10 of the convergence metric, floored to avoid -inf at exact zero."""
    return math.log10(max(conv, floor))
