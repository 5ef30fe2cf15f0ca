"""Dense primitives the estimators and metrics are built from.

A basis is a plain float64 ndarray of shape (d, k) with orthonormal
columns; a data block is a (d, B) ndarray of B consecutive samples.
Everything here is a pure function; the per-step kernels are dispatched
through the selected backend (see ``streampca._backend``).
"""

from __future__ import annotations

import math
from typing import NamedTuple

import numpy as np

from . import _backend
from .errors import DimensionMismatch, NearZeroVector, RankDeficient


class DataBlock(NamedTuple):
    """B consecutive samples revealed at one streaming step."""

    samples: np.ndarray   # (d, B), columns are samples
    index: int            # zero-based position of the block in the stream


def zero_threshold(d):
    """Norms at or below this count as zero for dimension-d vectors."""
    return 1e-12 * math.sqrt(d)


def _as_matrix(M, name="matrix"):
    M = np.asarray(M, dtype=np.float64)
    if M.ndim != 2:
        raise DimensionMismatch(f"{name} must be 2-d, got shape {M.shape}")
    return M


def _block_samples(block):
    if isinstance(block, DataBlock):
        return block.samples
    return _as_matrix(block, "block")


def normalize(v):
    """Return v / ||v||.

    Raises NearZeroVector when ||v|| is at or below the zero threshold,
    signalling a degenerate update the caller must resolve.
    """
    v = np.asarray(v, dtype=np.float64)
    if v.ndim != 1:
        raise DimensionMismatch(f"expected a vector, got shape {v.shape}")
    nrm = np.linalg.norm(v)
    if nrm <= zero_threshold(v.shape[0]):
        raise NearZeroVector(f"norm {nrm:.3e} at or below threshold")
    return v / nrm


def orthonormalize(M, *, on_deficient="replace", fallback=None, rng=None):
    """Column-by-column modified Gram-Schmidt orthonormalization.

    Returns a new (d, k) matrix with orthonormal columns spanning (a subset
    of) the input's column space. When a column's residual vanishes the
    policy decides:

    - ``on_deficient="replace"`` (default): substitute the matching column
      of ``fallback`` if given (at most once per column), else a fresh
      random unit vector, and continue. Keeps long streaming runs alive.
    - ``on_deficient="error"``: raise RankDeficient with the column index.

    ``rng`` seeds the random replacements; a fixed default generator is
    used when omitted so the output stays deterministic.
    """
    M = np.array(_as_matrix(M), order="C", copy=True)
    d, k = M.shape
    if d < k:
        raise DimensionMismatch(f"need d >= k, got {d} < {k}")
    if not np.all(np.isfinite(M)):
        raise DimensionMismatch("input contains non-finite entries")
    if on_deficient not in ("replace", "error"):
        raise ValueError(f"unknown policy {on_deficient!r}")
    if fallback is not None:
        fallback = _as_matrix(fallback, "fallback")
        if fallback.shape != (d, k):
            raise DimensionMismatch(
                f"fallback shape {fallback.shape} != {(d, k)}")

    thr = zero_threshold(d)
    impl = _backend.active()
    fallback_used = np.zeros(k, dtype=bool)
    start = 0
    attempts = 0
    while True:
        j = impl.mgs(M, thr, start)
        if j < 0:
            return M
        if on_deficient == "error":
            raise RankDeficient(j)
        attempts += 1
        if attempts > 8 * k:
            raise RankDeficient(j, f"column {j} still deficient after "
                                   f"{attempts} replacements")
        if fallback is not None and not fallback_used[j]:
            M[:, j] = fallback[:, j]
            fallback_used[j] = True
        else:
            if rng is None:
                rng = np.random.default_rng(0)
            M[:, j] = rng.standard_normal(d)
        # The replacement is raw: remove the projections of the columns
        # already fixed before resuming at column j.
        if j > 0:
            M[:, j] -= M[:, :j] @ (M[:, :j].T @ M[:, j])
        start = j


def gram_apply(block, W):
    """Apply the block's scaled Gram matrix: X (Xᵀ W) / B.

    Computed as two rectangular products; the d×d matrix is never formed,
    which is what keeps the memory footprint independent of d².
    """
    X = _block_samples(block)
    W = _as_matrix(W, "W")
    if X.shape[0] != W.shape[0]:
        raise DimensionMismatch(
            f"block dimension {X.shape[0]} != basis dimension {W.shape[0]}")
    X = np.ascontiguousarray(X)
    W = np.ascontiguousarray(W)
    return _backend.active().gram_apply(X, W, 1.0 / X.shape[1])


def projection_energy(X, W):
    """Total squared projection of the samples onto the basis: ||Xᵀ W||²_F."""
    X = _as_matrix(X, "X")
    W = _as_matrix(W, "W")
    if X.shape[0] != W.shape[0]:
        raise DimensionMismatch(
            f"data dimension {X.shape[0]} != basis dimension {W.shape[0]}")
    return float(np.sum((W.T @ X) ** 2))


def is_orthonormal(W, atol=1e-10):
    """Whether WᵀW is the identity within ``atol`` (Frobenius norm)."""
    W = _as_matrix(W, "W")
    gram = W.T @ W
    return float(np.linalg.norm(gram - np.eye(W.shape[1]))) < atol
