"""Pure-numpy implementations of the per-step hot kernels.

Fallback twin of the compiled extension ``streampca._kernels``; both expose
the same three functions with identical semantics.
"""

import numpy as np


def gram_apply(X, W, inv_b):
    """Return X (Xᵀ W) * inv_b without ever forming the d×d outer product."""
    return (X @ (X.T @ W)) * inv_b


def accelerate(W_tilde, W, alpha):
    """Per-column pullback toward the previous basis.

    Column i of the result is ``W_tilde[:, i] + alpha * (w_i · w~_i) * w_i``,
    the self-projection update applied independently to every component.
    """
    coeffs = np.einsum("ij,ij->j", W, W_tilde)
    return W_tilde + alpha * (W * coeffs)


def mgs(M, zero_threshold, start=0):
    """Modified Gram-Schmidt, in place, columns left to right.

    Columns before ``start`` are assumed orthonormal with their projections
    already removed from the rest. Returns the index of the first column
    whose residual norm is <= ``zero_threshold`` (leaving it untouched), or
    -1 when every column was orthonormalized.
    """
    k = M.shape[1]
    for j in range(start, k):
        nrm = np.linalg.norm(M[:, j])
        if nrm <= zero_threshold:
            return j
        M[:, j] /= nrm
        if j + 1 < k:
            coeffs = M[:, j] @ M[:, j + 1:]
            M[:, j + 1:] -= np.outer(M[:, j], coeffs)
    return -1
