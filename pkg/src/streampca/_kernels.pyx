# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled per-step hot kernels.

Twin of ``streampca._kernels_py``: same three functions, same semantics.
The estimator step works on small matrices (d x B blocks, d x k bases with
B, k of order 1-20), where fused C loops beat a chain of numpy dispatches.
"""

import numpy as np

from libc.math cimport sqrt


def gram_apply(double[:, ::1] X, double[:, ::1] W, double inv_b):
    """Return X (X^T W) * inv_b without ever forming the d x d outer product."""
    cdef Py_ssize_t d = X.shape[0]
    cdef Py_ssize_t B = X.shape[1]
    cdef Py_ssize_t k = W.shape[1]
    P_arr = np.zeros((B, k), dtype=np.float64)
    out_arr = np.zeros((d, k), dtype=np.float64)
    cdef double[:, ::1] P = P_arr
    cdef double[:, ::1] out = out_arr
    cdef Py_ssize_t i, j, c
    cdef double xv
    with nogil:
        for i in range(d):
            for j in range(B):
                xv = X[i, j]
                for c in range(k):
                    P[j, c] += xv * W[i, c]
        for i in range(d):
            for j in range(B):
                xv = X[i, j] * inv_b
                for c in range(k):
                    out[i, c] += xv * P[j, c]
    return out_arr


def accelerate(double[:, ::1] W_tilde, double[:, ::1] W, double alpha):
    """Per-column pullback toward the previous basis.

    Column i of the result is ``W_tilde[:, i] + alpha * (w_i . w~_i) * w_i``.
    """
    cdef Py_ssize_t d = W.shape[0]
    cdef Py_ssize_t k = W.shape[1]
    out_arr = np.empty((d, k), dtype=np.float64)
    coeff_arr = np.zeros(k, dtype=np.float64)
    cdef double[:, ::1] out = out_arr
    cdef double[::1] coeff = coeff_arr
    cdef Py_ssize_t i, c
    with nogil:
        for i in range(d):
            for c in range(k):
                coeff[c] += W[i, c] * W_tilde[i, c]
        for i in range(d):
            for c in range(k):
                out[i, c] = W_tilde[i, c] + alpha * coeff[c] * W[i, c]
    return out_arr


def mgs(double[:, ::1] M, double zero_threshold, Py_ssize_t start=0):
    """Modified Gram-Schmidt, in place, columns left to right.

    Columns before ``start`` are assumed orthonormal with their projections
    already removed from the rest. Returns the index of the first column
    whose residual norm is <= ``zero_threshold`` (leaving it untouched), or
    -1 when every column was orthonormalized.
    """
    cdef Py_ssize_t d = M.shape[0]
    cdef Py_ssize_t k = M.shape[1]
    cdef Py_ssize_t i, j, l
    cdef double nrm, inv, dot
    cdef Py_ssize_t deficient = -1
    with nogil:
        for j in range(start, k):
            nrm = 0.0
            for i in range(d):
                nrm += M[i, j] * M[i, j]
            nrm = sqrt(nrm)
            if nrm <= zero_threshold:
                deficient = j
                break
            inv = 1.0 / nrm
            for i in range(d):
                M[i, j] *= inv
            for l in range(j + 1, k):
                dot = 0.0
                for i in range(d):
                    dot += M[i, j] * M[i, l]
                for i in range(d):
                    M[i, l] -= dot * M[i, j]
    return deficient
