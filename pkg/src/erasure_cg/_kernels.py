"""Compiled kernels with a fixed, ascending-index accumulation order.

Every reduction here is a plain sequential loop starting from 0.0, so the
result is bitwise reproducible and equal to the same loop written in pure
Python. Nothing is compiled with ``fastmath`` (no reassociation, no FMA
contraction).
"""
import numpy as np
from numba import njit


@njit(cache=True)
def inner_masked(u, v, excluded):
    s = 0.0
    for i in range(u.shape[0]):
        if not excluded[i]:
            s += u[i] * v[i]
    return s


@njit(cache=True)
def csr_matvec_masked(row_offsets, col_indices, values, p, col_excluded,
                      row_excluded, out):
    n_rows = row_offsets.shape[0] - 1
    for i in range(n_rows):
        if row_excluded[i]:
            out[i] = 0.0
            continue
        s = 0.0
        for jj in range(row_offsets[i], row_offsets[i + 1]):
            j = col_indices[jj]
            if not col_excluded[j]:
                s += values[jj] * p[j]
        out[i] = s


@njit(cache=True)
def augmented_matvec_masked(row_offsets, col_indices, values, ae, r, p,
                            col_excluded, row_excluded, out):
    # Rows [0, n): sparse A block, then the dense A*E border.
    # Rows [n, n+k): (A*E)^T read by column, then E^T*A*E.
    n = row_offsets.shape[0] - 1
    k = ae.shape[1]
    for i in range(n):
        if row_excluded[i]:
            out[i] = 0.0
            continue
        s = 0.0
        for jj in range(row_offsets[i], row_offsets[i + 1]):
            j = col_indices[jj]
            if not col_excluded[j]:
                s += values[jj] * p[j]
        for m in range(k):
            if not col_excluded[n + m]:
                s += ae[i, m] * p[n + m]
        out[i] = s
    for l in range(k):
        if row_excluded[n + l]:
            out[n + l] = 0.0
            continue
        s = 0.0
        for j in range(n):
            if not col_excluded[j]:
                s += ae[j, l] * p[j]
        for m in range(k):
            if not col_excluded[n + m]:
                s += r[l, m] * p[n + m]
        out[n + l] = s


@njit(cache=True)
def csr_times_dense(row_offsets, col_indices, values, dense, out):
    n_rows = row_offsets.shape[0] - 1
    k = dense.shape[1]
    for i in range(n_rows):
        for m in range(k):
            s = 0.0
            for jj in range(row_offsets[i], row_offsets[i + 1]):
                s += values[jj] * dense[col_indices[jj], m]
            out[i, m] = s


@njit(cache=True)
def dense_tn(a, b, out):
    """out = a^T b, each entry summed over rows in ascending order."""
    n = a.shape[0]
    for l in range(a.shape[1]):
        for m in range(b.shape[1]):
            s = 0.0
            for j in range(n):
                s += a[j, l] * b[j, m]
            out[l, m] = s


@njit(cache=True)
def dense_matvec(a, v, out):
    for i in range(a.shape[0]):
        s = 0.0
        for j in range(a.shape[1]):
            s += a[i, j] * v[j]
        out[i] = s


def as_mask_array(excluded, size):
    arr = np.zeros(size, dtype=np.bool_)
    if len(excluded):
        arr[np.asarray(excluded, dtype=np.int64)] = True
    return arr
