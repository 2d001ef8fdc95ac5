# cython: boundscheck=False, wraparound=False, cdivision=True
"""Compiled kernels: compressed-column matvec and the DTW dynamic program.

These are the two inner loops that dominate runtime (power iteration over
the supra transition matrix; pairwise DTW inside clustering).  Semantics
must stay in lockstep with ``_fallback.py``.
"""

import numpy as np

from libc.math cimport fabs, INFINITY


def csc_matvec(Py_ssize_t n_rows,
               long long[::1] indptr,
               long long[::1] indices,
               double[::1] data,
               double[::1] x):
    """y = M @ x for a compressed-column matrix."""
    out = np.zeros(n_rows)
    cdef double[::1] y = out
    cdef Py_ssize_t n_cols = indptr.shape[0] - 1
    cdef Py_ssize_t j, k
    cdef double xj
    for j in range(n_cols):
        xj = x[j]
        if xj != 0.0:
            for k in range(indptr[j], indptr[j + 1]):
                y[indices[k]] += data[k] * xj
    return out


def dtw_cost(double[::1] a, double[::1] b):
    """Minimal cumulative alignment cost, absolute-difference local cost."""
    cdef Py_ssize_t n = a.shape[0]
    cdef Py_ssize_t m = b.shape[0]
    prev_arr = np.full(m + 1, np.inf)
    cur_arr = np.empty(m + 1)
    cdef double[::1] prev = prev_arr
    cdef double[::1] cur = cur_arr
    cdef double[::1] tmp
    cdef Py_ssize_t i, j
    cdef double best, ai
    prev[0] = 0.0
    for i in range(n):
        cur[0] = INFINITY
        ai = a[i]
        for j in range(1, m + 1):
            best = prev[j]
            if prev[j - 1] < best:
                best = prev[j - 1]
            if cur[j - 1] < best:
                best = cur[j - 1]
            cur[j] = fabs(ai - b[j - 1]) + best
        tmp = prev
        prev = cur
        cur = tmp
    return float(prev[m])


def dtw_table(double[::1] a, double[::1] b):
    """Full (n+1, m+1) cumulative cost table, for path backtracking."""
    cdef Py_ssize_t n = a.shape[0]
    cdef Py_ssize_t m = b.shape[0]
    table_arr = np.full((n + 1, m + 1), np.inf)
    cdef double[:, ::1] table = table_arr
    cdef Py_ssize_t i, j
    cdef double best, ai
    table[0, 0] = 0.0
    for i in range(1, n + 1):
        ai = a[i - 1]
        for j in range(1, m + 1):
            best = table[i - 1, j]
            if table[i - 1, j - 1] < best:
                best = table[i - 1, j - 1]
            if table[i, j - 1] < best:
                best = table[i, j - 1]
            table[i, j] = fabs(ai - b[j - 1]) + best
    return table_arr
