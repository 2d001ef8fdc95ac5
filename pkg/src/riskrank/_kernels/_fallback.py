"""Pure-Python (numpy) kernels, used when the compiled core is unavailable.

Semantics match ``_core.pyx`` exactly; only speed differs.  The matvec
accumulates entries in storage order, like the compiled loop, so the two
backends agree to the last bit on typical inputs.
"""

from __future__ import annotations

import numpy as np


def csc_matvec(n_rows, indptr, indices, data, x):
    """y = M @ x for a compressed-column matrix."""
    if len(data) == 0:
        return np.zeros(n_rows)
    per_col = np.diff(indptr)
    xe = np.repeat(x, per_col)
    return np.bincount(indices, weights=data * xe, minlength=n_rows)


def dtw_cost(a, b):
    """Minimal cumulative alignment cost, absolute-difference local cost.

    Two-row dynamic program; boundary-matched, no warping band.
    """
    n, m = len(a), len(b)
    prev = np.full(m + 1, np.inf)
    prev[0] = 0.0
    cur = np.empty(m + 1)
    for i in range(n):
        cur[0] = np.inf
        ai = a[i]
        for j in range(1, m + 1):
            best = prev[j]
            if prev[j - 1] < best:
                best = prev[j - 1]
            if cur[j - 1] < best:
                best = cur[j - 1]
            cur[j] = abs(ai - b[j - 1]) + best
        prev, cur = cur, prev
    return float(prev[m])


def dtw_table(a, b):
    """Full (n+1, m+1) cumulative cost table, for path backtracking."""
    n, m = len(a), len(b)
    table = np.full((n + 1, m + 1), np.inf)
    table[0, 0] = 0.0
    for i in range(1, n + 1):
        ai = a[i - 1]
        row = table[i]
        up = table[i - 1]
        for j in range(1, m + 1):
            best = up[j]
            if up[j - 1] < best:
                best = up[j - 1]
            if row[j - 1] < best:
                best = row[j - 1]
            row[j] = abs(ai - b[j - 1]) + best
    return table
