"""Minimal compressed-column sparse matrix.

Only what the random-walk pipeline needs: construction from triplets,
per-column normalization into a transition matrix, matrix-vector products,
and a dense conversion for tests.  Compressed-column layout because the
transition operator is column-stochastic, so normalization is one pass
over columns.

Matrices are immutable after construction; share them freely across
threads or worker processes.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from . import _kernels
from .errors import ValidationError


class DanglingPolicy(enum.Enum):
    """How the solver must treat all-zero columns after normalization.

    ZERO_COLUMN leaves the dangling mass to vanish; UNIFORM_RESTART tells
    the solver to redistribute it onto the restart vector (the rank-1
    correction that keeps the walk stochastic).
    """

    ZERO_COLUMN = "zero_column"
    UNIFORM_RESTART = "uniform_restart_flag"


@dataclass(frozen=True)
class SparseMatrix:
    """Real matrix in compressed-column form.

    ``indptr`` has length n_cols + 1; column j's entries live in
    ``indices``/``data`` slots [indptr[j], indptr[j+1]).  Row indices are
    strictly increasing within each column; stored values are finite and
    never exactly zero.
    """

    n_rows: int
    n_cols: int
    indptr: np.ndarray   # int64, len n_cols + 1
    indices: np.ndarray  # int64, row index per entry
    data: np.ndarray     # float64

    @property
    def nnz(self) -> int:
        return len(self.data)

    def entry_columns(self) -> np.ndarray:
        """Column index of every stored entry, in storage order."""
        return np.repeat(
            np.arange(self.n_cols, dtype=np.int64), np.diff(self.indptr)
        )

    def to_dense(self) -> np.ndarray:
        dense = np.zeros((self.n_rows, self.n_cols))
        dense[self.indices, self.entry_columns()] = self.data
        return dense


class ColumnNormalized(NamedTuple):
    matrix: SparseMatrix
    dangling_mask: np.ndarray  # bool, len n_cols; True where column sum was 0
    policy: DanglingPolicy


def from_triplets(n_rows: int, n_cols: int, triplets) -> SparseMatrix:
    """Build a matrix from (row, col, value) triplets.

    Accepts either an iterable of 3-tuples or a (rows, cols, values)
    triple of arrays.  Duplicate coordinates are summed; entries that
    cancel to zero are dropped.
    """
    if n_rows < 0 or n_cols < 0:
        raise ValidationError("matrix dimensions must be non-negative")
    if isinstance(triplets, tuple) and len(triplets) == 3:
        rows, cols, vals = triplets
    else:
        triplets = list(triplets)
        if triplets:
            rows, cols, vals = zip(*triplets)
        else:
            rows, cols, vals = (), (), ()
    rows = np.asarray(rows, dtype=np.int64)
    cols = np.asarray(cols, dtype=np.int64)
    vals = np.asarray(vals, dtype=np.float64)
    if not (len(rows) == len(cols) == len(vals)):
        raise ValidationError("triplet arrays must have equal length")
    if len(rows):
        if rows.min(initial=0) < 0 or rows.max(initial=-1) >= n_rows:
            raise ValidationError("row index out of range")
        if cols.min(initial=0) < 0 or cols.max(initial=-1) >= n_cols:
            raise ValidationError("column index out of range")
        if not np.all(np.isfinite(vals)):
            raise ValidationError("non-finite value in triplets")

    order = np.lexsort((rows, cols))
    rows, cols, vals = rows[order], cols[order], vals[order]

    if len(rows):
        # collapse duplicate (row, col) pairs by summation
        new_group = np.empty(len(rows), dtype=bool)
        new_group[0] = True
        new_group[1:] = (rows[1:] != rows[:-1]) | (cols[1:] != cols[:-1])
        starts = np.flatnonzero(new_group)
        vals = np.add.reduceat(vals, starts)
        rows = rows[starts]
        cols = cols[starts]
        keep = vals != 0.0
        rows, cols, vals = rows[keep], cols[keep], vals[keep]

    indptr = np.zeros(n_cols + 1, dtype=np.int64)
    np.add.at(indptr, cols + 1, 1)
    np.cumsum(indptr, out=indptr)
    return SparseMatrix(n_rows, n_cols, indptr, rows, vals)


def column_normalize(
    m: SparseMatrix,
    policy: DanglingPolicy = DanglingPolicy.UNIFORM_RESTART,
) -> ColumnNormalized:
    """Divide every column by its sum; flag all-zero columns.

    Requires non-negative entries.  Columns with a positive sum end up
    summing to 1; zero columns are left untouched and flagged in the mask
    so the solver can apply the dangling correction the policy asks for.
    """
    if m.nnz and m.data.min() < 0:
        raise ValidationError("column_normalize requires non-negative entries")
    col_sums = np.zeros(m.n_cols)
    entry_cols = m.entry_columns()
    np.add.at(col_sums, entry_cols, m.data)
    mask = col_sums == 0.0
    scale = np.ones(m.n_cols)
    np.divide(1.0, col_sums, out=scale, where=~mask)
    data = m.data * scale[entry_cols]
    out = SparseMatrix(m.n_rows, m.n_cols, m.indptr, m.indices, data)
    return ColumnNormalized(out, mask, policy)


def matvec(m: SparseMatrix, v: np.ndarray) -> np.ndarray:
    """Sparse product M @ v."""
    v = np.ascontiguousarray(v, dtype=np.float64)
    if v.ndim != 1 or len(v) != m.n_cols:
        raise ValidationError(
            f"matvec dimension mismatch: matrix has {m.n_cols} columns, "
            f"vector has length {len(v)}"
        )
    return _kernels.csc_matvec(m.n_rows, m.indptr, m.indices, m.data, v)


def to_matrix_market(m: SparseMatrix, stream) -> None:
    """Dump in MatrixMarket coordinate format (1-based), for external checks."""
    stream.write("%%MatrixMarket matrix coordinate real general\n")
    stream.write(f"{m.n_rows} {m.n_cols} {m.nnz}\n")
    cols = m.entry_columns()
    for r, c, v in zip(m.indices, cols, m.data):
        stream.write(f"{r + 1} {c + 1} {v:.12g}\n")
