"""Immutable nonnegative CSR matrices and the handful of kernels the solver needs.

Matrices are frozen after construction (the backing arrays are marked
read-only), so instances can be shared across threads and solver runs.  Only
the operations the solver actually uses are provided; this is not a general
sparse-algebra layer.
"""

from __future__ import annotations

import numpy as np

from . import _kernels
from .errors import DomainError, ShapeError

__all__ = ["SparseMatrix"]


def _as_float_vector(v, length, what):
    arr = np.asarray(v, dtype=np.float64)
    if arr.ndim != 1 or arr.shape[0] != length:
        raise ShapeError(f"{what}: expected length {length}, got shape {arr.shape}")
    if not np.all(np.isfinite(arr)):
        raise DomainError(f"{what}: entries must be finite")
    return arr


class SparseMatrix:
    """Nonnegative sparse matrix in CSR layout.

    Invariants enforced at construction: row_ptr is a nondecreasing offset
    array with row_ptr[0] = 0 and row_ptr[nrows] = nnz, column indices are
    strictly increasing within each row, and every stored value is strictly
    positive (explicit zeros are dropped by the triplet constructor).
    """

    __slots__ = ("nrows", "ncols", "row_ptr", "col_idx", "values")

    def __init__(self, nrows, ncols, row_ptr, col_idx, values):
        nrows = int(nrows)
        ncols = int(ncols)
        if nrows < 0 or ncols < 0:
            raise ShapeError("matrix dimensions must be nonnegative")
        row_ptr = np.ascontiguousarray(row_ptr, dtype=np.int64)
        col_idx = np.ascontiguousarray(col_idx, dtype=np.int64)
        values = np.ascontiguousarray(values, dtype=np.float64)
        if row_ptr.shape != (nrows + 1,):
            raise ShapeError("row_ptr must have length nrows + 1")
        if row_ptr[0] != 0 or row_ptr[-1] != col_idx.shape[0]:
            raise ShapeError("row_ptr must start at 0 and end at nnz")
        if np.any(np.diff(row_ptr) < 0):
            raise ShapeError("row_ptr must be nondecreasing")
        if col_idx.shape != values.shape:
            raise ShapeError("col_idx and values must have equal length")
        if col_idx.size:
            if col_idx.min() < 0 or col_idx.max() >= ncols:
                raise ShapeError("column index out of range")
            for i in range(nrows):
                lo, hi = row_ptr[i], row_ptr[i + 1]
                if hi - lo > 1 and np.any(np.diff(col_idx[lo:hi]) <= 0):
                    raise ShapeError(f"row {i}: column indices must be strictly increasing")
        if not np.all(np.isfinite(values)):
            raise DomainError("matrix values must be finite")
        if np.any(values <= 0.0):
            raise DomainError("stored values must be strictly positive")
        for arr in (row_ptr, col_idx, values):
            arr.setflags(write=False)
        self.nrows = nrows
        self.ncols = ncols
        self.row_ptr = row_ptr
        self.col_idx = col_idx
        self.values = values

    # -- constructors ------------------------------------------------------

    @classmethod
    def from_triplets(cls, nrows, ncols, rows, cols, values) -> "SparseMatrix":
        """Build from unordered (row, col, value) triplets.

        Duplicate cells are summed; entries that are (or sum to) zero are
        dropped.  Negative entries are rejected.
        """
        rows = np.asarray(rows, dtype=np.int64)
        cols = np.asarray(cols, dtype=np.int64)
        vals = np.asarray(values, dtype=np.float64)
        if not (rows.shape == cols.shape == vals.shape) or rows.ndim != 1:
            raise ShapeError("triplet arrays must be 1-d and of equal length")
        if rows.size:
            if rows.min() < 0 or rows.max() >= nrows:
                raise ShapeError("triplet row index out of range")
            if cols.min() < 0 or cols.max() >= ncols:
                raise ShapeError("triplet column index out of range")
        if not np.all(np.isfinite(vals)):
            raise DomainError("triplet values must be finite")
        if np.any(vals < 0.0):
            raise DomainError("triplet values must be nonnegative")
        order = np.lexsort((cols, rows))
        rows, cols, vals = rows[order], cols[order], vals[order]
        if rows.size:
            key_change = np.empty(rows.size, dtype=bool)
            key_change[0] = True
            key_change[1:] = (rows[1:] != rows[:-1]) | (cols[1:] != cols[:-1])
            starts = np.flatnonzero(key_change)
            summed = np.add.reduceat(vals, starts)
            rows, cols = rows[starts], cols[starts]
            keep = summed > 0.0
            rows, cols, summed = rows[keep], cols[keep], summed[keep]
        else:
            summed = vals
        row_ptr = np.zeros(nrows + 1, dtype=np.int64)
        np.add.at(row_ptr, rows + 1, 1)
        np.cumsum(row_ptr, out=row_ptr)
        return cls(nrows, ncols, row_ptr, cols, summed)

    @classmethod
    def from_dense(cls, arr) -> "SparseMatrix":
        arr = np.asarray(arr, dtype=np.float64)
        if arr.ndim != 2:
            raise ShapeError("dense input must be 2-d")
        rows, cols = np.nonzero(arr)
        return cls.from_triplets(arr.shape[0], arr.shape[1], rows, cols, arr[rows, cols])

    # -- basic views -------------------------------------------------------

    @property
    def nnz(self) -> int:
        return int(self.values.shape[0])

    def to_dense(self) -> np.ndarray:
        out = np.zeros((self.nrows, self.ncols))
        for i in range(self.nrows):
            lo, hi = self.row_ptr[i], self.row_ptr[i + 1]
            out[i, self.col_idx[lo:hi]] = self.values[lo:hi]
        return out

    def triplets(self):
        """(rows, cols, values) arrays in row-major order."""
        rows = np.repeat(np.arange(self.nrows, dtype=np.int64), np.diff(self.row_ptr))
        return rows, self.col_idx.copy(), self.values.copy()

    def __repr__(self):
        return f"SparseMatrix({self.nrows}x{self.ncols}, nnz={self.nnz})"

    # -- kernels -----------------------------------------------------------

    def matvec(self, x) -> np.ndarray:
        x = _as_float_vector(x, self.ncols, "matvec operand")
        out = np.empty(self.nrows)
        _kernels.csr_matvec(self.nrows, self.row_ptr, self.col_idx, self.values, x, out)
        return out

    def matvec_transpose(self, y) -> np.ndarray:
        y = _as_float_vector(y, self.nrows, "matvec_transpose operand")
        out = np.empty(self.ncols)
        _kernels.csr_matvec_t(self.nrows, self.ncols, self.row_ptr, self.col_idx,
                              self.values, y, out)
        return out

    def row_l1_norms(self) -> np.ndarray:
        # entries are positive, so the l1 norm is the plain row sum
        if self.nnz == 0:
            return np.zeros(self.nrows)
        rows = np.repeat(np.arange(self.nrows, dtype=np.int64), np.diff(self.row_ptr))
        return np.bincount(rows, weights=self.values, minlength=self.nrows)

    def inf_operator_norm(self) -> float:
        norms = self.row_l1_norms()
        return float(norms.max()) if norms.size else 0.0

    def row_nnz(self) -> np.ndarray:
        return np.diff(self.row_ptr)

    def width(self) -> int:
        counts = self.row_nnz()
        return int(counts.max()) if counts.size else 0

    def column_max(self) -> np.ndarray:
        """Per-column maximum over stored entries (0 for untouched columns)."""
        out = np.zeros(self.ncols)
        np.maximum.at(out, self.col_idx, self.values)
        return out
