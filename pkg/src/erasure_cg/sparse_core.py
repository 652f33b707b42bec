"""Compressed-row matrices, index masks and masked kernels.

Masked kernels skip the excluded components entirely: an excluded column
contributes nothing to a row sum, an excluded row is not computed, and an
excluded position contributes nothing to an inner product. This is how
aggregation behaves when the processes owning those components have
stopped.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Iterable

import numpy as np

from . import _kernels
from .exceptions import BoundsError, DimensionError, InvalidSizeError, FormatError

__all__ = [
    "CsrMatrix",
    "IndexMask",
    "gen_ltridiag",
    "spmv_masked",
    "inner_masked",
    "norm2_masked",
]


def _frozen(arr):
    arr = np.ascontiguousarray(arr)
    arr.flags.writeable = False
    return arr


@dataclass(frozen=True, eq=False)
class CsrMatrix:
    """Real matrix in compressed sparse row form.

    Column indices are strictly increasing within each row. Symmetric
    matrices are stored with both triangles present.
    """

    n_rows: int
    n_cols: int
    row_offsets: np.ndarray
    col_indices: np.ndarray
    values: np.ndarray

    def __post_init__(self):
        ro = np.asarray(self.row_offsets, dtype=np.int64)
        ci = np.asarray(self.col_indices, dtype=np.int64)
        va = np.asarray(self.values, dtype=np.float64)
        if self.n_rows < 0 or self.n_cols < 0:
            raise InvalidSizeError("matrix dimensions must be nonnegative")
        if ro.shape != (self.n_rows + 1,):
            raise DimensionError(
                f"row_offsets has length {ro.shape[0]}, expected {self.n_rows + 1}")
        if ci.shape != va.shape or ci.ndim != 1:
            raise DimensionError("col_indices and values must be 1-D of equal length")
        if ro[0] != 0 or ro[-1] != va.shape[0] or np.any(np.diff(ro) < 0):
            raise FormatError("row_offsets must start at 0, end at nnz and be nondecreasing")
        if ci.size and (ci.min() < 0 or ci.max() >= self.n_cols):
            raise BoundsError("column index out of range")
        for i in range(self.n_rows):
            row = ci[ro[i]:ro[i + 1]]
            if row.size > 1 and np.any(np.diff(row) <= 0):
                raise FormatError(f"column indices of row {i} are not strictly increasing")
        object.__setattr__(self, "row_offsets", _frozen(ro))
        object.__setattr__(self, "col_indices", _frozen(ci))
        object.__setattr__(self, "values", _frozen(va))

    @property
    def shape(self):
        return (self.n_rows, self.n_cols)

    @property
    def nnz(self):
        """Number of stored entries (both triangles for symmetric matrices)."""
        return int(self.values.shape[0])

    @classmethod
    def from_coo(cls, n_rows, n_cols, rows, cols, vals):
        """Build from coordinate triplets; duplicates are summed."""
        rows = np.asarray(rows, dtype=np.int64)
        cols = np.asarray(cols, dtype=np.int64)
        vals = np.asarray(vals, dtype=np.float64)
        if not (rows.shape == cols.shape == vals.shape):
            raise DimensionError("coordinate arrays must have equal length")
        if rows.size:
            if rows.min() < 0 or rows.max() >= n_rows:
                raise BoundsError("row index out of range")
            if cols.min() < 0 or cols.max() >= n_cols:
                raise BoundsError("column index out of range")
        # Stable sort keeps duplicate order fixed, so their sum is reproducible.
        order = np.lexsort((cols, rows))
        rows, cols, vals = rows[order], cols[order], vals[order]
        if rows.size:
            new = np.ones(rows.size, dtype=bool)
            new[1:] = (rows[1:] != rows[:-1]) | (cols[1:] != cols[:-1])
            starts = np.flatnonzero(new)
            summed = np.empty(starts.size)
            for s_i, (a, b) in enumerate(zip(starts, np.append(starts[1:], rows.size))):
                acc = 0.0
                for v in vals[a:b]:
                    acc += v
                summed[s_i] = acc
            rows, cols, vals = rows[starts], cols[starts], summed
        row_offsets = np.zeros(n_rows + 1, dtype=np.int64)
        np.add.at(row_offsets, rows + 1, 1)
        np.cumsum(row_offsets, out=row_offsets)
        return cls(n_rows, n_cols, row_offsets, cols, vals)

    @classmethod
    def from_dense(cls, dense, drop_zeros=True):
        dense = np.asarray(dense, dtype=np.float64)
        if dense.ndim != 2:
            raise DimensionError("expected a 2-D array")
        if drop_zeros:
            rows, cols = np.nonzero(dense)
        else:
            rows, cols = np.indices(dense.shape).reshape(2, -1)
        return cls.from_coo(dense.shape[0], dense.shape[1], rows, cols, dense[rows, cols])

    def to_dense(self):
        out = np.zeros(self.shape)
        for i in range(self.n_rows):
            sl = slice(self.row_offsets[i], self.row_offsets[i + 1])
            out[i, self.col_indices[sl]] = self.values[sl]
        return out

    def to_coo(self):
        rows = np.repeat(np.arange(self.n_rows), np.diff(self.row_offsets))
        return rows, self.col_indices.copy(), self.values.copy()

    def is_symmetric(self):
        """Exact structural and numerical symmetry of the stored entries."""
        if self.n_rows != self.n_cols:
            return False
        rows, cols, vals = self.to_coo()
        t = CsrMatrix.from_coo(self.n_rows, self.n_cols, cols, rows, vals)
        return (np.array_equal(t.row_offsets, self.row_offsets)
                and np.array_equal(t.col_indices, self.col_indices)
                and np.array_equal(t.values, self.values))

    def max_abs(self):
        return float(np.max(np.abs(self.values))) if self.nnz else 0.0

    def matvec(self, p):
        """Unmasked product ``A @ p`` in the fixed accumulation order."""
        return spmv_masked(self, p)

    def matvec_masked(self, p, col_excluded, row_excluded):
        out = np.empty(self.n_rows)
        _kernels.csr_matvec_masked(self.row_offsets, self.col_indices, self.values,
                                   p, col_excluded, row_excluded, out)
        return out

    def times_dense(self, dense):
        dense = np.ascontiguousarray(dense, dtype=np.float64)
        if dense.ndim != 2 or dense.shape[0] != self.n_cols:
            raise DimensionError(f"cannot multiply {self.shape} by {dense.shape}")
        out = np.empty((self.n_rows, dense.shape[1]))
        _kernels.csr_times_dense(self.row_offsets, self.col_indices, self.values,
                                 dense, out)
        return out


@dataclass(frozen=True, eq=False)
class IndexMask:
    """Set of excluded component indices within ``[0, universe_size)``."""

    excluded: tuple = ()
    universe_size: int = 0
    _array: np.ndarray = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        idx = sorted({int(i) for i in self.excluded})
        if idx and (idx[0] < 0 or idx[-1] >= self.universe_size):
            raise BoundsError(
                f"excluded indices must lie in [0, {self.universe_size})")
        object.__setattr__(self, "excluded", tuple(idx))
        arr = _kernels.as_mask_array(idx, self.universe_size)
        arr.flags.writeable = False
        object.__setattr__(self, "_array", arr)

    @classmethod
    def empty(cls, universe_size):
        return cls((), universe_size)

    def __contains__(self, i):
        return 0 <= i < self.universe_size and bool(self._array[i])

    def __len__(self):
        return len(self.excluded)

    def __eq__(self, other):
        if not isinstance(other, IndexMask):
            return NotImplemented
        return (self.universe_size == other.universe_size
                and self.excluded == other.excluded)

    def __hash__(self):
        return hash((self.excluded, self.universe_size))

    @property
    def array(self):
        """Read-only boolean array, ``True`` at excluded positions."""
        return self._array

    @property
    def viable(self):
        """Boolean array, ``True`` at positions that are not excluded."""
        return ~self._array

    def union(self, indices: Iterable[int]):
        return IndexMask(tuple(self.excluded) + tuple(indices), self.universe_size)


def gen_ltridiag(n):
    """1-D model problem: tridiagonal with 2 on the diagonal and -1 beside it."""
    if n < 2:
        raise InvalidSizeError(f"n must be at least 2, got {n}")
    rows, cols, vals = [], [], []
    for i in range(n):
        if i > 0:
            rows.append(i); cols.append(i - 1); vals.append(-1.0)
        rows.append(i); cols.append(i); vals.append(2.0)
        if i < n - 1:
            rows.append(i); cols.append(i + 1); vals.append(-1.0)
    return CsrMatrix.from_coo(n, n, rows, cols, vals)


def _mask_or_empty(mask, size, what):
    if mask is None:
        return _kernels.as_mask_array((), size)
    if mask.universe_size != size:
        raise DimensionError(
            f"{what} mask has universe {mask.universe_size}, expected {size}")
    return mask.array


def spmv_masked(A, p, mask=None, out_rows=None):
    """Row-wise product that skips excluded columns and excluded rows.

    Parameters
    ----------
    A : CsrMatrix or AugmentedMatrix
    p : ndarray of length ``A.shape[1]``
    mask : IndexMask, optional
        Components of ``p`` to skip. ``None`` skips nothing.
    out_rows : IndexMask, optional
        Rows not to compute. Their entries in the result are 0.0 and carry
        no meaning.

    Returns
    -------
    ndarray of length ``A.shape[0]``
    """
    p = np.ascontiguousarray(p, dtype=np.float64)
    n_rows, n_cols = A.shape
    if p.shape != (n_cols,):
        raise DimensionError(f"vector of shape {p.shape} does not match {A.shape}")
    cols = _mask_or_empty(mask, n_cols, "column")
    rows = _mask_or_empty(out_rows, n_rows, "row")
    return A.matvec_masked(p, cols, rows)


def inner_masked(u, v, mask=None):
    """Sum of ``u[i] * v[i]`` over non-excluded ``i``, ascending."""
    u = np.ascontiguousarray(u, dtype=np.float64)
    v = np.ascontiguousarray(v, dtype=np.float64)
    if u.shape != v.shape or u.ndim != 1:
        raise DimensionError(f"shapes {u.shape} and {v.shape} differ")
    ex = _mask_or_empty(mask, u.shape[0], "vector")
    return float(_kernels.inner_masked(u, v, ex))


def norm2_masked(v, mask=None):
    return math.sqrt(inner_masked(v, v, mask))
