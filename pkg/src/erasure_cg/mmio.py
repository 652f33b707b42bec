"""Matrix Market reading and writing.

Only real coordinate matrices (general or symmetric) are read into
:class:`CsrMatrix`. Dense real arrays are supported separately for
persisting encoding matrices and right-hand sides.
"""
from __future__ import annotations

import io
import os

import numpy as np

from .exceptions import BoundsError, FormatError, UnsupportedFormatError
from .sparse_core import CsrMatrix

__all__ = [
    "parse_matrix_market",
    "read_matrix_market",
    "write_matrix_market",
    "read_array",
    "write_array",
]

BANNER = "%%matrixmarket"


def _parse_banner(line):
    tokens = line.strip().split()
    if len(tokens) != 5 or tokens[0].lower() != BANNER:
        raise FormatError(f"malformed Matrix Market banner: {line.strip()!r}")
    obj, fmt, fld, sym = (t.lower() for t in tokens[1:])
    if obj != "matrix":
        raise UnsupportedFormatError(f"object {obj!r} is not supported")
    if fmt not in ("coordinate", "array"):
        raise FormatError(f"unknown format {fmt!r}")
    if fld in ("complex", "pattern", "integer"):
        raise UnsupportedFormatError(f"field {fld!r} is not supported")
    if fld not in ("real", "double"):
        raise FormatError(f"unknown field {fld!r}")
    if sym in ("skew-symmetric", "hermitian"):
        raise UnsupportedFormatError(f"symmetry {sym!r} is not supported")
    if sym not in ("general", "symmetric"):
        raise FormatError(f"unknown symmetry {sym!r}")
    return fmt, sym


def _data_lines(stream):
    for raw in stream:
        line = raw.strip()
        if not line or line.startswith("%"):
            continue
        yield line


def _ints(tokens, count, what):
    if len(tokens) != count:
        raise FormatError(f"{what}: expected {count} fields, got {len(tokens)}")
    try:
        return [int(t) for t in tokens]
    except ValueError as exc:
        raise FormatError(f"{what}: {exc}") from None


def parse_matrix_market(text_stream):
    """Read a real coordinate Matrix Market matrix from a text stream.

    Symmetric files are expanded so that every off-diagonal entry is stored
    in both triangles. Indices are converted to 0-based and duplicate
    coordinates are summed.

    Raises
    ------
    FormatError
        Malformed banner, size line or entry line, or wrong entry count.
    UnsupportedFormatError
        Complex, pattern or integer fields, array format, or skew/hermitian
        symmetry.
    BoundsError
        An entry index outside the declared dimensions.
    """
    first = text_stream.readline()
    fmt, sym = _parse_banner(first)
    if fmt != "coordinate":
        raise UnsupportedFormatError("array format: use read_array for dense data")
    lines = _data_lines(text_stream)
    try:
        size_line = next(lines)
    except StopIteration:
        raise FormatError("missing size line") from None
    n_rows, n_cols, nnz = _ints(size_line.split(), 3, "size line")
    if n_rows < 0 or n_cols < 0 or nnz < 0:
        raise FormatError("negative size")
    if sym == "symmetric" and n_rows != n_cols:
        raise FormatError("symmetric matrix must be square")

    rows = np.empty(nnz, dtype=np.int64)
    cols = np.empty(nnz, dtype=np.int64)
    vals = np.empty(nnz)
    count = 0
    for line in lines:
        if count == nnz:
            raise FormatError(f"more than the declared {nnz} entries")
        tokens = line.split()
        if len(tokens) != 3:
            raise FormatError(f"entry line {count + 1}: expected 3 fields")
        i, j = _ints(tokens[:2], 2, f"entry line {count + 1}")
        try:
            v = float(tokens[2])
        except ValueError:
            raise FormatError(f"entry line {count + 1}: bad value {tokens[2]!r}") from None
        if not (1 <= i <= n_rows and 1 <= j <= n_cols):
            raise BoundsError(
                f"entry ({i}, {j}) outside declared {n_rows}x{n_cols}")
        rows[count], cols[count], vals[count] = i - 1, j - 1, v
        count += 1
    if count != nnz:
        raise FormatError(f"declared {nnz} entries, found {count}")

    if sym == "symmetric":
        off = rows != cols
        rows, cols, vals = (np.concatenate([rows, cols[off]]),
                            np.concatenate([cols, rows[off]]),
                            np.concatenate([vals, vals[off]]))
    return CsrMatrix.from_coo(n_rows, n_cols, rows, cols, vals)


def read_matrix_market(path):
    with open(path, "r", encoding="ascii") as fh:
        return parse_matrix_market(fh)


def write_matrix_market(stream, A: CsrMatrix, symmetric=None, comment=None):
    """Write ``A`` in coordinate format.

    With ``symmetric=True`` (default: detect) only the lower triangle is
    written, so a round trip through :func:`parse_matrix_market` restores
    the same expanded storage.
    """
    if symmetric is None:
        symmetric = A.is_symmetric()
    rows, cols, vals = A.to_coo()
    if symmetric:
        keep = rows >= cols
        rows, cols, vals = rows[keep], cols[keep], vals[keep]
    kind = "symmetric" if symmetric else "general"
    stream.write(f"%%MatrixMarket matrix coordinate real {kind}\n")
    if comment:
        for line in comment.splitlines():
            stream.write(f"% {line}\n")
    stream.write(f"{A.n_rows} {A.n_cols} {rows.size}\n")
    for i, j, v in zip(rows, cols, vals):
        stream.write(f"{i + 1} {j + 1} {float(v)!r}\n")


def write_array(stream, arr, comment=None):
    """Write a dense real vector or matrix in Matrix Market array format."""
    arr = np.asarray(arr, dtype=np.float64)
    if arr.ndim == 1:
        arr = arr[:, None]
    stream.write("%%MatrixMarket matrix array real general\n")
    if comment:
        for line in comment.splitlines():
            stream.write(f"% {line}\n")
    stream.write(f"{arr.shape[0]} {arr.shape[1]}\n")
    # Column-major, as the format prescribes.
    for v in arr.ravel(order="F"):
        stream.write(f"{float(v)!r}\n")


def read_array(source):
    """Read a dense Matrix Market array; accepts a path or a text stream."""
    if isinstance(source, (str, os.PathLike)):
        with open(source, "r", encoding="ascii") as fh:
            return read_array(fh)
    fmt, sym = _parse_banner(source.readline())
    if fmt != "array" or sym != "general":
        raise UnsupportedFormatError("expected 'array real general'")
    lines = _data_lines(source)
    try:
        m, n = _ints(next(lines).split(), 2, "size line")
    except StopIteration:
        raise FormatError("missing size line") from None
    try:
        data = [float(line) for line in lines]
    except ValueError as exc:
        raise FormatError(str(exc)) from None
    if len(data) != m * n:
        raise FormatError(f"expected {m * n} values, found {len(data)}")
    return np.array(data, dtype=np.float64).reshape((m, n), order="F")


def dumps_matrix_market(A, **kw):
    buf = io.StringIO()
    write_matrix_market(buf, A, **kw)
    return buf.getvalue()
