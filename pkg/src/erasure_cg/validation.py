"""Input validation helpers shared by the estimator and the harness."""
import numpy as np

from .exceptions import DimensionError, SymmetryError
from .sparse_core import CsrMatrix


def check_matrix(A, require_symmetric=True):
    """Coerce ``A`` to :class:`CsrMatrix`.

    Accepts a ``CsrMatrix``, any scipy sparse matrix (anything with
    ``tocoo``), or a dense 2-D array-like.
    """
    if isinstance(A, CsrMatrix):
        out = A
    elif hasattr(A, "tocoo"):
        coo = A.tocoo()
        out = CsrMatrix.from_coo(coo.shape[0], coo.shape[1], coo.row, coo.col, coo.data)
    else:
        arr = np.asarray(A, dtype=np.float64)
        if arr.ndim != 2:
            raise DimensionError(f"expected a 2-D matrix, got {arr.ndim}-D input")
        out = CsrMatrix.from_dense(arr)
    if out.n_rows != out.n_cols:
        raise DimensionError(f"matrix must be square, got {out.shape}")
    if not np.all(np.isfinite(out.values)):
        raise ValueError("matrix contains NaN or Inf")
    if require_symmetric and not out.is_symmetric():
        raise SymmetryError("matrix is not symmetric")
    return out


def check_vector(b, n, name="b"):
    b = np.asarray(b, dtype=np.float64)
    if b.ndim == 2 and 1 in b.shape:
        b = b.ravel()
    if b.shape != (n,):
        raise DimensionError(f"{name} has shape {b.shape}, expected ({n},)")
    if not np.all(np.isfinite(b)):
        raise ValueError(f"{name} contains NaN or Inf")
    return b
