"""Encoding of an SPD system into a singular but consistent augmented system.

Given ``A`` (n x n, SPD) and an encoding matrix ``E`` (n x k), the augmented
matrix is the symmetric block matrix::

    [ A      A E     ]
    [ E^T A  E^T A E ]

with right-hand side ``[b; E^T b]``. Its null space is spanned by the
columns of ``[E; -I_k]``, so ``[x*; 0]`` is a solution and any other
solution differs from it by a null-space vector.

The augmented matrix is held in hybrid form: ``A`` stays sparse, the border
``A E`` (dense for Gaussian ``E``) is stored once and read transposed for the
bottom rows, and ``E^T A E`` is a small dense block.
"""
from __future__ import annotations

import itertools
import json
import math
import os
from dataclasses import dataclass

import numpy as np

from . import _kernels
from .eigen import jacobi_eigenvalues
from .exceptions import BudgetError, DimensionError, InvalidSizeError, SymmetryError
from .mmio import read_array, write_array
from .rng import stream
from .sparse_core import CsrMatrix, spmv_masked

__all__ = [
    "EncodingMatrix",
    "AugmentedMatrix",
    "EncodedSystem",
    "SpectrumReport",
    "gen_gaussian_encoding",
    "build_encoded_system",
    "kruskal_rank_exact",
    "kruskal_rank_operative",
    "spectrum_diagnostics",
    "save_encoding",
    "load_encoding",
]

RANK_RTOL = 1e-10
KRUSKAL_SUBSET_BUDGET = 10 ** 6
DENSE_EIG_BUDGET = 2000


@dataclass(frozen=True, eq=False)
class EncodingMatrix:
    n: int
    k: int
    entries: np.ndarray
    seed: int | None = None

    def __post_init__(self):
        e = np.ascontiguousarray(self.entries, dtype=np.float64).reshape(self.n, self.k)
        if self.k > self.n:
            raise InvalidSizeError(f"k={self.k} exceeds n={self.n}")
        if not np.all(np.isfinite(e)):
            raise ValueError("encoding entries must be finite")
        e.flags.writeable = False
        object.__setattr__(self, "entries", e)

    @property
    def T(self):
        return self.entries.T


def gen_gaussian_encoding(n, k, seed):
    """Gaussian ``n x k`` encoding with entries N(0, 1) / sqrt(n).

    Draws fill the matrix column by column, so the leading columns do not
    depend on ``k``.
    """
    if k < 0 or n < 0:
        raise InvalidSizeError("n and k must be nonnegative")
    if k > n:
        raise InvalidSizeError(f"k={k} exceeds n={n}")
    draws = stream(seed, "encoding").normal(n * k)
    entries = draws.reshape((n, k), order="F") / math.sqrt(n)
    return EncodingMatrix(n, k, entries, seed)


@dataclass(frozen=True, eq=False)
class AugmentedMatrix:
    """The (n+k) x (n+k) augmented matrix in hybrid sparse/dense storage."""

    raw: CsrMatrix
    border: np.ndarray      # A E, n x k
    corner: np.ndarray      # E^T A E, k x k, exactly symmetric

    @property
    def n(self):
        return self.raw.n_rows

    @property
    def k(self):
        return self.border.shape[1]

    @property
    def shape(self):
        m = self.n + self.k
        return (m, m)

    def matvec_masked(self, p, col_excluded, row_excluded):
        out = np.empty(self.shape[0])
        raw = self.raw
        _kernels.augmented_matvec_masked(
            raw.row_offsets, raw.col_indices, raw.values, self.border, self.corner,
            p, col_excluded, row_excluded, out)
        return out

    def matvec(self, p):
        return spmv_masked(self, p)

    def to_dense(self):
        n = self.n
        out = np.zeros(self.shape)
        out[:n, :n] = self.raw.to_dense()
        out[:n, n:] = self.border
        out[n:, :n] = self.border.T
        out[n:, n:] = self.corner
        return out

    def max_abs(self):
        vals = [self.raw.max_abs()]
        if self.k:
            vals += [float(np.max(np.abs(self.border))), float(np.max(np.abs(self.corner)))]
        return max(vals)


@dataclass(frozen=True, eq=False)
class EncodedSystem:
    raw: CsrMatrix
    encoder: EncodingMatrix
    augmented: AugmentedMatrix
    rhs_raw: np.ndarray
    rhs_augmented: np.ndarray

    @property
    def n(self):
        return self.raw.n_rows

    @property
    def k(self):
        return self.encoder.k

    def null_space_basis(self):
        """``[E; -I_k]``, an (n+k) x k basis of the augmented null space."""
        return np.vstack([self.encoder.entries, -np.eye(self.k)])

    def embed(self, x):
        """``[x; 0]``, the augmented image of a raw solution."""
        return np.concatenate([np.asarray(x, dtype=np.float64), np.zeros(self.k)])


def _readonly(arr):
    arr = np.ascontiguousarray(arr)
    arr.flags.writeable = False
    return arr


def build_encoded_system(A: CsrMatrix, b, E: EncodingMatrix, verify=True):
    """Assemble the augmented matrix and right-hand side.

    With ``verify`` (and ``n + k <= 2000``) the null-space identity
    ``Ã [E; -I] = 0`` is checked to ``1e-10 * max|Ã|`` before returning.
    """
    if A.n_rows != A.n_cols:
        raise DimensionError(f"A must be square, got {A.shape}")
    b = np.asarray(b, dtype=np.float64)
    if b.shape != (A.n_rows,):
        raise DimensionError(f"b has shape {b.shape}, expected ({A.n_rows},)")
    if E.n != A.n_rows:
        raise DimensionError(f"E has {E.n} rows, A has {A.n_rows}")
    if not A.is_symmetric():
        raise SymmetryError("A is not stored symmetrically")

    e = E.entries
    border = A.times_dense(e)
    corner = np.empty((E.k, E.k))
    _kernels.dense_tn(e, border, corner)
    corner = 0.5 * (corner + corner.T)
    et_b = np.empty((E.k, 1))
    _kernels.dense_tn(e, np.ascontiguousarray(b[:, None]), et_b)

    aug = AugmentedMatrix(A, _readonly(border), _readonly(corner))
    rhs = np.concatenate([b, et_b[:, 0]])
    system = EncodedSystem(A, E, aug, _readonly(b.copy()), _readonly(rhs))
    if verify and E.k and A.n_rows + E.k <= DENSE_EIG_BUDGET:
        resid = null_space_residual(system)
        if resid > 1e-10 * aug.max_abs():
            raise ArithmeticError(f"null-space identity violated: {resid:.3e}")
    return system


def null_space_residual(system: EncodedSystem):
    """``max |Ã [E; -I]|`` computed column by column."""
    basis = system.null_space_basis()
    worst = 0.0
    for j in range(system.k):
        col = system.augmented.matvec(np.ascontiguousarray(basis[:, j]))
        worst = max(worst, float(np.max(np.abs(col))))
    return worst


def _full_column_rank(cols):
    if cols.shape[1] == 0:
        return True
    if cols.shape[1] > cols.shape[0]:
        return False
    s = np.linalg.svd(cols, compute_uv=False)
    return s[0] > 0.0 and s[-1] > RANK_RTOL * s[0]


def kruskal_rank_exact(Et):
    """Largest ``j`` such that every ``j`` columns of ``Et`` are independent.

    Enumerates all column subsets of each size, so it is only meant for
    small matrices: each size tried must have at most 10**6 subsets.
    """
    Et = np.atleast_2d(np.asarray(Et, dtype=np.float64))
    rows, cols = Et.shape
    rank = 0
    for j in range(1, min(rows, cols) + 1):
        if math.comb(cols, j) > KRUSKAL_SUBSET_BUDGET:
            raise BudgetError(
                f"C({cols}, {j}) subsets exceed the exact budget; "
                "use kruskal_rank_operative for a specific fault set")
        for subset in itertools.combinations(range(cols), j):
            if not _full_column_rank(Et[:, subset]):
                return rank
        rank = j
    return rank


def kruskal_rank_operative(E: EncodingMatrix, faulty):
    """True when the columns of ``E^T`` at ``faulty`` are linearly independent."""
    idx = sorted(int(i) for i in faulty)
    if not idx:
        return True
    if len(idx) > E.k:
        return False
    return _full_column_rank(E.entries[idx, :].T)


@dataclass(frozen=True)
class SpectrumReport:
    raw_eigenvalues: np.ndarray
    augmented_eigenvalues: np.ndarray
    kappa_e: float
    n_zero: int
    lower_interlacing: bool
    upper_interlacing: bool


def spectrum_diagnostics(system: EncodedSystem, rel_zero=RANK_RTOL):
    """Dense spectra of ``A`` and ``Ã`` and the effective condition number.

    ``kappa_e`` is the ratio of the largest eigenvalue of ``Ã`` to its
    ``(k+1)``-th smallest. Interlacing checks allow a slack of
    ``rel_zero * max eigenvalue`` for rounding.
    """
    n, k = system.n, system.k
    if n + k > DENSE_EIG_BUDGET:
        raise BudgetError(f"n + k = {n + k} exceeds the dense budget {DENSE_EIG_BUDGET}")
    lam = jacobi_eigenvalues(system.raw.to_dense())
    lam_aug = jacobi_eigenvalues(system.augmented.to_dense())
    top = lam_aug[-1]
    slack = rel_zero * abs(top)
    n_zero = int(np.sum(np.abs(lam_aug) <= slack))
    kappa_e = float(top / lam_aug[k])
    return SpectrumReport(
        raw_eigenvalues=lam,
        augmented_eigenvalues=lam_aug,
        kappa_e=kappa_e,
        n_zero=n_zero,
        lower_interlacing=bool(lam[0] <= lam_aug[k] + slack),
        upper_interlacing=bool(lam[-1] <= lam_aug[-1] + slack),
    )


def save_encoding(directory, system: EncodedSystem):
    """Write ``E`` and the augmented right-hand side plus a JSON header."""
    os.makedirs(directory, exist_ok=True)
    with open(os.path.join(directory, "encoding.mtx"), "w") as fh:
        write_array(fh, system.encoder.entries)
    with open(os.path.join(directory, "rhs_augmented.mtx"), "w") as fh:
        write_array(fh, system.rhs_augmented)
    header = {"n": system.n, "k": system.k, "seed": system.encoder.seed}
    with open(os.path.join(directory, "encoding.json"), "w") as fh:
        json.dump(header, fh, sort_keys=True)
        fh.write("\n")


def load_encoding(directory):
    """Read back ``(EncodingMatrix, rhs_augmented)`` written by :func:`save_encoding`."""
    with open(os.path.join(directory, "encoding.json")) as fh:
        header = json.load(fh)
    n, k = header["n"], header["k"]
    entries = read_array(os.path.join(directory, "encoding.mtx"))
    rhs = read_array(os.path.join(directory, "rhs_augmented.mtx"))[:, 0]
    return EncodingMatrix(n, k, entries, header.get("seed")), rhs
