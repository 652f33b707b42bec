"""Recovering the raw solution from an augmented iterate.

Any solution of the augmented system has the form ``[x*; 0] + [E; -I] a``,
so ``x* = y + E z`` where ``y`` and ``z`` are the leading ``n`` and trailing
``k`` components. Only ``z`` and ``E`` are needed; the fault set enters as a
precondition (the rows of ``E`` at the faulty indices must be independent).
"""
from __future__ import annotations

import json
from dataclasses import dataclass, field

import numpy as np

from . import _kernels
from .encoding import EncodedSystem, kruskal_rank_operative
from .exceptions import (BudgetError, DimensionError, NotConvergedError,
                         UnrecoverableFaultSet, ZeroRightHandSide)
from .faults import FaultState
from .sparse_core import CsrMatrix, norm2_masked

__all__ = [
    "RecoveredSolution",
    "recover",
    "recover_vector",
    "purified_oracle",
    "raw_relative_residual",
]

ORACLE_BUDGET = 200


def raw_relative_residual(A: CsrMatrix, b, x):
    """``||b - A x||_2 / ||b||_2`` with unmasked kernels.

    Raises :class:`ZeroRightHandSide` (carrying the absolute residual) when
    ``b`` is zero.
    """
    b = np.asarray(b, dtype=np.float64)
    x = np.asarray(x, dtype=np.float64)
    if b.shape != (A.n_rows,) or x.shape != (A.n_cols,):
        raise DimensionError("A, b and x dimensions do not agree")
    resid = norm2_masked(b - A.matvec(x))
    bnorm = norm2_masked(b)
    if bnorm == 0.0:
        raise ZeroRightHandSide(resid)
    return resid / bnorm


@dataclass(frozen=True, eq=False)
class RecoveredSolution:
    x_star: np.ndarray
    raw_relative_residual: float
    faulty_indices_used: tuple = ()
    snapshots_used: dict = field(default_factory=dict)
    converged: bool = True
    iterations: int = 0

    @property
    def n(self):
        return self.x_star.shape[0]

    def to_dict(self, k):
        return {"n": self.n, "k": k, "converged": self.converged,
                "iterations": self.iterations,
                "raw_relative_residual": self.raw_relative_residual,
                "faulty_indices": list(self.faulty_indices_used)}

    def to_json(self, k):
        return json.dumps(self.to_dict(k), sort_keys=True)


def recover_vector(system: EncodedSystem, x_aug):
    """``x_aug[:n] + E @ x_aug[n:]``."""
    n, k = system.n, system.k
    x_aug = np.asarray(x_aug, dtype=np.float64)
    if x_aug.shape != (n + k,):
        raise DimensionError(f"expected length {n + k}, got {x_aug.shape}")
    shift = np.empty(n)
    _kernels.dense_matvec(system.encoder.entries, np.ascontiguousarray(x_aug[n:]), shift)
    return x_aug[:n] + shift


def recover(system: EncodedSystem, final_state, fault_state: FaultState | None = None,
            require_converged=True):
    """Recover ``x*`` from a finished solve.

    Parameters
    ----------
    system : EncodedSystem
    final_state : SolverState
        State returned by :func:`erasure_cg.solver.solve`.
    fault_state : FaultState, optional
        Fault set at termination; ``None`` means no faults.
    require_converged : bool
        When False, a solve that stopped at ``max_iters`` is still recovered
        and the result is marked ``converged=False``.

    Raises
    ------
    NotConvergedError
        The solve did not converge and ``require_converged`` is set.
    UnrecoverableFaultSet
        The encoding rows at the faulty indices are linearly dependent.
    """
    converged = bool(final_state.converged)
    if require_converged and not converged:
        raise NotConvergedError(f"solver terminated with status {final_state.status!r}")
    faulty = tuple(fault_state.faulty_indices) if fault_state is not None else ()
    snapshots = dict(fault_state.snapshots) if fault_state is not None else {}
    if not kruskal_rank_operative(system.encoder, faulty):
        raise UnrecoverableFaultSet(
            f"encoding rows at {list(faulty)} are linearly dependent")
    x_star = recover_vector(system, final_state.x)
    rel = raw_relative_residual(system.raw, system.rhs_raw, x_star)
    return RecoveredSolution(x_star=x_star, raw_relative_residual=rel,
                             faulty_indices_used=faulty, snapshots_used=snapshots,
                             converged=converged, iterations=int(final_state.t))


def _pinv_solve(M, rhs, rcond):
    if M.size == 0:
        return np.zeros(M.shape[1])
    U, s, Vt = np.linalg.svd(M, full_matrices=False)
    keep = s > rcond * s[0] if s.size and s[0] > 0 else np.zeros_like(s, dtype=bool)
    coef = (U[:, keep].T @ rhs) / s[keep]
    return Vt[keep].T @ coef


def purified_oracle(system: EncodedSystem, faulty, snapshots, rcond=1e-10):
    """Dense minimum-norm solution of the purified system.

    The correct (``c``), faulty (``f``) and redundant (``r``) parts are
    separated; the blocks are assembled from ``A`` and ``E`` directly::

        [ A11    Z1 ] [c]   [ b1    ]   [ A12  ]
        [ Z1^T   R  ] [r] = [ E^T b ] - [ Z2^T ] f

        Z1 = A11 E1 + A12 E2,  Z2 = A12^T E1 + A22 E2,  R = E^T A E

    The system is solved by an SVD pseudoinverse that drops singular values
    below ``rcond`` times the largest, and ``[c; f; r]`` is returned in the
    original component order.
    """
    n, k = system.n, system.k
    if n + k > ORACLE_BUDGET:
        raise BudgetError(f"n + k = {n + k} exceeds the oracle budget {ORACLE_BUDGET}")
    F = sorted(int(i) for i in faulty)
    if len(F) > k:
        raise ValueError(f"|F| = {len(F)} exceeds k = {k}")
    f = np.asarray(snapshots, dtype=np.float64).reshape(len(F))
    C = [i for i in range(n) if i not in set(F)]
    A = system.raw.to_dense()
    E = np.array(system.encoder.entries)
    b = np.array(system.rhs_raw)
    A11, A12, A22 = A[np.ix_(C, C)], A[np.ix_(C, F)], A[np.ix_(F, F)]
    E1, E2 = E[C], E[F]
    Z1 = A11 @ E1 + A12 @ E2
    Z2 = A12.T @ E1 + A22 @ E2
    R = E.T @ A @ E
    M = np.block([[A11, Z1], [Z1.T, R]])
    rhs = np.concatenate([b[C] - A12 @ f, E.T @ b - Z2.T @ f])
    cr = _pinv_solve(M, rhs, rcond)
    out = np.empty(n + k)
    out[C] = cr[:len(C)]
    out[F] = f
    out[n:] = cr[len(C):]
    return out


def augmented_residual(system: EncodedSystem, x_aug):
    """``max |b~ - Ã x~|`` over all rows, including faulty ones."""
    res = system.rhs_augmented - system.augmented.matvec(np.ascontiguousarray(x_aug))
    return float(np.max(np.abs(res))) if res.size else 0.0
