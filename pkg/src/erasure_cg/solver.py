"""Erasure-coded conjugate gradient.

Two-term CG run on the augmented system, with every inner product and the
matrix-vector product restricted to the components that are still viable.
Three rules differ from textbook CG:

* no reuse: each ratio is formed from two inner products computed under the
  same (current) mask, so ``(r_t, r_t)`` is recomputed for ``alpha`` and
  ``(r_{t-1}, r_{t-1})`` is recomputed for ``beta``;
* truncation: the first direction after new faults is ``p = r``;
* freezing: faulty components of every vector are never written again.

With no faults the iteration is arithmetically identical to plain CG from
``x0 = 0``.
"""
from __future__ import annotations

import csv
import io
import json
import math
from dataclasses import dataclass, field, replace
from typing import NamedTuple

import numpy as np

from .encoding import EncodedSystem
from .exceptions import DimensionError, NumericalFailure
from .faults import FaultPlan, FaultState, ProcessTopology, advance
from .sparse_core import IndexMask, inner_masked, norm2_masked, spmv_masked

__all__ = [
    "SolverConfig",
    "SolverState",
    "TraceRecord",
    "SolveTrace",
    "step",
    "solve",
    "initial_state",
]

CONVERGED = "converged"
MAX_ITERS = "max_iters"
BREAKDOWN = "breakdown"


@dataclass(frozen=True)
class SolverConfig:
    """Stopping and fault-handling parameters.

    The solve stops once the masked residual 2-norm is at most
    ``max(tol_abs, tol_rel * ||b~||)`` (``tol_rel`` is off by default).
    """

    tol_abs: float = 1e-10
    max_iters: int = 1000
    recompute_residual_on_fault: bool = True
    tol_rel: float | None = None
    breakdown_eps: float = 1e-14

    def __post_init__(self):
        if not self.tol_abs > 0:
            raise ValueError("tol_abs must be positive")
        if self.max_iters < 1:
            raise ValueError("max_iters must be at least 1")

    def threshold(self, rhs_norm):
        if self.tol_rel is None:
            return self.tol_abs
        return max(self.tol_abs, self.tol_rel * rhs_norm)


@dataclass(frozen=True, eq=False)
class SolverState:
    x: np.ndarray
    r: np.ndarray
    r_prev: np.ndarray
    p: np.ndarray
    q: np.ndarray
    t: int = 0
    alpha: float = 0.0
    beta: float = 0.0
    truncate: bool = False
    truncated: bool = False
    status: str | None = None

    @property
    def converged(self):
        return self.status == CONVERGED


def initial_state(system: EncodedSystem):
    m = system.n + system.k
    r = np.array(system.rhs_augmented, dtype=np.float64)
    zeros = np.zeros(m)
    return SolverState(x=zeros.copy(), r=r, r_prev=r.copy(), p=zeros.copy(), q=zeros.copy())


def _finite(*values):
    for v in values:
        if not math.isfinite(v):
            raise NumericalFailure(f"non-finite aggregate {v!r}")


def step(state: SolverState, system: EncodedSystem, mask: IndexMask,
         breakdown_eps=1e-14) -> SolverState:
    """One CG iteration under ``mask``; returns a new state.

    If the masked ``(r, r)`` is exactly zero the state is returned unchanged
    except for ``status='converged'``. Loss of positive curvature on the
    viable subspace gives ``status='breakdown'``.
    """
    A = system.augmented
    viable = mask.viable
    rr = inner_masked(state.r, state.r, mask)
    _finite(rr)
    if rr == 0.0:
        return replace(state, status=CONVERGED)

    truncated = state.t == 0 or state.truncate
    if truncated:
        beta = 0.0
        p = np.where(viable, state.r, state.p)
    else:
        rr_prev = inner_masked(state.r_prev, state.r_prev, mask)
        rr_now = inner_masked(state.r, state.r, mask)
        _finite(rr_prev, rr_now)
        beta = rr_now / rr_prev
        p = np.where(viable, state.r + beta * state.p, state.p)

    q = np.where(viable, spmv_masked(A, p, mask, mask), state.q)
    qp = inner_masked(q, p, mask)
    rr_alpha = inner_masked(state.r, state.r, mask)
    _finite(qp, rr_alpha)
    if qp <= breakdown_eps * inner_masked(p, p, mask):
        return replace(state, p=p, q=q, beta=beta, truncated=truncated,
                       truncate=False, status=BREAKDOWN)
    alpha = rr_alpha / qp
    x = np.where(viable, state.x + alpha * p, state.x)
    r = np.where(viable, state.r - alpha * q, state.r)
    return SolverState(x=x, r=r, r_prev=state.r, p=p, q=q, t=state.t + 1,
                       alpha=alpha, beta=beta, truncate=False, truncated=truncated)


class TraceRecord(NamedTuple):
    iteration: int
    res_norm: float
    n_faulty: int
    fault_event: bool
    truncated: bool


@dataclass
class SolveTrace:
    """Per-iteration residual history.

    Row ``t`` describes the state after ``t`` iterations: the masked residual
    norm under the fault set in force from then on, whether faults were
    injected at the end of iteration ``t``, and whether iteration ``t`` used
    a truncated direction.
    """

    records: list = field(default_factory=list)
    termination: str | None = None

    @property
    def iterations(self):
        return self.records[-1].iteration if self.records else 0

    @property
    def final_residual(self):
        return self.records[-1].res_norm if self.records else math.nan

    @property
    def fault_iterations(self):
        return [rec.iteration for rec in self.records if rec.fault_event]

    def residuals(self):
        return np.array([rec.res_norm for rec in self.records])

    def write_csv(self, stream):
        w = csv.writer(stream, lineterminator="\n")
        w.writerow(["iter", "res_norm", "n_faulty", "fault_event", "truncated"])
        for rec in self.records:
            w.writerow([rec.iteration, repr(float(rec.res_norm)), rec.n_faulty,
                        int(rec.fault_event), int(rec.truncated)])

    def to_csv(self):
        buf = io.StringIO()
        self.write_csv(buf)
        return buf.getvalue()

    def sidecar(self):
        return {"termination": self.termination, "iterations": self.iterations,
                "final_res_norm": float(self.final_residual),
                "fault_iterations": self.fault_iterations}

    def sidecar_json(self):
        return json.dumps(self.sidecar(), sort_keys=True)


def _recomputed_residual(system, state, mask):
    # Faulty columns contribute through their snapshots, so no column mask here.
    Ax = spmv_masked(system.augmented, state.x, None, mask)
    return np.where(mask.viable, system.rhs_augmented - Ax, state.r)


def solve(system: EncodedSystem, plan: FaultPlan | None = None,
          topology: ProcessTopology | None = None,
          config: SolverConfig | None = None):
    """Run erasure-coded CG from ``x0 = 0``.

    Returns ``(state, fault_state, trace)``. ``state.status`` is one of
    ``'converged'``, ``'max_iters'`` or ``'breakdown'``.

    Raises
    ------
    NumericalFailure
        A NaN or Inf appeared in an inner product.
    FaultCapacityError
        The plan faults more than ``k`` components.
    """
    config = config or SolverConfig()
    plan = plan or FaultPlan.empty()
    n, k = system.n, system.k
    if topology is not None and (topology.n, topology.k) != (n, k):
        raise DimensionError("topology does not match the encoded system")
    plan.validate(n, k)

    state = initial_state(system)
    faults = FaultState.initial(n, k)
    trace = SolveTrace()
    threshold = config.threshold(norm2_masked(system.rhs_augmented))
    mask = faults.mask
    res = norm2_masked(state.r, mask)
    trace.records.append(TraceRecord(0, res, 0, False, False))

    while True:
        _finite(res)
        if res <= threshold:
            state = replace(state, status=CONVERGED)
            break
        if state.t >= config.max_iters:
            state = replace(state, status=MAX_ITERS)
            break
        state = step(state, system, mask, config.breakdown_eps)
        if state.status is not None:
            break
        faults, new_faults = advance(faults, plan, state.t, state.x)
        if new_faults:
            mask = faults.mask
            state = replace(state, truncate=True)
            if config.recompute_residual_on_fault:
                r = _recomputed_residual(system, state, mask)
                state = replace(state, r=r, r_prev=r)
        res = norm2_masked(state.r, mask)
        trace.records.append(TraceRecord(state.t, res, len(faults), new_faults,
                                         state.truncated))
    trace.termination = state.status
    return state, faults, trace
