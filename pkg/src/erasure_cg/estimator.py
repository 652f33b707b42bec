"""scikit-learn style front end."""
from __future__ import annotations

import math

from sklearn.base import BaseEstimator
from sklearn.utils.validation import check_is_fitted

from .encoding import build_encoded_system, gen_gaussian_encoding
from .faults import FaultPlan, build_topology, sample_fault_plan
from .recovery import raw_relative_residual, recover
from .solver import SolverConfig, solve
from .validation import check_matrix, check_vector


class ErasureCodedCG(BaseEstimator):
    """Solve ``A x = b`` with erasure-coded CG under simulated fail-stop faults.

    Parameters
    ----------
    k : int
        Number of faults the encoding tolerates. Ignored when ``k_frac`` is set.
    k_frac : float, optional
        ``k`` as a fraction of ``n`` (rounded to nearest).
    tol : float
        Absolute tolerance on the masked residual 2-norm.
    max_iter_mult : float
        Iteration cap as a multiple of ``n``.
    fault_frac : float
        Sampled faults happen at the end of an iteration in ``[1, fault_frac * n]``.
    fault_plan : FaultPlan, optional
        Explicit plan; overrides sampling.
    inject_faults : bool
        Sample a plan of ``k`` simultaneous faults when no explicit plan is given.
    recompute_residual_on_fault : bool
    seed : int
        Seed for the encoding and the sampled plan.

    Attributes
    ----------
    solution_ : ndarray
        Recovered solution of the raw system.
    augmented_solution_ : ndarray
    n_iter_ : int
    status_ : str
    converged_ : bool
    raw_relative_residual_ : float
    system_, fault_plan_, fault_state_, trace_, recovered_
    """

    def __init__(self, k=0, k_frac=None, tol=1e-10, max_iter_mult=10.0, fault_frac=0.25,
                 fault_plan=None, inject_faults=True, recompute_residual_on_fault=True,
                 seed=0):
        self.k = k
        self.k_frac = k_frac
        self.tol = tol
        self.max_iter_mult = max_iter_mult
        self.fault_frac = fault_frac
        self.fault_plan = fault_plan
        self.inject_faults = inject_faults
        self.recompute_residual_on_fault = recompute_residual_on_fault
        self.seed = seed

    def _resolve_k(self, n):
        k = self.k if self.k_frac is None else int(math.floor(self.k_frac * n + 0.5))
        if not 0 <= k <= n:
            raise ValueError(f"k={k} must lie in [0, {n}]")
        return k

    def fit(self, A, b):
        A = check_matrix(A)
        n = A.n_rows
        b = check_vector(b, n)
        k = self._resolve_k(n)

        system = build_encoded_system(A, b, gen_gaussian_encoding(n, k, self.seed))
        if self.fault_plan is not None:
            plan = self.fault_plan
        elif self.inject_faults:
            plan = sample_fault_plan(n, k, self.fault_frac, self.seed)
        else:
            plan = FaultPlan.empty()
        config = SolverConfig(tol_abs=self.tol,
                              max_iters=max(1, int(self.max_iter_mult * n)),
                              recompute_residual_on_fault=self.recompute_residual_on_fault)
        state, faults, trace = solve(system, plan, build_topology(n, k), config)
        rec = recover(system, state, faults, require_converged=False)

        self.system_ = system
        self.fault_plan_ = plan
        self.fault_state_ = faults
        self.trace_ = trace
        self.recovered_ = rec
        self.augmented_solution_ = state.x
        self.solution_ = rec.x_star
        self.n_iter_ = trace.iterations
        self.status_ = state.status
        self.converged_ = state.converged
        self.raw_relative_residual_ = rec.raw_relative_residual
        return self

    def solve(self, A, b):
        """Fit and return the recovered solution."""
        return self.fit(A, b).solution_

    def residual(self, A=None, b=None):
        """Relative residual of the recovered solution on ``(A, b)`` (default: fitted system)."""
        check_is_fitted(self, "solution_")
        if A is None:
            return self.raw_relative_residual_
        A = check_matrix(A)
        return raw_relative_residual(A, check_vector(b, A.n_rows), self.solution_)
