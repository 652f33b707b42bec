"""Structural checks on a matrix and its encoding, used by ``erasure-cg check``."""
from __future__ import annotations

from typing import NamedTuple

import numpy as np

from .encoding import (build_encoded_system, gen_gaussian_encoding, kruskal_rank_operative,
                       null_space_residual, spectrum_diagnostics)
from .faults import sample_fault_plan
from .rng import stream
from .sparse_core import CsrMatrix, inner_masked


class CheckResult(NamedTuple):
    name: str
    passed: bool
    detail: str


def run_checks(A: CsrMatrix, k, seed=0, n_samples=1000, spectrum_budget=200):
    n = A.n_rows
    results = []
    sym = A.is_symmetric()
    results.append(CheckResult("symmetric_storage", sym, f"nnz={A.nnz}"))
    if not sym:
        return results

    rs = stream(seed, "checks")
    u, v = rs.normal(n), rs.normal(n)
    lhs, rhs = inner_masked(A.matvec(u), v), inner_masked(u, A.matvec(v))
    rel = abs(lhs - rhs) / max(abs(lhs), abs(rhs), 1e-300)
    results.append(CheckResult("self_adjoint", rel <= 1e-12, f"rel={rel:.2e}"))

    b = A.matvec(rs.uniform(n))
    system = build_encoded_system(A, b, gen_gaussian_encoding(n, k, seed), verify=False)
    scale = system.augmented.max_abs()
    ns = null_space_residual(system)
    results.append(CheckResult("null_space", ns <= 1e-10 * scale, f"max={ns:.2e}"))

    m = n + k
    worst = np.inf
    for _ in range(n_samples):
        w = rs.normal(m)
        quad = inner_masked(w, system.augmented.matvec(w))
        worst = min(worst, quad / (inner_masked(w, w) * scale))
    results.append(CheckResult("positive_semidefinite", worst >= -1e-10,
                               f"min normalized quadratic form={worst:.2e}"))

    plan = sample_fault_plan(n, k, 0.25, seed)
    F = plan.all_indices()
    results.append(CheckResult("operative_kruskal_rank",
                               kruskal_rank_operative(system.encoder, F), f"|F|={len(F)}"))

    if m <= spectrum_budget:
        spec = spectrum_diagnostics(system)
        results.append(CheckResult("zero_eigenvalues", spec.n_zero == k,
                                   f"{spec.n_zero} zero eigenvalues, k={k}"))
        results.append(CheckResult("interlacing",
                                   spec.lower_interlacing and spec.upper_interlacing,
                                   f"kappa_e={spec.kappa_e:.4e}"))
    return results
