"""Fault-oblivious conjugate gradient through input augmentation.

An SPD system ``A x = b`` is encoded into a larger singular but consistent
system; CG run on it with fail-stop faulty components simply skipped still
converges, and the raw solution is recovered from the augmented one.
"""
from .encoding import (AugmentedMatrix, EncodedSystem, EncodingMatrix, build_encoded_system,
                       gen_gaussian_encoding, kruskal_rank_exact, kruskal_rank_operative,
                       spectrum_diagnostics)
from .estimator import ErasureCodedCG
from .exceptions import *  # noqa: F401,F403
from .faults import (FaultEvent, FaultPlan, FaultState, ProcessTopology, advance,
                     build_topology, plan_from_processes, sample_fault_plan)
from .harness import (ExperimentConfig, ExperimentReport, emit_figure_data, run_experiment,
                      run_table)
from .mmio import parse_matrix_market, read_matrix_market, write_matrix_market
from .recovery import RecoveredSolution, purified_oracle, raw_relative_residual, recover
from .solver import SolveTrace, SolverConfig, SolverState, solve, step
from .sparse_core import (CsrMatrix, IndexMask, gen_ltridiag, inner_masked, norm2_masked,
                          spmv_masked)

__version__ = "0.1.0"
