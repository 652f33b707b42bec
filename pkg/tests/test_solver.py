import json
import math
from dataclasses import replace

import numpy as np
import pytest

from erasure_cg.encoding import EncodingMatrix, build_encoded_system, gen_gaussian_encoding
from erasure_cg.exceptions import (DimensionError, FaultCapacityError, NumericalFailure,
                                   UnrecoverableFaultSet)
from erasure_cg.faults import FaultEvent, FaultPlan, build_topology
from erasure_cg.recovery import purified_oracle, recover
from erasure_cg.solver import SolverConfig, initial_state, solve, step
from erasure_cg.sparse_core import CsrMatrix, IndexMask, gen_ltridiag

from oracles import plain_cg, random_spd


def _system(n, k, seed=0, A=None):
    A = A if A is not None else gen_ltridiag(n)
    x_star = np.linspace(0.1, 1.0, n)
    return build_encoded_system(A, A.matvec(x_star), gen_gaussian_encoding(n, k, seed))


def test_identity_converges_in_one_step():
    A = CsrMatrix.from_dense(np.eye(4))
    s = build_encoded_system(A, np.array([1.0, 2.0, 3.0, 4.0]), gen_gaussian_encoding(4, 0, 0))
    state, faults, trace = solve(s)
    assert state.status == "converged" and state.t == 1
    np.testing.assert_array_equal(state.x, [1.0, 2.0, 3.0, 4.0])
    assert len(trace.records) == 2


def test_zero_rhs_converges_immediately():
    s = build_encoded_system(gen_ltridiag(3), np.zeros(3), gen_gaussian_encoding(3, 1, 0))
    state, _, trace = solve(s)
    assert state.status == "converged" and state.t == 0 and trace.iterations == 0


def test_step_flags_exact_solution():
    s = _system(3, 0)
    st = initial_state(s)
    st = replace(st, r=np.zeros(3))
    assert step(st, s, IndexMask.empty(3)).status == "converged"


@pytest.mark.parametrize("seed", range(3))
def test_no_fault_iterates_match_textbook(seed):
    rng = np.random.default_rng(seed)
    D = random_spd(20, rng)
    b = rng.standard_normal(20)
    s = build_encoded_system(CsrMatrix.from_dense(D), b, gen_gaussian_encoding(20, 0, 0))
    ref_iterates, ref_norms = plain_cg(D, b, 1e-10, 200)
    st = initial_state(s)
    mask = IndexMask.empty(20)
    for t in range(1, len(ref_iterates)):
        st = step(st, s, mask)
        assert st.x.tobytes() == ref_iterates[t].tobytes()


def test_truncation_after_fault_and_freeze():
    s = _system(8, 2)
    plan = FaultPlan((FaultEvent(2, (1, 5)),))
    state, faults, trace = solve(s, plan, config=SolverConfig(max_iters=80))
    assert state.converged
    recs = trace.records
    assert recs[2].fault_event and recs[2].n_faulty == 2
    assert recs[3].truncated and not recs[4].truncated
    assert recs[1].truncated  # the very first step is always p = r
    assert trace.fault_iterations == [2]
    assert state.x[1] == faults.snapshots[1] and state.x[5] == faults.snapshots[5]


def test_freeze_holds_at_every_iteration():
    s = _system(10, 2)
    plan = FaultPlan((FaultEvent(3, (4,)), FaultEvent(6, (0,))))
    for stop in range(3, 20):
        state, faults, _ = solve(s, plan, config=SolverConfig(max_iters=stop))
        for i in faults.faulty_indices:
            assert state.x[i] == faults.snapshots[i]


def test_purified_consistency_after_fault():
    s = _system(12, 3, seed=2)
    plan = FaultPlan((FaultEvent(3, (2, 7)),))
    for stop in range(4, 25):
        state, faults, _ = solve(s, plan, config=SolverConfig(max_iters=stop))
        if state.status == "converged":
            break
        v = faults.mask.viable
        fresh = s.rhs_augmented - s.augmented.matvec(state.x)
        scale = np.linalg.norm(s.rhs_augmented[v])
        assert np.linalg.norm((state.r - fresh)[v]) <= 1e-12 * scale


def test_faulted_solution_matches_purified_oracle():
    s = _system(8, 2)
    plan = FaultPlan((FaultEvent(2, (3, 6)),))
    state, faults, _ = solve(s, plan, config=SolverConfig(max_iters=80))
    assert state.converged
    ref = purified_oracle(s, faults.faulty_indices, faults.snapshot_vector())
    ours = recover(s, state, faults).x_star
    n = s.n
    ref_x = ref[:n] + s.encoder.entries @ ref[n:]
    assert np.max(np.abs(ours - ref_x)) <= 1e-8
    np.testing.assert_allclose(ours, np.linspace(0.1, 1.0, 8), atol=1e-8)


def test_no_recompute_flag_still_converges():
    s = _system(30, 3, seed=4)
    plan = FaultPlan((FaultEvent(4, (10,)),))
    state, faults, _ = solve(s, plan, config=SolverConfig(
        max_iters=300, recompute_residual_on_fault=False))
    assert state.converged
    assert recover(s, state, faults).raw_relative_residual < 1e-9


def test_breakdown_status():
    # Indefinite matrix: the first curvature (q, p) is negative.
    A = CsrMatrix.from_dense(np.array([[1.0, 0.0], [0.0, -2.0]]))
    s = build_encoded_system(A, np.array([1.0, 1.0]), gen_gaussian_encoding(2, 0, 0))
    state, _, trace = solve(s)
    assert state.status == "breakdown" and trace.termination == "breakdown"


def test_nan_raises():
    s = build_encoded_system(gen_ltridiag(3), np.array([1.0, np.nan, 0.0]),
                             gen_gaussian_encoding(3, 0, 0))
    with pytest.raises(NumericalFailure):
        solve(s)


def test_max_iters_and_trace_length():
    s = _system(50, 0)
    state, _, trace = solve(s, config=SolverConfig(max_iters=7))
    assert state.status == "max_iters" and len(trace.records) == 8


def test_plan_and_topology_validation():
    s = _system(6, 1)
    with pytest.raises(FaultCapacityError):
        solve(s, FaultPlan((FaultEvent(1, (0, 1)),)))
    with pytest.raises(DimensionError):
        solve(s, topology=build_topology(5, 1))


def test_relative_tolerance_mode():
    s = _system(40, 0)
    cfg = SolverConfig(tol_rel=1e-6)
    state, _, trace = solve(s, config=cfg)
    assert state.converged
    assert trace.final_residual <= 1e-6 * np.linalg.norm(s.rhs_augmented)


def test_trace_exports():
    s = _system(8, 2)
    _, _, trace = solve(s, FaultPlan((FaultEvent(2, (3,)),)))
    lines = trace.to_csv().splitlines()
    assert lines[0] == "iter,res_norm,n_faulty,fault_event,truncated"
    assert len(lines) == len(trace.records) + 1
    it, res, nf, fe, tr = lines[3].split(",")
    assert (it, nf, fe, tr) == ("2", "1", "1", "0")
    assert float(res) == trace.records[2].res_norm
    side = json.loads(trace.sidecar_json())
    assert side["termination"] == "converged" and side["fault_iterations"] == [2]
    assert math.isclose(side["final_res_norm"], trace.final_residual)


def test_dependent_encoding_rows_make_recovery_fail():
    E = np.zeros((4, 1))
    E[0, 0] = 1.0
    s = build_encoded_system(gen_ltridiag(4), np.ones(4), EncodingMatrix(4, 1, E))
    state, faults, _ = solve(s, FaultPlan((FaultEvent(1, (2,)),)))
    with pytest.raises(UnrecoverableFaultSet):
        recover(s, state, faults, require_converged=False)
