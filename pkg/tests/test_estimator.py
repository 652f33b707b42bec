import numpy as np
import pytest
from scipy import sparse
from sklearn.base import clone
from sklearn.exceptions import NotFittedError

from erasure_cg import ErasureCodedCG
from erasure_cg.exceptions import DimensionError, SymmetryError
from erasure_cg.faults import FaultEvent, FaultPlan
from erasure_cg.sparse_core import gen_ltridiag


def test_params_and_clone():
    est = ErasureCodedCG(k=3, seed=7)
    params = est.get_params()
    assert params["k"] == 3 and params["seed"] == 7 and params["tol"] == 1e-10
    other = clone(est).set_params(k=1)
    assert other.k == 1 and est.k == 3


def test_fit_dense_and_scipy_inputs_agree():
    A = gen_ltridiag(40)
    x = np.linspace(0, 1, 40)
    b = A.matvec(x)
    est = ErasureCodedCG(k=2, seed=3).fit(A.to_dense(), b)
    assert est.converged_ and est.status_ == "converged"
    np.testing.assert_allclose(est.solution_, x, atol=1e-9)
    assert est.raw_relative_residual_ < 1e-10
    assert est.fault_state_.faulty_indices == est.fault_plan_.all_indices()
    other = ErasureCodedCG(k=2, seed=3).fit(sparse.csr_matrix(A.to_dense()), b)
    assert other.solution_.tobytes() == est.solution_.tobytes()


def test_explicit_plan_and_residual():
    A = gen_ltridiag(20)
    b = np.ones(20)
    plan = FaultPlan((FaultEvent(2, (4,)),))
    est = ErasureCodedCG(k=1, fault_plan=plan)
    x = est.solve(A, b)
    assert est.fault_state_.faulty_indices == (4,)
    assert est.residual() == est.raw_relative_residual_
    assert est.residual(A, b) == pytest.approx(est.raw_relative_residual_)
    assert x.shape == (20,)


def test_unfitted_and_bad_inputs():
    with pytest.raises(NotFittedError):
        ErasureCodedCG().residual()
    with pytest.raises(SymmetryError):
        ErasureCodedCG().fit(np.array([[1.0, 2.0], [0.0, 1.0]]), np.ones(2))
    with pytest.raises(DimensionError):
        ErasureCodedCG().fit(np.eye(3), np.ones(2))
    with pytest.raises(ValueError):
        ErasureCodedCG(k=5).fit(np.eye(3), np.ones(3))
