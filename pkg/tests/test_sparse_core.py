import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from erasure_cg.exceptions import BoundsError, DimensionError, FormatError, InvalidSizeError
from erasure_cg.sparse_core import (CsrMatrix, IndexMask, gen_ltridiag, inner_masked,
                                    norm2_masked, spmv_masked)

from oracles import masked_dense_matvec, random_spd, seq_dot, seq_matvec


def test_ltridiag_3():
    A = gen_ltridiag(3)
    np.testing.assert_array_equal(A.to_dense(), [[2, -1, 0], [-1, 2, -1], [0, -1, 2]])
    assert A.nnz == 7


def test_ltridiag_500_nnz():
    assert gen_ltridiag(500).nnz == 1498


def test_ltridiag_2_spd():
    A = gen_ltridiag(2).to_dense()
    np.testing.assert_allclose(np.linalg.eigvalsh(A), [1.0, 3.0])


@pytest.mark.parametrize("n", [0, 1, -3])
def test_ltridiag_too_small(n):
    with pytest.raises(InvalidSizeError):
        gen_ltridiag(n)


def test_csr_invariants_enforced():
    with pytest.raises(FormatError):
        CsrMatrix(2, 2, [0, 2, 3], [1, 0, 1], [1.0, 2.0, 3.0])  # unsorted row
    with pytest.raises(BoundsError):
        CsrMatrix(2, 2, [0, 1, 2], [0, 2], [1.0, 1.0])
    with pytest.raises(FormatError):
        CsrMatrix(2, 2, [0, 1, 3], [0, 1], [1.0, 1.0])
    with pytest.raises(DimensionError):
        CsrMatrix(2, 2, [0, 1], [0], [1.0])


def test_from_coo_sums_duplicates():
    A = CsrMatrix.from_coo(2, 2, [0, 0, 1, 0], [1, 0, 1, 1], [1.0, 5.0, 2.0, 0.5])
    np.testing.assert_array_equal(A.to_dense(), [[5.0, 1.5], [0.0, 2.0]])


def test_arrays_are_immutable():
    A = gen_ltridiag(4)
    with pytest.raises(ValueError):
        A.values[0] = 7.0


def test_index_mask_membership():
    m = IndexMask((3, 1, 3), 5)
    assert m.excluded == (1, 3)
    assert 1 in m and 3 in m and 0 not in m and 7 not in m
    assert len(m) == 2
    with pytest.raises(BoundsError):
        IndexMask((5,), 5)


def test_spmv_identity_dropped_column():
    I3 = CsrMatrix.from_dense(np.eye(3))
    m = IndexMask((1,), 3)
    out = spmv_masked(I3, np.array([1.0, 2.0, 3.0]), m, m)
    assert (out[0], out[2]) == (1.0, 3.0)


def test_spmv_ltridiag_row_sums():
    out = spmv_masked(gen_ltridiag(3), np.ones(3))
    np.testing.assert_array_equal(out, [1.0, 0.0, 1.0])


def test_spmv_ltridiag_masked_column_oracle():
    A = gen_ltridiag(3)
    p = np.ones(3)
    rows, expected = masked_dense_matvec(A.to_dense(), p, [2], [2])
    assert rows == [0, 1]
    np.testing.assert_array_equal(expected, [1.0, 1.0])
    m = IndexMask((2,), 3)
    out = spmv_masked(A, p, m, m)
    np.testing.assert_array_equal(out[rows], expected)
    # Only the column is masked: row 2 is computed and lacks its own diagonal term.
    out = spmv_masked(A, p, m, None)
    np.testing.assert_array_equal(out, [1.0, 1.0, -1.0])


def test_spmv_dimension_errors():
    A = gen_ltridiag(3)
    with pytest.raises(DimensionError):
        spmv_masked(A, np.ones(4))
    with pytest.raises(DimensionError):
        spmv_masked(A, np.ones(3), IndexMask((), 4))


@pytest.mark.parametrize("u,v,ex,expected", [
    ([1, 2, 3], [4, 5, 6], (2,), 14.0),
    ([3, 4], [3, 4], (), 25.0),
    ([1, 1], [1, 1], (0, 1), 0.0),
])
def test_inner_masked(u, v, ex, expected):
    assert inner_masked(np.array(u, float), np.array(v, float), IndexMask(ex, len(u))) == expected


def test_norm2_masked():
    assert norm2_masked(np.array([3.0, 4.0])) == 5.0
    assert norm2_masked(np.array([3.0, 4.0, 12.0]), IndexMask((2,), 3)) == 5.0
    assert norm2_masked(np.zeros(4)) == 0.0


def test_inner_dimension_error():
    with pytest.raises(DimensionError):
        inner_masked(np.ones(2), np.ones(3))


def test_empty_mask_matches_dense_reference():
    rng = np.random.default_rng(11)
    for _ in range(5):
        D = random_spd(50, rng, density=0.2)
        A = CsrMatrix.from_dense(D)
        p = rng.standard_normal(50)
        got = spmv_masked(A, p)
        np.testing.assert_allclose(got, D @ p, rtol=1e-14, atol=1e-14 * np.abs(D).sum())
        u, v = rng.standard_normal(50), rng.standard_normal(50)
        assert inner_masked(u, v) == pytest.approx(float(u @ v), rel=1e-14, abs=1e-14)


def test_self_adjoint_random_symmetric():
    rng = np.random.default_rng(5)
    D = random_spd(40, rng)
    A = CsrMatrix.from_dense(D)
    assert A.is_symmetric()
    for _ in range(10):
        u, v = rng.standard_normal(40), rng.standard_normal(40)
        lhs, rhs = inner_masked(A.matvec(u), v), inner_masked(u, A.matvec(v))
        assert abs(lhs - rhs) <= 1e-12 * max(abs(lhs), abs(rhs))


@settings(max_examples=60, deadline=None)
@given(n=st.integers(2, 12), seed=st.integers(0, 2**32 - 1), data=st.data())
def test_spmv_masked_equals_dense_oracle_exactly(n, seed, data):
    rng = np.random.default_rng(seed)
    D = random_spd(n, rng, density=0.5)
    A = CsrMatrix.from_dense(D)
    cols = data.draw(st.sets(st.integers(0, n - 1), max_size=n))
    rows = data.draw(st.sets(st.integers(0, n - 1), max_size=n))
    p = rng.standard_normal(n)
    viable_rows, expected = masked_dense_matvec(D, p, cols, rows)
    out = spmv_masked(A, p, IndexMask(tuple(cols), n), IndexMask(tuple(rows), n))
    np.testing.assert_array_equal(out[viable_rows], expected)


@settings(max_examples=60, deadline=None)
@given(vals=st.lists(st.floats(-1e6, 1e6), min_size=1, max_size=30), data=st.data())
def test_inner_masked_is_ordered_sum(vals, data):
    u = np.array(vals)
    v = np.array(data.draw(st.lists(st.floats(-1e6, 1e6), min_size=len(vals),
                                    max_size=len(vals))))
    ex = data.draw(st.sets(st.integers(0, len(vals) - 1)))
    keep = [i for i in range(len(vals)) if i not in ex]
    assert inner_masked(u, v, IndexMask(tuple(ex), len(vals))) == seq_dot(u[keep], v[keep])


def test_kernels_deterministic():
    rng = np.random.default_rng(3)
    A = CsrMatrix.from_dense(random_spd(30, rng))
    p = rng.standard_normal(30)
    a, b = spmv_masked(A, p), spmv_masked(A, p)
    assert a.tobytes() == b.tobytes()
    np.testing.assert_array_equal(a, seq_matvec(A.to_dense(), p))
