import numpy as np
import pytest

from packcover import DomainError, ShapeError, SparseMatrix


def random_dense(rng, nrows, ncols, density=0.6):
    mask = rng.random((nrows, ncols)) < density
    return np.where(mask, rng.uniform(0.1, 2.0, (nrows, ncols)), 0.0)


def test_matvec_identity():
    A = SparseMatrix.from_dense(np.eye(2))
    assert np.array_equal(A.matvec([1.0, 1.0]), [1.0, 1.0])


def test_matvec_single_entry():
    A = SparseMatrix.from_triplets(2, 2, [0], [1], [0.5])
    assert np.allclose(A.matvec([7.0, 2.0]), [1.0, 0.0])


def test_matvec_matches_dense_product():
    rng = np.random.default_rng(7)
    for _ in range(80):
        nrows = int(rng.integers(1, 9))
        ncols = int(rng.integers(1, 9))
        dense = random_dense(rng, nrows, ncols)
        A = SparseMatrix.from_dense(dense)
        x = rng.uniform(-1.0, 1.0, ncols)
        expected = dense @ x
        got = A.matvec(x)
        assert np.all(np.abs(got - expected) <= 1e-12 * np.maximum(np.abs(expected), 1.0))


def test_matvec_transpose_identity_and_row():
    A = SparseMatrix.from_dense(np.eye(2))
    assert np.array_equal(A.matvec_transpose([3.0, 4.0]), [3.0, 4.0])
    row = SparseMatrix.from_dense([[1.0, 1.0, 1.0]])
    assert np.array_equal(row.matvec_transpose([2.0]), [2.0, 2.0, 2.0])


def test_matvec_transpose_matches_dense():
    rng = np.random.default_rng(11)
    for _ in range(50):
        dense = random_dense(rng, 4, 3)
        A = SparseMatrix.from_dense(dense)
        y = rng.uniform(-1.0, 1.0, 4)
        expected = dense.T @ y
        assert np.allclose(A.matvec_transpose(y), expected, rtol=1e-12, atol=1e-14)


def test_adjoint_identity():
    rng = np.random.default_rng(3)
    for nrows, ncols in [(1, 1), (5, 2), (8, 8), (3, 7)]:
        dense = random_dense(rng, nrows, ncols)
        A = SparseMatrix.from_dense(dense)
        x = rng.uniform(-1.0, 1.0, ncols)
        y = rng.uniform(-1.0, 1.0, nrows)
        left = float(y @ A.matvec(x))
        right = float(x @ A.matvec_transpose(y))
        assert abs(left - right) <= 1e-12 * max(1.0, abs(left))


def test_row_l1_norms():
    assert np.array_equal(SparseMatrix.from_dense(np.eye(3)).row_l1_norms(), np.ones(3))
    row = SparseMatrix.from_dense([[0.5, 0.5, 1.0]])
    assert np.array_equal(row.row_l1_norms(), [2.0])
    rng = np.random.default_rng(5)
    dense = random_dense(rng, 6, 4)
    A = SparseMatrix.from_dense(dense)
    assert np.allclose(A.row_l1_norms(), dense.sum(axis=1), rtol=1e-13)


def test_row_l1_norms_empty_rows():
    A = SparseMatrix.from_triplets(4, 3, [1], [0], [2.0])
    assert np.array_equal(A.row_l1_norms(), [0.0, 2.0, 0.0, 0.0])


def test_inf_operator_norm():
    assert SparseMatrix.from_dense(np.eye(3)).inf_operator_norm() == 1.0
    A = SparseMatrix.from_dense([[1.0, 1.0], [0.5, 0.0]])
    assert A.inf_operator_norm() == 2.0
    empty = SparseMatrix.from_triplets(2, 2, [], [], [])
    assert empty.inf_operator_norm() == 0.0


def test_width():
    assert SparseMatrix.from_dense(np.eye(4)).width() == 1
    assert SparseMatrix.from_dense([[1.0] * 5]).width() == 5
    rng = np.random.default_rng(9)
    dense = random_dense(rng, 5, 6)
    assert SparseMatrix.from_dense(dense).width() == int((dense > 0).sum(axis=1).max())


def test_norm_bounded_by_width_times_max():
    rng = np.random.default_rng(13)
    for _ in range(20):
        dense = random_dense(rng, 5, 5)
        A = SparseMatrix.from_dense(dense)
        if A.nnz == 0:
            continue
        assert A.inf_operator_norm() <= A.width() * A.values.max() + 1e-12


def test_triplet_duplicates_sum_and_zeros_drop():
    A = SparseMatrix.from_triplets(2, 2, [0, 0, 1], [1, 1, 0], [0.25, 0.25, 0.0])
    assert A.nnz == 1
    assert np.allclose(A.to_dense(), [[0.0, 0.5], [0.0, 0.0]])


def test_negative_value_rejected():
    with pytest.raises(DomainError):
        SparseMatrix.from_triplets(1, 1, [0], [0], [-1.0])


def test_shape_errors():
    A = SparseMatrix.from_dense(np.eye(2))
    with pytest.raises(ShapeError):
        A.matvec([1.0, 2.0, 3.0])
    with pytest.raises(ShapeError):
        A.matvec_transpose([1.0])
    with pytest.raises(ShapeError):
        SparseMatrix.from_triplets(1, 1, [0], [1], [1.0])


def test_immutability():
    A = SparseMatrix.from_dense(np.eye(2))
    with pytest.raises(ValueError):
        A.values[0] = 5.0
