import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from permcast.matrix_core import (
    DenseMatrix,
    EntryBounds,
    MatrixFormatError,
    ShapeError,
    SparseColumnSpec,
    gen_flat,
    gen_rank_one,
    gen_sparse_column,
    gen_uniform,
    read_matrix,
    scale_tilde,
    validate_class,
    write_matrix,
)


def test_validate_class_examples():
    assert validate_class(np.ones((3, 3)), EntryBounds(1, 1))
    assert not validate_class([[1, 2], [3, 4]], EntryBounds(1, 3))
    assert not validate_class(np.eye(3), EntryBounds(0.5, 2))


def test_dense_matrix_rejects_bad_input():
    with pytest.raises(ShapeError):
        DenseMatrix(np.ones((2, 3)))
    with pytest.raises(ValueError):
        DenseMatrix([[1.0, -1.0]])
    with pytest.raises(ValueError):
        DenseMatrix([[np.nan]])
    with pytest.raises(ShapeError):
        DenseMatrix(np.ones(3))


def test_dense_matrix_is_read_only_copy():
    src = np.ones((2, 2))
    A = DenseMatrix(src)
    src[0, 0] = 5.0
    assert A.entries[0, 0] == 1.0
    with pytest.raises(ValueError):
        A.entries[0, 0] = 2.0


def test_bounds_validation():
    with pytest.raises(ValueError):
        EntryBounds(2, 1)
    with pytest.raises(ValueError):
        EntryBounds(0, 0)
    with pytest.raises(ValueError):
        SparseColumnSpec(0.5, 0.6, EntryBounds(1, 2))


def test_scale_tilde_examples():
    np.testing.assert_array_equal(scale_tilde(gen_flat(2, 2)).entries, np.full((2, 2), 0.5))
    np.testing.assert_array_equal(scale_tilde(gen_flat(3, 1)).entries, np.full((3, 1), 0.5))
    assert scale_tilde([[4.0]]).entries[0, 0] == pytest.approx(4 / math.sqrt(2), rel=1e-15)


def test_gen_flat_examples():
    np.testing.assert_array_equal(gen_flat(2, 2).entries, [[1, 1], [1, 1]])
    np.testing.assert_array_equal(gen_flat(3, 1).entries, [[1], [1], [1]])
    with pytest.raises(ShapeError):
        gen_flat(1, 2)


def test_gen_uniform_determinism_and_class():
    b = EntryBounds(0.5, 2)
    assert gen_uniform(4, 3, b, 11) == gen_uniform(4, 3, b, 11)
    assert validate_class(gen_uniform(4, 3, b, 11), b)
    assert gen_uniform(4, 3, EntryBounds(1, 1), 5) == gen_flat(4, 3)


def test_gen_rank_one_examples():
    assert gen_rank_one([1, 1], [1, 1]) == gen_flat(2, 2)
    np.testing.assert_array_equal(gen_rank_one([1, 2], [3]).entries, [[3], [6]])


@given(
    st.lists(st.floats(0.1, 10), min_size=1, max_size=6),
    st.lists(st.floats(0.1, 10), min_size=1, max_size=6),
)
def test_rank_one_entries_within_product_range(u, v):
    if len(v) > len(u):
        u, v = v, u
    lo, hi = gen_rank_one(u, v).entry_range()
    assert lo >= min(u) * min(v) * (1 - 1e-15)
    assert hi <= max(u) * max(v) * (1 + 1e-15)


def test_gen_sparse_column_examples():
    spec = SparseColumnSpec(0.25, 0.5, EntryBounds(1, 2))
    A = gen_sparse_column(8, spec, 3)
    assert A.shape == (8, 4)
    assert np.all((A.entries == 0).sum(axis=0) <= 2)
    dense = gen_sparse_column(8, SparseColumnSpec(0.0, 0.5, EntryBounds(1, 2)), 3)
    assert validate_class(dense, EntryBounds(1, 2))


@settings(max_examples=30)
@given(
    st.integers(5, 60),
    st.floats(0.0, 0.45),
    st.floats(0.05, 0.5),
    st.integers(0, 2**32),
)
def test_sparse_column_zero_count(n, gamma, theta, seed):
    if gamma + theta >= 1:
        return
    spec = SparseColumnSpec(gamma, theta, EntryBounds(1, 2))
    A = gen_sparse_column(n, spec, seed)
    assert A.m == math.ceil(theta * n)
    assert np.all((A.entries == 0).sum(axis=0) <= math.ceil(gamma * n))
    nz = A.entries[A.entries > 0]
    assert np.all((nz >= 1) & (nz <= 2))


def test_matrix_file_round_trip(tmp_path):
    A = gen_uniform(5, 3, EntryBounds(0.5, 2), 9)
    path = tmp_path / "a.txt"
    write_matrix(A, path)
    assert read_matrix(path) == A


@pytest.mark.parametrize(
    "text",
    [
        "",
        "2\n1 2\n",
        "2 2\n1 2\n",
        "2 2\n1 2\n3\n",
        "2 2\n1 x\n3 4\n",
        "2 2\n1 nan\n3 4\n",
        "2 2\n1 -2\n3 4\n",
        "2 3\n1 2 3\n4 5 6\n",
    ],
)
def test_read_matrix_rejects_malformed(tmp_path, text):
    path = tmp_path / "bad.txt"
    path.write_text(text)
    with pytest.raises(MatrixFormatError):
        read_matrix(path)


def test_read_matrix_missing_file(tmp_path):
    with pytest.raises(OSError):
        read_matrix(tmp_path / "missing.txt")
