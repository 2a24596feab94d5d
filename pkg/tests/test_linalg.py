import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from antilop.linalg import OpCounter, as_matrix, as_vector, frobenius_norm, gram, masked_matvec, matvec
from antilop.mmio import read_matrix, read_vector, write_matrix, write_vector


def test_gram_identity():
    np.testing.assert_array_equal(gram(np.eye(2)), np.eye(2))


def test_gram_hand_product():
    np.testing.assert_array_equal(gram([[1.0, 1.0], [0.0, 1.0]]), [[1.0, 1.0], [1.0, 2.0]])


def test_gram_zero_column():
    A = np.array([[1.0, 0.0, 2.0], [3.0, 0.0, 4.0]])
    H = gram(A)
    assert np.all(H[1] == 0) and np.all(H[:, 1] == 0)


def test_gram_diagonal_is_squared_column_length(rng):
    A = rng.standard_normal((7, 4))
    np.testing.assert_allclose(np.diag(gram(A)), np.sum(A**2, axis=0), rtol=1e-14)


def test_gram_rejects_vectors():
    with pytest.raises(ValueError):
        gram(np.ones(3))


finite = st.floats(min_value=-1e3, max_value=1e3, allow_nan=False)


@settings(max_examples=60, deadline=None)
@given(arrays(np.float64, st.tuples(st.integers(1, 8), st.integers(1, 6)), elements=finite), st.integers(0, 2**32 - 1))
def test_gram_symmetric_and_psd(A, seed):
    H = gram(A)
    assert np.array_equal(H, H.T)
    v = np.random.default_rng(seed).standard_normal(H.shape[0])
    assert v @ H @ v >= -1e-10 * (v @ v) * max(frobenius_norm(H), 1.0)


def test_matvec_examples():
    np.testing.assert_array_equal(matvec(np.eye(2), np.array([3.0, 4.0])), [3.0, 4.0])
    np.testing.assert_array_equal(matvec(np.array([[1.0, 1.0], [1.0, 2.0]]), np.array([1.0, 0.0])), [1.0, 1.0])
    np.testing.assert_array_equal(matvec(np.ones((3, 2)), np.zeros(2)), np.zeros(3))
    with pytest.raises(ValueError):
        matvec(np.eye(2), np.ones(3))


def test_masked_matvec_examples():
    M = np.array([[1.0, 1.0], [1.0, 2.0]])
    np.testing.assert_array_equal(masked_matvec(M, np.array([0.0, 2.0]), [1]), [2.0, 4.0])
    np.testing.assert_array_equal(masked_matvec(M, np.zeros(2), []), [0.0, 0.0])


def test_masked_matvec_full_mask_is_bitwise_matvec(rng):
    M = as_matrix(rng.standard_normal((50, 50)))
    v = rng.standard_normal(50)
    assert np.array_equal(masked_matvec(M, v, np.arange(50)), matvec(M, v))


def test_masked_matvec_matches_dense_on_support(rng):
    M = rng.standard_normal((20, 30))
    mask = np.sort(rng.choice(30, 7, replace=False))
    v = np.zeros(30)
    v[mask] = rng.standard_normal(7)
    np.testing.assert_allclose(masked_matvec(M, v, mask), M @ v, rtol=1e-13, atol=1e-13)


def test_masked_matvec_counts_only_masked_columns(rng):
    M = rng.standard_normal((40, 40))
    counter = OpCounter()
    masked_matvec(M, rng.standard_normal(40), [3, 9, 11], counter)
    assert counter.multiplies == 40 * 3


def test_masked_matvec_out_of_range():
    with pytest.raises(IndexError):
        masked_matvec(np.eye(2), np.ones(2), [2])


def test_frobenius_examples():
    assert frobenius_norm(np.eye(2)) == pytest.approx(math.sqrt(2), rel=1e-15)
    assert frobenius_norm(np.ones((2, 2))) == 2.0
    assert frobenius_norm(np.array([[1.0, 0.1], [0.1, 9.0]])) == pytest.approx(math.sqrt(82.02), rel=1e-15)


def test_frobenius_is_not_spectral(rng):
    # the entrywise norm bounds the largest eigenvalue from above
    A = rng.standard_normal((9, 5))
    H = gram(A)
    assert frobenius_norm(H) >= np.linalg.eigvalsh(H).max()


@pytest.mark.parametrize("bad", [[[1.0, np.nan]], [[np.inf]]])
def test_non_finite_rejected(bad):
    with pytest.raises(ValueError):
        as_matrix(bad)
    with pytest.raises(ValueError):
        as_vector(np.ravel(bad))


@pytest.mark.parametrize("ext", [".mtx", ".csv"])
def test_matrix_round_trip_is_exact(tmp_path, rng, ext):
    M = rng.standard_normal((6, 4)) * 10.0 ** rng.uniform(-8, 8, (6, 4))
    path = tmp_path / f"m{ext}"
    write_matrix(path, M)
    assert np.array_equal(read_matrix(path), M)


@pytest.mark.parametrize("ext", [".mtx", ".csv"])
def test_vector_round_trip_is_exact(tmp_path, rng, ext):
    v = rng.standard_normal(9) / 3.0
    path = tmp_path / f"v{ext}"
    write_vector(path, v)
    assert np.array_equal(read_vector(path), v)


def test_matrix_market_header(tmp_path):
    path = tmp_path / "m.mtx"
    write_matrix(path, np.array([[1.0, 2.0], [3.0, 4.0]]), comment="hello")
    lines = path.read_text().splitlines()
    assert lines[0] == "%%MatrixMarket matrix array real general"
    assert lines[1] == "%hello"
