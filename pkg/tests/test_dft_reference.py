import numpy as np
import pytest
from hypothesis import given, strategies as st
from hypothesis.extra.numpy import arrays

from longconv.core import ShapeError
from longconv.dft_reference import (
    conv_causal_naive,
    conv_circular_naive,
    dft_matrix,
    dft_naive,
    idft_naive,
)

from conftest import cplx

finite = st.floats(-1e3, 1e3, allow_nan=False)


def test_dft_small_example():
    assert np.allclose(dft_naive([1, 2, 3, 4]), [10, -2 + 2j, -2, -2 - 2j], atol=1e-12)


def test_dft_matrix_is_scaled_unitary():
    f = dft_matrix(12)
    assert np.allclose(f @ f.conj().T, 12 * np.eye(12), atol=1e-10)


def test_chunked_dense_matches_matrix(rng):
    x = cplx(rng, 1100)
    assert np.max(np.abs(dft_naive(x) - dft_matrix(1100) @ x)) < 1e-8


def test_stacked_inputs(rng):
    x = cplx(rng, 3, 16)
    assert np.allclose(dft_naive(x), np.stack([dft_naive(r) for r in x]))


@given(arrays(np.float64, st.integers(1, 40), elements=finite))
def test_inverse_roundtrip(x):
    assert np.max(np.abs(idft_naive(dft_naive(x)) - x)) <= 1e-9 * (1 + np.max(np.abs(x)))


@given(st.integers(1, 32), st.integers(0, 2**32 - 1))
def test_parseval(n, seed):
    x = cplx(np.random.default_rng(seed), n)
    lhs = np.sum(np.abs(dft_naive(x)) ** 2)
    assert abs(lhs - n * np.sum(np.abs(x) ** 2)) <= 1e-10 * lhs


@given(st.integers(1, 32), st.integers(0, 2**32 - 1))
def test_convolution_theorem(n, seed):
    g = np.random.default_rng(seed)
    u, k = cplx(g, n), cplx(g, n)
    via_dft = idft_naive(dft_naive(u) * dft_naive(k))
    assert np.max(np.abs(conv_circular_naive(u, k) - via_dft)) < 1e-9 * n


def test_causal_matches_explicit_sum(rng):
    u, k = cplx(rng, 9), cplx(rng, 9)
    ref = [sum(k[j] * u[i - j] for j in range(i + 1)) for i in range(9)]
    assert np.allclose(conv_causal_naive(u, k), ref)


def test_circular_wraps():
    assert np.allclose(conv_circular_naive([0, 0, 1], [0, 1, 0]), [1, 0, 0])


def test_length_mismatch():
    with pytest.raises(ShapeError):
        conv_causal_naive([1, 2], [1, 2, 3])
