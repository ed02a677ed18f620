import numpy as np
import pytest
from hypothesis import given, strategies as st

from longconv.core import ConditioningError, ShapeError
from longconv.dft_reference import conv_causal_naive, conv_circular_naive
from longconv.three_pass import (
    BlockDiagonalButterfly,
    PassCounter,
    ThreePassPlan,
    build_three_pass,
    conv_real_packed,
    conv_three_pass,
    default_split,
    invert_block_butterfly,
)

from conftest import cplx


def _tol(n, u, k):
    return 1e-9 * np.sqrt(n) * (1 + np.abs(u).max()) * (1 + np.abs(k).max())


@pytest.mark.parametrize("l,m", [(1, 1), (4, 1), (1, 4), (2, 2), (4, 2), (2, 4), (8, 8), (3, 5), (16, 4), (6, 10), (1, 1024)])
def test_matches_circular_oracle(l, m, rng):
    n = l * m
    u, k = cplx(rng, n), cplx(rng, n)
    y = conv_three_pass(build_three_pass(k, l, m), u)
    assert np.max(np.abs(y - conv_circular_naive(u, k))) < _tol(n, u, k)


def test_m_one_diagonal_is_plain_spectrum(rng):
    k = cplx(rng, 16)
    plan = build_three_pass(k, 16, 1)
    assert np.allclose(plan.diagonal, np.fft.fft(k))


def test_block_butterfly_dense_inverse():
    b = BlockDiagonalButterfly(3, 4)
    inv = invert_block_butterfly(b)
    assert np.allclose(inv.to_dense() @ b.to_dense(), np.eye(12), atol=1e-10)


def test_block_butterfly_matvec_matches_dense(rng):
    b = BlockDiagonalButterfly(4, 3)
    x = cplx(rng, 12)
    assert np.allclose(b.matvec(x), b.to_dense() @ x)
    assert np.allclose(b.conj().matvec(x), b.to_dense().conj() @ x)


@pytest.mark.parametrize("l,m", [(3, 5), (4, 4), (1, 6), (5, 1)])
def test_structured_matches_explicit_blocks(l, m, rng):
    canon = BlockDiagonalButterfly(l, m)
    explicit = BlockDiagonalButterfly(l, m, canon.blocks.copy())
    x = cplx(rng, l * m)
    pairs = [
        (canon, explicit),
        (canon.conj(), explicit.conj()),
        (invert_block_butterfly(canon), invert_block_butterfly(explicit)),
        (invert_block_butterfly(canon).conj(), invert_block_butterfly(explicit).conj()),
    ]
    for fast, slow in pairs:
        assert fast.structured and not slow.structured
        assert np.max(np.abs(fast.matvec(x) - slow.matvec(x))) < 1e-12
        assert np.max(np.abs(fast.matvec(x) - fast.to_dense() @ x)) < 1e-12


def test_canonical_entries_unit_modulus():
    b = BlockDiagonalButterfly(4, 8)
    assert np.allclose(np.abs(b.blocks), 1)
    assert np.allclose(b.blocks[:, 0, :], 1)  # k = 0 column


def test_m_one_inverse_is_conjugate():
    b = BlockDiagonalButterfly(6, 1)
    assert np.allclose(invert_block_butterfly(b).blocks, np.conj(b.blocks))


def test_roundtrip_n64(rng):
    b = BlockDiagonalButterfly(8, 8)
    x = cplx(rng, 64)
    assert np.max(np.abs(invert_block_butterfly(b).matvec(b.matvec(x)) - x)) < 1e-10


def test_prime_m_uses_dense_transform(rng):
    n, l, m = 34, 2, 17
    u, k = cplx(rng, n), cplx(rng, n)
    y = conv_three_pass(build_three_pass(k, l, m), u)
    assert np.max(np.abs(y - conv_circular_naive(u, k))) < _tol(n, u, k)


def test_singular_block_raises():
    blocks = np.ones((2, 2, 3), dtype=complex)
    with pytest.raises(ConditioningError):
        invert_block_butterfly(BlockDiagonalButterfly(3, 2, blocks))


def test_length_checks(rng):
    with pytest.raises(ShapeError):
        ThreePassPlan(np.ones(10), 3, 3)
    plan = build_three_pass(np.ones(9), 3, 3)
    with pytest.raises(ShapeError):
        conv_three_pass(plan, np.ones(8))
    with pytest.raises(ValueError):
        conv_three_pass(plan, np.ones(9), order=[0, 0, 1])


@pytest.mark.parametrize("n", [16, 256, 4096])
def test_at_most_three_sweeps(n, rng):
    l, m = default_split(n)
    counter = PassCounter()
    conv_three_pass(build_three_pass(cplx(rng, n), l, m), cplx(rng, n), counter)
    assert counter.sweeps <= 3
    assert counter.phases == 3
    assert all(counter.phase_sweeps(p) == 1 for p in (1, 2, 3))
    assert counter.peak_working_set <= counter.working_set
    rep = counter.report()
    assert rep["sweeps"] == counter.sweeps
    assert all(ph["reads"] == n and ph["writes"] == n for ph in rep["phases"])


def test_working_set_respected_with_small_cap(rng):
    n, l, m = 1024, 32, 32
    counter = PassCounter(working_set=128)
    conv_three_pass(build_three_pass(cplx(rng, n), l, m), cplx(rng, n), counter)
    assert counter.peak_working_set <= 128
    assert counter.sweeps == 3


def test_counter_rejects_unknown_phase():
    c = PassCounter()
    c.reset(4)
    with pytest.raises(ValueError):
        c.read(4, [0])


def test_phase_two_order_is_irrelevant(rng):
    plan = build_three_pass(cplx(rng, 64), 8, 8)
    u = cplx(rng, 64)
    perm = np.random.default_rng(5).permutation(8)
    assert np.array_equal(conv_three_pass(plan, u), conv_three_pass(plan, u, order=perm))


def test_batched_input(rng):
    k = cplx(rng, 32)
    u = cplx(rng, 3, 2, 32)
    plan = build_three_pass(k, 8, 4)
    y = conv_three_pass(plan, u)
    assert np.allclose(y[1, 0], conv_circular_naive(u[1, 0], k))


def test_small_example_n8():
    u = np.arange(1, 9, dtype=float)
    k = np.array([1, 1, 0, 0, 0, 0, 0, 0], dtype=float)
    y = conv_three_pass(build_three_pass(k, 4, 2), u)
    assert np.max(np.abs(y - conv_circular_naive(u, k))) < 1e-10


def test_delta_kernel_identity(rng):
    k = np.zeros(32)
    k[0] = 1
    plan = build_three_pass(k, 4, 8)
    for _ in range(10):
        u = cplx(rng, 32)
        assert np.max(np.abs(conv_three_pass(plan, u) - u)) < 1e-12


def test_default_split():
    assert default_split(16384) == (128, 128)
    assert default_split(32) == (8, 4)
    assert default_split(7) == (7, 1)


@given(st.integers(1, 64), st.sampled_from(["circular", "causal"]), st.integers(0, 2**32 - 1))
def test_real_packing_matches_oracle(half, mode, seed):
    g = np.random.default_rng(seed)
    n = 2 * half
    u, k = g.standard_normal(n), g.standard_normal(n)
    oracle = conv_causal_naive if mode == "causal" else conv_circular_naive
    try:
        y = conv_real_packed(u, k, mode)
    except ValueError as exc:  # PlanError for large prime half-lengths
        assert "prime" in str(exc)
        return
    assert np.max(np.abs(y - oracle(u, k).real)) < _tol(n, u, k)


def test_real_packing_odd_length():
    with pytest.raises(ShapeError):
        conv_real_packed(np.ones(7), np.ones(7))
