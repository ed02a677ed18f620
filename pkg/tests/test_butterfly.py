import json

import numpy as np
import pytest
from hypothesis import given, strategies as st

from longconv.butterfly import (
    ButterflyPlan,
    LearnedButterfly,
    StridePermutation,
    TwiddleDiagonal,
    apply_plan,
    conv_butterfly,
    factorization_matrices,
    learned_forward,
    learned_gradients,
    stage_radices,
)
from longconv.core import PlanError, SeededRng, ShapeError
from longconv.dft_reference import conv_causal_naive, conv_circular_naive, dft_matrix, dft_naive

from conftest import cplx


def test_stride_permutation_example():
    # n1=2, n2=3: read as 3x2, transpose
    assert list(StridePermutation(2, 3).mapping) == [0, 2, 4, 1, 3, 5]


@given(st.integers(1, 12), st.integers(1, 12))
def test_stride_permutation_inverse(n1, n2):
    p = StridePermutation(n1, n2)
    x = np.arange(p.n)
    assert np.array_equal(p.apply_inverse(p.apply(x)), x)
    assert np.array_equal(p.matrix() @ x, p.apply(x))


def test_twiddles_have_unit_modulus():
    assert np.allclose(np.abs(TwiddleDiagonal(8, 4).diagonal), 1)


@pytest.mark.parametrize("n,n1", [(4, 2), (6, 2), (6, 3), (12, 4), (16, 4), (15, 5), (8, 1)])
def test_four_step_factorization_exact(n, n1):
    f = factorization_matrices(n, n1)
    dense = f["P"] @ f["left"] @ f["P"].T @ f["D"] @ f["right"] @ f["P"]
    assert np.max(np.abs(dense - dft_matrix(n))) < 1e-12


def test_factorization_rejects_non_divisor():
    with pytest.raises(PlanError):
        factorization_matrices(12, 5)


@pytest.mark.parametrize("n,r,expected", [
    (4096, 16, [16, 16, 16]),
    (4096, 2, [2] * 12),
    (96, 8, [8, 6, 2]),
    (1, 4, []),
])
def test_stage_radices(n, r, expected):
    assert stage_radices(n, r) == expected


def test_prime_factor_above_r_is_rejected():
    with pytest.raises(PlanError, match="zero-pad"):
        ButterflyPlan(4099, 16)
    with pytest.raises(PlanError):
        ButterflyPlan(8, 1)


def test_plan_description_is_json():
    desc = json.loads(ButterflyPlan(64, 4).to_json())
    assert [s["factor"] for s in desc["stages"]] == [4, 4, 4]


@pytest.mark.parametrize("n", [1, 2, 6, 30, 64, 96, 210, 1024])
@pytest.mark.parametrize("r", [2, 3, 5, 8, 16])
def test_forward_matches_dense(n, r, rng):
    largest_prime = max([q for q in range(2, n + 1) if n % q == 0 and all(q % d for d in range(2, q))], default=1)
    if largest_prime > r:
        with pytest.raises(PlanError):
            ButterflyPlan(n, r)
        return
    plan = ButterflyPlan(n, r)
    x = cplx(rng, n)
    assert np.max(np.abs(apply_plan(plan, x) - dft_naive(x))) < 1e-9 * np.sqrt(n) * (1 + np.abs(x).max())
    assert np.max(np.abs(apply_plan(plan, apply_plan(plan, x), "inverse") - x)) < 1e-10 * (1 + np.abs(x).max())


def test_batched_transform(rng):
    plan = ButterflyPlan(32, 4)
    x = cplx(rng, 2, 3, 32)
    assert np.allclose(apply_plan(plan, x), dft_naive(x))


def test_bad_direction_and_length():
    plan = ButterflyPlan(8, 2)
    with pytest.raises(ValueError):
        apply_plan(plan, np.zeros(8), "sideways")
    with pytest.raises(ShapeError):
        apply_plan(plan, np.zeros(9))


@given(st.sampled_from([2, 4, 8, 16, 32, 64]), st.sampled_from([2, 4, 16]), st.integers(0, 2**32 - 1))
def test_conv_matches_oracle(n, r, seed):
    g = np.random.default_rng(seed)
    u, k = cplx(g, n), cplx(g, n)
    tol = 1e-9 * np.sqrt(n) * (1 + np.abs(u).max()) * (1 + np.abs(k).max())
    assert np.max(np.abs(conv_butterfly(u, k, ButterflyPlan(n, r)) - conv_circular_naive(u, k))) < tol
    causal = conv_butterfly(u, k, ButterflyPlan(2 * n, r), "causal")
    assert np.max(np.abs(causal - conv_causal_naive(u, k))) < tol


def test_conv_plan_size_checked():
    with pytest.raises(ShapeError):
        conv_butterfly(np.ones(8), np.ones(8), ButterflyPlan(8, 2), "causal")
    with pytest.raises(ValueError):
        conv_butterfly(np.ones(8), np.ones(8), ButterflyPlan(8, 2), "wrapped")


def test_delta_kernel_is_identity(rng):
    u = cplx(rng, 64)
    k = np.zeros(64)
    k[0] = 1
    assert np.max(np.abs(conv_butterfly(u, k, ButterflyPlan(64, 8)) - u)) < 1e-13


def test_learned_at_init_reproduces_plan(rng):
    plan = ButterflyPlan(64, 4)
    lb = LearnedButterfly.from_plan(plan)
    assert lb.parameter_count == 3 * 16
    for _ in range(10):
        x = cplx(rng, 64)
        assert np.max(np.abs(learned_forward(lb, x) - apply_plan(plan, x))) < 1e-12


def test_learned_heads_are_independent(rng):
    plan = ButterflyPlan(16, 4)
    lb = LearnedButterfly.random(plan, SeededRng(3), heads=2)
    x = cplx(rng, 5, 2, 16)
    y = learned_forward(lb, x)
    for h in range(2):
        assert np.allclose(y[:, h], x[:, h] @ lb.materialize(h).T)


def test_learned_block_shape_checked():
    plan = ButterflyPlan(16, 4)
    with pytest.raises(ShapeError):
        LearnedButterfly(plan, [np.eye(4)[None]])
    with pytest.raises(ShapeError):
        LearnedButterfly(plan, [np.eye(3)[None], np.eye(4)[None]])


def _loss(lb, x, g):
    return np.real(np.vdot(g, learned_forward(lb, x)))


@pytest.mark.parametrize("n,r", [(8, 2), (16, 4), (12, 3), (32, 8)])
def test_gradients_match_finite_differences(n, r):
    rng = SeededRng(n * 100 + r)
    plan = ButterflyPlan(n, r)
    lb = LearnedButterfly.random(plan, rng)
    g = np.random.default_rng(n)
    x, up = cplx(g, n), cplx(g, n)
    block_grads, x_grad = learned_gradients(lb, x, up)
    h = 1e-5
    for s, blk in enumerate(lb.blocks):
        num = np.zeros_like(blk)
        for idx in np.ndindex(blk.shape):
            for unit in (1, 1j):
                plus = [b.copy() for b in lb.blocks]
                minus = [b.copy() for b in lb.blocks]
                plus[s][idx] += h * unit
                minus[s][idx] -= h * unit
                d = (_loss(LearnedButterfly(plan, plus), x, up) - _loss(LearnedButterfly(plan, minus), x, up)) / (2 * h)
                num[idx] += d * unit
        rel = np.linalg.norm(num - block_grads[s]) / np.linalg.norm(num)
        assert rel < 1e-6
    num_x = np.zeros(n, dtype=complex)
    for i in range(n):
        for unit in (1, 1j):
            e = np.zeros(n, dtype=complex)
            e[i] = h * unit
            num_x[i] += unit * (_loss(lb, x + e, up) - _loss(lb, x - e, up)) / (2 * h)
    assert np.linalg.norm(num_x - x_grad) / np.linalg.norm(num_x) < 1e-6


def test_input_gradient_is_adjoint(rng):
    plan = ButterflyPlan(16, 4)
    lb = LearnedButterfly.random(plan, SeededRng(9))
    x, up = cplx(rng, 16), cplx(rng, 16)
    _, x_grad = learned_gradients(lb, x, up)
    assert np.allclose(x_grad, lb.materialize().conj().T @ up)
