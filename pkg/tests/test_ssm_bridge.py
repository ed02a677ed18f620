import warnings

import numpy as np
import pytest
from hypothesis import given, strategies as st

from longconv.core import ConditioningError, ShapeError
from longconv.ssm_bridge import (
    DiagonalSsm,
    VandermondeSystem,
    kernel_to_ssm,
    roots_of_unity,
    ssm_to_kernel,
    ssms_to_kernel,
    vandermonde_solve,
)

from conftest import cplx


def test_kernel_formula():
    ssm = DiagonalSsm([0.5, -1.0], [2.0, 1.0])
    assert np.allclose(ssm_to_kernel(ssm, 4), [3, 0, 1.5, -0.75])


def test_roots_of_unity_give_dft_system():
    sys = VandermondeSystem(roots_of_unity(8))
    assert np.allclose(sys.matrix(), np.fft.fft(np.eye(8)))


@given(st.sampled_from([4, 6, 8, 12, 16, 32, 64]), st.integers(0, 2**32 - 1))
def test_roundtrip_every_partition(n, seed):
    k = cplx(np.random.default_rng(seed), n)
    for m in [d for d in range(1, n + 1) if n % d == 0]:
        ssms = kernel_to_ssm(k, m)
        assert len(ssms) == n // m and all(s.state_size == m for s in ssms)
        assert np.max(np.abs(ssms_to_kernel(ssms, n) - k)) <= 1e-7 * np.abs(k).max()


def test_partition_must_divide():
    with pytest.raises(ShapeError):
        kernel_to_ssm(np.ones(8), 3)


def test_duplicate_nodes_rejected():
    with pytest.raises(ValueError):
        VandermondeSystem([1.0, 0.5, 1.0])


def test_real_nodes_warn_and_fail_conditioning():
    with pytest.warns(RuntimeWarning):
        sys = VandermondeSystem(np.linspace(0.1, 1.0, 40))
    with pytest.raises(ConditioningError):
        vandermonde_solve(sys, np.ones(40))


def test_custom_nodes(rng):
    k = cplx(rng, 8)
    nodes = 0.9 * np.exp(2j * np.pi * (np.arange(8) + 0.3) / 8)
    with warnings.catch_warnings():
        warnings.simplefilter("error")
        assert np.allclose(ssms_to_kernel(kernel_to_ssm(k, 2, nodes), 8), k)


def test_add_is_superposition(rng):
    s1 = DiagonalSsm(0.5 * cplx(rng, 3), cplx(rng, 3))
    s2 = DiagonalSsm(0.5 * cplx(rng, 2), cplx(rng, 2))
    both = s1 + s2
    assert both.state_size == 5
    assert np.allclose(ssm_to_kernel(both, 16), ssm_to_kernel(s1, 16) + ssm_to_kernel(s2, 16))


def test_json_roundtrip(rng):
    s = DiagonalSsm(cplx(rng, 4), cplx(rng, 4))
    t = DiagonalSsm.from_json(s.to_json())
    assert np.array_equal(s.a, t.a) and np.array_equal(s.b, t.b)


def test_validation():
    with pytest.raises(ShapeError):
        DiagonalSsm([1, 2], [1])
    with pytest.raises(ValueError):
        ssm_to_kernel(DiagonalSsm([1], [1]), 0)
