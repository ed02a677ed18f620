"""Direct-summation oracles.

Everything here is O(N^2) on purpose. The fast paths elsewhere in the
package are accepted only when they agree with these functions.

Convention: the forward DFT is unnormalized with kernel exp(-2*pi*i*j*k/N);
the inverse carries the 1/N factor.
"""

from __future__ import annotations

import numpy as np

from .core import ShapeError, as_sequence

# rows of the dense matrix materialized at once, bounds memory at large N
_ROW_CHUNK = 512


def dft_matrix(n: int) -> np.ndarray:
    """Dense ``n x n`` DFT matrix with entry ``(j, k) = exp(-2*pi*i*j*k/n)``."""
    if n < 1:
        raise ValueError("n must be >= 1")
    jk = np.outer(np.arange(n), np.arange(n)) % n
    return np.exp(-2j * np.pi * jk / n)


def _dense_apply(x: np.ndarray, sign: float) -> np.ndarray:
    n = x.shape[-1]
    k = np.arange(n)
    out = np.empty(x.shape, dtype=np.complex128)
    for start in range(0, n, _ROW_CHUNK):
        rows = np.arange(start, min(start + _ROW_CHUNK, n))
        # reduce jk mod n before scaling so the phase stays accurate at large n
        block = np.exp(sign * 2j * np.pi * (np.outer(rows, k) % n) / n)
        out[..., rows] = x @ block.T
    return out


def dft_naive(x) -> np.ndarray:
    """``y_j = sum_k x_k exp(-2*pi*i*j*k/N)``.

    Accepts a 1-D sequence or a stack of sequences along the last axis.
    """
    x = np.asarray(x, dtype=np.complex128)
    if x.ndim == 1:
        as_sequence(x)
    return _dense_apply(x, -1.0)


def idft_naive(x) -> np.ndarray:
    """``y_j = (1/N) sum_k x_k exp(+2*pi*i*j*k/N)``."""
    x = np.asarray(x, dtype=np.complex128)
    if x.ndim == 1:
        as_sequence(x)
    return _dense_apply(x, 1.0) / x.shape[-1]


def _check_pair(u, k):
    u = as_sequence(u, "u")
    k = as_sequence(k, "k")
    if u.size != k.size:
        raise ShapeError(f"length mismatch: {u.size} vs {k.size}")
    return u, k


def conv_causal_naive(u, k) -> np.ndarray:
    """``y_i = sum_{j<=i} k_j u_{i-j}``, truncated to the input length."""
    u, k = _check_pair(u, k)
    # np.convolve is a direct O(N^2) sum, no transform involved
    return np.convolve(u, k)[: u.size]


def conv_circular_naive(u, k) -> np.ndarray:
    """``y_i = sum_j u_j k_{(i-j) mod N}``."""
    u, k = _check_pair(u, k)
    n = u.size
    full = np.convolve(u, k)
    y = full[:n].copy()
    y[: n - 1] += full[n:]
    return y
