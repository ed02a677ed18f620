"""Constant-recursive kernels.

Each of ``d`` components starts from ``p`` seed values and then follows a
delayed recurrence (1-based):

    K[i, r] = seeds[i, r]                                       for i <= p
    K[i, r] = sum_{j=1}^{min(p, i-p)} coefs[j, r] * K[i-p-j+1, r]  otherwise

so entries ``p+1 .. 2p`` depend only on the seeds and a whole block of ``p``
can be produced at once. The kernel is the sum over components. Public
functions take and return 0-based arrays; the 1-based form above is used
only inside the loops.
"""

from __future__ import annotations

import json
from dataclasses import dataclass

import numpy as np

from .core import ShapeError, as_sequence
from .ssm_bridge import DiagonalSsm


@dataclass(frozen=True)
class ConstantRecursiveKernel:
    """``seeds`` and ``coefs`` are ``(p, d)`` arrays; ``length`` is the kernel length."""

    seeds: np.ndarray
    coefs: np.ndarray
    length: int

    def __post_init__(self):
        seeds = np.asarray(self.seeds, dtype=np.complex128)
        coefs = np.asarray(self.coefs, dtype=np.complex128)
        if seeds.ndim == 1:
            seeds = seeds[:, None]
        if coefs.ndim == 1:
            coefs = coefs[:, None]
        if seeds.shape != coefs.shape or seeds.size == 0:
            raise ShapeError(f"seeds {seeds.shape} and coefs {coefs.shape} must both be (p, d)")
        if self.length < 1:
            raise ValueError("length must be >= 1")
        object.__setattr__(self, "seeds", seeds)
        object.__setattr__(self, "coefs", coefs)

    @property
    def power(self) -> int:
        return self.seeds.shape[0]

    @property
    def dim(self) -> int:
        return self.seeds.shape[1]

    def component(self, r: int) -> "ConstantRecursiveKernel":
        return ConstantRecursiveKernel(self.seeds[:, r], self.coefs[:, r], self.length)

    def to_dict(self) -> dict:
        def enc(arr):
            return [[[float(z.real), float(z.imag)] for z in row] for row in arr]
        return {"length": self.length, "seeds": enc(self.seeds), "coefs": enc(self.coefs)}

    @classmethod
    def from_dict(cls, d: dict) -> "ConstantRecursiveKernel":
        def dec(v):
            arr = np.asarray(v, dtype=np.float64)
            return arr[..., 0] + 1j * arr[..., 1]
        return cls(dec(d["seeds"]), dec(d["coefs"]), int(d["length"]))

    def to_json(self) -> str:
        return json.dumps(self.to_dict())

    @classmethod
    def from_json(cls, text: str) -> "ConstantRecursiveKernel":
        return cls.from_dict(json.loads(text))


def materialize(crk: ConstantRecursiveKernel) -> np.ndarray:
    p, n = crk.power, crk.length
    # 1-based rows; row 0 unused
    comp = np.zeros((n + 1, crk.dim), dtype=np.complex128)
    top = min(p, n)
    comp[1: top + 1] = crk.seeds[:top]
    for i in range(p + 1, n + 1):
        for j in range(1, min(p, i - p) + 1):
            comp[i] += crk.coefs[j - 1] * comp[i - p - j + 1]
    return comp[1:].sum(axis=1)


def conv_recurrent(crk: ConstantRecursiveKernel, u) -> np.ndarray:
    """Causal convolution of ``u`` with a single-component kernel, computed recurrently.

    The output obeys the kernel's own recurrence plus a finite input term:

        y[i] = sum_{j=1}^{min(i, p)} k[j] u[i-j+1] + sum_{j=1}^{min(p, i-p)} a[j] y[i-p-j+1]

    (1-based), so the kernel is never materialized and the cost is ``O(N p)``.
    """
    if crk.dim != 1:
        raise ShapeError("conv_recurrent needs d == 1; use conv_recurrent_sum for d > 1")
    u = as_sequence(u, "u")
    n, p = u.size, crk.power
    k = crk.seeds[:, 0]
    a = crk.coefs[:, 0]
    uu = np.concatenate([[0], u])
    y = np.zeros(n + 1, dtype=np.complex128)
    for i in range(1, n + 1):
        acc = 0j
        for j in range(1, min(i, p) + 1):
            acc += k[j - 1] * uu[i - j + 1]
        for j in range(1, min(p, i - p) + 1):
            acc += a[j - 1] * y[i - p - j + 1]
        y[i] = acc
    return y[1:]


def conv_recurrent_sum(crk: ConstantRecursiveKernel, u) -> np.ndarray:
    """Per-component recurrent passes summed in component order."""
    out = np.zeros(len(u), dtype=np.complex128)
    for r in range(crk.dim):
        out += conv_recurrent(crk.component(r), u)
    return out


def companion_matrix(a) -> np.ndarray:
    """``p x p`` matrix with ones on the superdiagonal and ``a`` in the last row."""
    a = as_sequence(a, "a")
    p = a.size
    mat = np.zeros((p, p), dtype=np.complex128)
    mat[np.arange(p - 1), np.arange(1, p)] = 1.0
    mat[-1] = a
    return mat


def companion_kernel(a, k, n: int) -> np.ndarray:
    """``e_1^T A^(i-1) k`` for ``i = 1..n`` with ``A = companion_matrix(a)``."""
    a = as_sequence(a, "a")
    k = as_sequence(k, "k")
    if a.size != k.size:
        raise ShapeError(f"coefficients ({a.size}) and seeds ({k.size}) differ in length")
    if n < 1:
        raise ValueError("n must be >= 1")
    # A v shifts v up by one and appends a . v
    v = k.copy()
    out = np.empty(n, dtype=np.complex128)
    for i in range(n):
        out[i] = v[0]
        v = np.concatenate([v[1:], [a @ v]])
    return out


def s4d_case(crk: ConstantRecursiveKernel) -> DiagonalSsm:
    """Power-1 kernels are diagonal SSMs with poles ``coefs[0]`` and weights ``seeds[0]``."""
    if crk.power != 1:
        raise ShapeError(f"s4d_case needs p == 1, got p = {crk.power}")
    return DiagonalSsm(crk.coefs[0], crk.seeds[0])
