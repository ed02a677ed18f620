"""Diagonal SSMs <-> convolution kernels.

A diagonal SSM with poles ``a_j`` and (output-folded) weights ``b_j``
unrolls to the kernel ``K_i = sum_j b_j a_j**i`` for ``i = 0, 1, ...``.
Going the other way, any length-``N`` kernel is hit exactly by ``N``
distinct poles with weights from a Vandermonde solve, and the ``N`` pairs can
be split into ``N/M`` diagonal SSMs of state size ``M``.
"""

from __future__ import annotations

import json
import warnings
from dataclasses import dataclass

import numpy as np

from .core import ConditioningError, ShapeError, as_sequence

CONDITION_LIMIT = 1e12


@dataclass(frozen=True)
class DiagonalSsm:
    a: np.ndarray
    b: np.ndarray

    def __post_init__(self):
        a = np.atleast_1d(np.asarray(self.a, dtype=np.complex128))
        b = np.atleast_1d(np.asarray(self.b, dtype=np.complex128))
        if a.ndim != 1 or a.shape != b.shape or a.size == 0:
            raise ShapeError(f"a and b must be equal-length 1-D arrays, got {a.shape} and {b.shape}")
        if not (np.all(np.isfinite(a)) and np.all(np.isfinite(b))):
            raise ValueError("SSM parameters must be finite")
        object.__setattr__(self, "a", a)
        object.__setattr__(self, "b", b)

    @property
    def state_size(self) -> int:
        return self.a.size

    def __add__(self, other: "DiagonalSsm") -> "DiagonalSsm":
        """Parallel composition: the state spaces are concatenated."""
        return DiagonalSsm(np.concatenate([self.a, other.a]), np.concatenate([self.b, other.b]))

    def to_dict(self) -> dict:
        return {
            "a": [[float(z.real), float(z.imag)] for z in self.a],
            "b": [[float(z.real), float(z.imag)] for z in self.b],
        }

    @classmethod
    def from_dict(cls, d: dict) -> "DiagonalSsm":
        def pairs(v):
            arr = np.asarray(v, dtype=np.float64).reshape(-1, 2)
            return arr[:, 0] + 1j * arr[:, 1]
        return cls(pairs(d["a"]), pairs(d["b"]))

    def to_json(self) -> str:
        return json.dumps(self.to_dict())

    @classmethod
    def from_json(cls, text: str) -> "DiagonalSsm":
        return cls.from_dict(json.loads(text))


def ssm_to_kernel(ssm: DiagonalSsm, n: int) -> np.ndarray:
    """``K_i = sum_j b_j * a_j**i`` for ``i < n``."""
    if n < 1:
        raise ValueError("n must be >= 1")
    powers = np.ones((n, ssm.state_size), dtype=np.complex128)
    for i in range(1, n):
        powers[i] = powers[i - 1] * ssm.a
    return powers @ ssm.b


def roots_of_unity(n: int) -> np.ndarray:
    """Default poles ``exp(-2*pi*i*j/n)``; the system matrix is then the DFT matrix."""
    return np.exp(-2j * np.pi * np.arange(n) / n)


class VandermondeSystem:
    """``V[i, j] = nodes[j] ** i``, i.e. the transposed Vandermonde matrix."""

    def __init__(self, nodes):
        nodes = as_sequence(nodes, "nodes")
        n = nodes.size
        if n > 1:
            gaps = np.abs(nodes[:, None] - nodes[None, :])
            gaps[np.diag_indices(n)] = np.inf
            if gaps.min() <= 1e-9:
                raise ValueError("Vandermonde nodes must be pairwise distinct")
        if n > 16 and np.all(np.abs(nodes.imag) == 0):
            warnings.warn(
                f"real Vandermonde nodes are badly conditioned at N={n}; prefer roots of unity",
                RuntimeWarning,
                stacklevel=2,
            )
        self.nodes = nodes

    @property
    def n(self) -> int:
        return self.nodes.size

    def matrix(self) -> np.ndarray:
        return self.nodes[None, :] ** np.arange(self.n)[:, None]


def vandermonde_solve(sys: VandermondeSystem, rhs) -> np.ndarray:
    """Weights ``b`` with ``V @ b == rhs`` via LU with partial pivoting."""
    rhs = as_sequence(rhs, "rhs")
    if rhs.size != sys.n:
        raise ShapeError(f"rhs has length {rhs.size}, system has {sys.n} nodes")
    v = sys.matrix()
    cond = np.linalg.cond(v)
    if not np.isfinite(cond) or cond > CONDITION_LIMIT:
        raise ConditioningError(f"Vandermonde condition number {cond:.3g} is too large")
    b = np.linalg.solve(v, rhs)
    residual = np.max(np.abs(v @ b - rhs))
    if residual > 1e-8 * (1 + np.max(np.abs(rhs))):
        raise ConditioningError(f"Vandermonde residual {residual:.3g} exceeds tolerance")
    return b


def kernel_to_ssm(k, m: int, nodes=None) -> list[DiagonalSsm]:
    """Split ``k`` into ``len(k) // m`` diagonal SSMs of state size ``m``.

    Pole ``g*m + j`` and its weight go to SSM ``g``; summing the
    materialized kernels of the returned SSMs gives back ``k``.
    """
    k = as_sequence(k, "k")
    n = k.size
    if m < 1 or n % m:
        raise ShapeError(f"partition size {m} must divide kernel length {n}")
    nodes = roots_of_unity(n) if nodes is None else nodes
    sys = VandermondeSystem(nodes)
    if sys.n != n:
        raise ShapeError(f"need {n} nodes, got {sys.n}")
    b = vandermonde_solve(sys, k)
    return [DiagonalSsm(sys.nodes[g * m:(g + 1) * m], b[g * m:(g + 1) * m]) for g in range(n // m)]


def ssms_to_kernel(ssms, n: int) -> np.ndarray:
    """Sum of the materialized kernels of several SSMs."""
    total = np.zeros(n, dtype=np.complex128)
    for s in ssms:
        total += ssm_to_kernel(s, n)
    return total
