"""Shared containers, errors and the seeded random stream."""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np


class ShapeError(ValueError):
    """Operands have incompatible lengths or dimensions."""


class PlanError(ValueError):
    """A transform size or factorization cannot be planned."""


class ConditioningError(ArithmeticError):
    """A linear solve is too ill-conditioned to trust."""


def as_sequence(x, name: str = "x") -> np.ndarray:
    """Return ``x`` as a 1-D complex128 array with at least one finite entry."""
    arr = np.asarray(x, dtype=np.complex128)
    if arr.ndim != 1:
        raise ShapeError(f"{name} must be 1-D, got shape {arr.shape}")
    if arr.size == 0:
        raise ShapeError(f"{name} must have length >= 1")
    if not np.all(np.isfinite(arr)):
        raise ValueError(f"{name} contains non-finite values")
    return arr


def max_abs_diff(a, b) -> float:
    """Largest complex modulus of ``a - b``."""
    a = np.asarray(a, dtype=np.complex128)
    b = np.asarray(b, dtype=np.complex128)
    if a.shape != b.shape:
        raise ShapeError(f"incompatible operands: {a.shape} vs {b.shape}")
    if a.size == 0:
        return 0.0
    return float(np.max(np.abs(a - b)))


@dataclass(frozen=True)
class SignalBatch:
    """Real input signals laid out as ``(batch, heads, length)``."""

    data: np.ndarray

    def __post_init__(self):
        data = np.ascontiguousarray(self.data, dtype=np.float64)
        if data.ndim != 3 or 0 in data.shape:
            raise ShapeError(f"SignalBatch needs a non-empty (B, H, N) array, got {data.shape}")
        if not np.all(np.isfinite(data)):
            raise ValueError("SignalBatch contains non-finite values")
        data.setflags(write=False)
        object.__setattr__(self, "data", data)

    @property
    def batch_size(self) -> int:
        return self.data.shape[0]

    @property
    def heads(self) -> int:
        return self.data.shape[1]

    @property
    def length(self) -> int:
        return self.data.shape[2]


@dataclass(frozen=True)
class KernelBank:
    """``H`` real kernels of length ``N`` plus one skip gain per head."""

    kernels: np.ndarray
    skip_gain: np.ndarray = field(default=None)

    def __post_init__(self):
        kernels = np.ascontiguousarray(self.kernels, dtype=np.float64)
        if kernels.ndim != 2 or 0 in kernels.shape:
            raise ShapeError(f"kernels must be a non-empty (H, N) array, got {kernels.shape}")
        skip = self.skip_gain
        skip = np.zeros(kernels.shape[0]) if skip is None else np.array(skip, dtype=np.float64)
        if skip.shape != (kernels.shape[0],):
            raise ShapeError(f"skip_gain must have shape ({kernels.shape[0]},), got {skip.shape}")
        if not (np.all(np.isfinite(kernels)) and np.all(np.isfinite(skip))):
            raise ValueError("KernelBank contains non-finite values")
        kernels.setflags(write=False)
        skip.setflags(write=False)
        object.__setattr__(self, "kernels", kernels)
        object.__setattr__(self, "skip_gain", skip)

    @property
    def heads(self) -> int:
        return self.kernels.shape[0]

    @property
    def length(self) -> int:
        return self.kernels.shape[1]


class SeededRng:
    """Reproducible random stream backed by the Philox4x64 counter generator.

    Uniform doubles come from :meth:`numpy.random.Generator.random`, whose
    bit layout is fixed across platforms. Normal draws use the Box-Muller
    transform on that uniform stream rather than numpy's ziggurat so the
    mapping from bits to values is spelled out here.

    Independent streams for parallel work are derived with :meth:`child`,
    which keys Philox with ``(seed, stream_id)``.
    """

    def __init__(self, seed: int, stream: int = 0):
        if not 0 <= seed < 2**64 or not 0 <= stream < 2**64:
            raise ValueError("seed and stream must fit in 64 unsigned bits")
        self.seed = int(seed)
        self.stream = int(stream)
        key = np.array([self.seed, self.stream], dtype=np.uint64)
        self._gen = np.random.Generator(np.random.Philox(key=key))

    def child(self, stream_id: int) -> "SeededRng":
        # stream 0 is the parent; children are offset so they never collide with it
        return SeededRng(self.seed, (self.stream * 1_000_003 + stream_id + 1) % 2**64)

    def uniform(self, shape) -> np.ndarray:
        """Doubles in ``[0, 1)``; ``shape`` is a count or a tuple."""
        return self._gen.random(shape)

    def standard_normal(self, shape) -> np.ndarray:
        count = int(np.prod(shape))
        return standard_normal_draws(self, count).reshape(shape)


def standard_normal_draws(rng: SeededRng, count: int) -> np.ndarray:
    """Box-Muller normals from ``rng``'s uniform stream."""
    if count < 1:
        raise ValueError("count must be >= 1")
    pairs = (count + 1) // 2
    u = rng.uniform(2 * pairs).reshape(pairs, 2)
    # 1 - u lies in (0, 1], so the log is finite
    radius = np.sqrt(-2.0 * np.log1p(-u[:, 0]))
    angle = 2.0 * math.pi * u[:, 1]
    z = np.empty(2 * pairs)
    z[0::2] = radius * np.cos(angle)
    z[1::2] = radius * np.sin(angle)
    return z[:count]
