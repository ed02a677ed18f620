"""Butterfly (four-step) decomposition of the DFT and FFT convolution on top of it.

An ``n``-point DFT with ``n = n1 * n2`` is computed as ``n2`` dense
``n1``-point DFTs on stride-``n2`` slices, a twiddle diagonal, and an
``n2``-point transform of each result, followed by a transpose. Recursing on
``n2`` with block size ``r`` gives ``ceil(log_r n)`` dense stages of
``r x r`` blocks. The output lands in mixed-radix digit-reversed order and is
gathered back once at the end.

:class:`LearnedButterfly` keeps the permutation/twiddle scaffold fixed and
replaces each stage's DFT block by a trainable matrix shared across the
blocks of that stage.
"""

from __future__ import annotations

import json
from dataclasses import dataclass

import numpy as np

from .core import PlanError, ShapeError, as_sequence
from .dft_reference import dft_matrix


@dataclass(frozen=True)
class StridePermutation:
    """Reshape-and-transpose permutation for ``n = n1 * n2``.

    ``apply`` reads the input as an ``n2 x n1`` row-major matrix and returns
    its transpose flattened, so element ``j2*n1 + j1`` moves to
    ``j1*n2 + j2``. This is the orientation under which
    ``F_n = P (I_n2 (x) F_n1) P^T D (I_n1 (x) F_n2) P`` holds exactly.
    """

    n1: int
    n2: int

    @property
    def n(self) -> int:
        return self.n1 * self.n2

    @property
    def mapping(self) -> np.ndarray:
        """Gather indices: ``apply(x) == x[mapping]``."""
        return np.arange(self.n).reshape(self.n2, self.n1).T.ravel()

    def apply(self, x: np.ndarray) -> np.ndarray:
        return np.asarray(x)[..., self.mapping]

    def apply_inverse(self, x: np.ndarray) -> np.ndarray:
        x = np.asarray(x)
        out = np.empty_like(x)
        out[..., self.mapping] = x
        return out

    def matrix(self) -> np.ndarray:
        m = np.zeros((self.n, self.n))
        m[np.arange(self.n), self.mapping] = 1.0
        return m


def twiddle_grid(n: int, rows: int, cols: int) -> np.ndarray:
    """``rows x cols`` grid with entry ``(j, k) = exp(-2*pi*i*j*k/n)``."""
    jk = np.outer(np.arange(rows), np.arange(cols)) % n
    return np.exp(-2j * np.pi * jk / n)


@dataclass(frozen=True)
class TwiddleDiagonal:
    """Twiddle factors of an ``n1 x n2`` split, flattened row-major."""

    n1: int
    n2: int

    @property
    def n(self) -> int:
        return self.n1 * self.n2

    @property
    def diagonal(self) -> np.ndarray:
        return twiddle_grid(self.n, self.n1, self.n2).ravel()


def factorization_matrices(n: int, n1: int) -> dict:
    """Dense factors of one four-step split, for verification at small ``n``.

    Returns ``P``, ``D``, ``left = I_n2 (x) F_n1`` and ``right = I_n1 (x) F_n2``
    such that ``P @ left @ P.T @ D @ right @ P == dft_matrix(n)``.
    """
    if n1 < 1 or n % n1:
        raise PlanError(f"{n1} does not divide {n}")
    n2 = n // n1
    perm = StridePermutation(n1, n2)
    return {
        "P": perm.matrix(),
        "D": np.diag(TwiddleDiagonal(n1, n2).diagonal),
        "left": np.kron(np.eye(n2), dft_matrix(n1)),
        "right": np.kron(np.eye(n1), dft_matrix(n2)),
    }


@dataclass(frozen=True)
class Stage:
    """One dense block stage on sub-transforms of length ``length``."""

    length: int
    radix: int

    @property
    def rest(self) -> int:
        return self.length // self.radix

    @property
    def twiddle(self) -> np.ndarray:
        return twiddle_grid(self.length, self.radix, self.rest)

    def dense_cost(self, n: int) -> int:
        """Complex multiply-adds of this stage over the full length-``n`` vector."""
        return (n // self.radix) * self.radix**2


def _largest_divisor_at_most(n: int, cap: int) -> int:
    for d in range(min(n, cap), 1, -1):
        if n % d == 0:
            return d
    return 1


def stage_radices(n: int, r: int) -> list[int]:
    """Greedy block sizes for an ``n``-point transform with block cap ``r``."""
    if n < 1:
        raise PlanError("n must be >= 1")
    if r < 2:
        raise PlanError("block size r must be >= 2")
    radices = []
    length = n
    while length > 1:
        d = _largest_divisor_at_most(length, r)
        if d == 1:
            raise PlanError(
                f"n={n} has a prime factor {length} larger than r={r}; "
                "zero-pad the input to a power of two"
            )
        radices.append(d)
        length //= d
    return radices


class ButterflyPlan:
    """Precomputed stage list for an ``n``-point DFT with block size ``r``."""

    def __init__(self, n: int, r: int):
        self.n = int(n)
        self.r = int(r)
        self.radices = tuple(stage_radices(self.n, self.r))
        stages = []
        length = self.n
        for radix in self.radices:
            stages.append(Stage(length, radix))
            length //= radix
        self.stages = tuple(stages)
        self._twiddles = tuple(s.twiddle for s in self.stages)
        self._dft_blocks = tuple(dft_matrix(q) for q in self.radices)
        if self.radices:
            order = np.arange(self.n).reshape(self.radices)
            order = order.transpose(tuple(reversed(range(len(self.radices)))))
            self.output_order = order.ravel()
        else:
            self.output_order = np.zeros(1, dtype=np.intp)
        self.inverse_order = np.argsort(self.output_order)

    def __repr__(self):
        return f"ButterflyPlan(n={self.n}, r={self.r}, radices={self.radices})"

    @property
    def num_stages(self) -> int:
        return len(self.stages)

    def describe(self) -> dict:
        return {
            "n": self.n,
            "r": self.r,
            "stages": [
                {"length": s.length, "factor": s.radix, "blocks": s.rest,
                 "dense_cost": s.dense_cost(self.n)}
                for s in self.stages
            ],
        }

    def to_json(self) -> str:
        return json.dumps(self.describe(), indent=2)

    def run(self, x: np.ndarray, blocks=None) -> np.ndarray:
        """Forward transform along the last axis using ``blocks`` per stage.

        ``blocks[s]`` is either ``(radix, radix)`` or ``(H, radix, radix)``;
        the latter applies a different block per head, with heads on axis -2
        of ``x``.
        """
        blocks = self._dft_blocks if blocks is None else blocks
        out, _ = _run_stages(self, np.asarray(x, dtype=np.complex128), blocks, keep=False)
        return out


def build_plan(n: int, r: int) -> ButterflyPlan:
    return ButterflyPlan(n, r)


def _run_stages(plan: ButterflyPlan, x: np.ndarray, blocks, keep: bool):
    n = plan.n
    if x.shape[-1] != n:
        raise ShapeError(f"expected length {n}, got {x.shape[-1]}")
    lead = x.shape[:-1]
    z = x.reshape(*lead, 1, n)
    saved = []
    groups, length = 1, n
    for stage, tw, w in zip(plan.stages, plan._twiddles, blocks):
        z = z.reshape(*lead, groups, stage.radix, stage.rest)
        if keep:
            saved.append(z)
        w = np.asarray(w)
        if w.ndim == 3:
            w = w[:, None]  # (H, 1, r, r) broadcasts over the group axis
        z = np.matmul(w, z) * tw
        groups *= stage.radix
        length = stage.rest
        z = z.reshape(*lead, groups, length)
    z = z.reshape(*lead, n)
    return z[..., plan.output_order], saved


def apply_plan(plan: ButterflyPlan, x, direction: str = "forward") -> np.ndarray:
    """Forward DFT or its inverse (with the ``1/n`` factor) along the last axis."""
    x = np.asarray(x, dtype=np.complex128)
    if x.shape[-1] != plan.n:
        raise ShapeError(f"plan covers length {plan.n}, input has {x.shape[-1]}")
    if direction == "forward":
        return plan.run(x)
    if direction == "inverse":
        return np.conj(plan.run(np.conj(x))) / plan.n
    raise ValueError(f"direction must be 'forward' or 'inverse', got {direction!r}")


def conv_butterfly(u, k, plan: ButterflyPlan, mode: str = "circular") -> np.ndarray:
    """FFT convolution of ``u`` with ``k`` using ``plan`` for every transform.

    ``u`` may carry leading batch axes; ``k`` broadcasts against it. For
    ``mode="causal"`` the plan must cover twice the input length.
    """
    u = np.asarray(u, dtype=np.complex128)
    k = np.asarray(k, dtype=np.complex128)
    if u.ndim == 1:
        as_sequence(u, "u")
        as_sequence(k, "k")
    n = u.shape[-1]
    if k.shape[-1] != n:
        raise ShapeError(f"length mismatch: {n} vs {k.shape[-1]}")
    if mode == "circular":
        size = n
    elif mode == "causal":
        size = 2 * n
    else:
        raise ValueError(f"mode must be 'circular' or 'causal', got {mode!r}")
    if plan.n != size:
        raise ShapeError(f"{mode} convolution of length {n} needs a plan of size {size}, got {plan.n}")
    if size != n:
        u = _zero_pad(u, size)
        k = _zero_pad(k, size)
    y = apply_plan(plan, apply_plan(plan, u) * apply_plan(plan, k), "inverse")
    return y[..., :n]


def _zero_pad(x: np.ndarray, size: int) -> np.ndarray:
    out = np.zeros(x.shape[:-1] + (size,), dtype=x.dtype)
    out[..., : x.shape[-1]] = x
    return out


class LearnedButterfly:
    """Butterfly scaffold with one trainable ``r_s x r_s`` block per stage and head.

    ``blocks[s]`` has shape ``(heads, r_s, r_s)``. Inputs to
    :func:`learned_forward` are ``(n,)`` when ``heads == 1`` or
    ``(..., heads, n)``.
    """

    def __init__(self, plan: ButterflyPlan, blocks):
        self.plan = plan
        blocks = [np.array(b, dtype=np.complex128) for b in blocks]
        if len(blocks) != plan.num_stages:
            raise ShapeError(f"need {plan.num_stages} stage blocks, got {len(blocks)}")
        heads = {b.shape[0] for b in blocks if b.ndim == 3}
        if len(heads) != 1 or any(b.ndim != 3 for b in blocks):
            raise ShapeError("every stage block must be (heads, r, r) with a common head count")
        for b, q in zip(blocks, plan.radices):
            if b.shape[1:] != (q, q):
                raise ShapeError(f"stage block must be {q}x{q}, got {b.shape[1:]}")
        self.blocks = blocks
        self.heads = heads.pop()

    @classmethod
    def from_plan(cls, plan: ButterflyPlan, heads: int = 1) -> "LearnedButterfly":
        """DFT-initialized operator; reproduces ``apply_plan(plan, ., "forward")``."""
        return cls(plan, [np.broadcast_to(dft_matrix(q), (heads, q, q)) for q in plan.radices])

    @classmethod
    def random(cls, plan: ButterflyPlan, rng, heads: int = 1) -> "LearnedButterfly":
        blocks = []
        for q in plan.radices:
            draws = rng.standard_normal(2 * heads * q * q).reshape(2, heads, q, q)
            blocks.append((draws[0] + 1j * draws[1]) / np.sqrt(2 * q))
        return cls(plan, blocks)

    @property
    def parameter_count(self) -> int:
        """Complex parameters per head."""
        return sum(q * q for q in self.plan.radices)

    def _prepare(self, x) -> tuple[np.ndarray, bool]:
        x = np.asarray(x, dtype=np.complex128)
        squeeze = False
        if x.ndim == 1:
            if self.heads != 1:
                raise ShapeError("1-D input needs a single-head operator")
            x = x[None]
            squeeze = True
        if x.shape[-1] != self.plan.n or x.shape[-2] != self.heads:
            raise ShapeError(f"expected (..., {self.heads}, {self.plan.n}), got {x.shape}")
        return x, squeeze

    def materialize(self, head: int = 0) -> np.ndarray:
        """Dense ``n x n`` matrix of one head's operator."""
        eye = np.eye(self.plan.n, dtype=np.complex128)
        single = LearnedButterfly(self.plan, [b[head: head + 1] for b in self.blocks])
        return learned_forward(single, eye[:, None, :])[:, 0, :].T


def learned_forward(lb: LearnedButterfly, x) -> np.ndarray:
    x, squeeze = lb._prepare(x)
    y, _ = _run_stages(lb.plan, x, lb.blocks, keep=False)
    return y[0] if squeeze else y


def learned_gradients(lb: LearnedButterfly, x, upstream):
    """Adjoints of ``L = Re <upstream, learned_forward(lb, x)>``.

    Gradients use the ``dL/dRe + i dL/dIm`` convention, so the input gradient
    is the conjugate-transposed operator applied to ``upstream`` and each
    block gradient is a sum of outer products ``g conj(x)^T`` over the
    positions that share the block.

    Returns ``(block_grads, x_grad)`` where ``block_grads[s]`` matches
    ``lb.blocks[s]``.
    """
    x, squeeze = lb._prepare(x)
    g, _ = lb._prepare(upstream)
    if g.shape != x.shape:
        raise ShapeError(f"upstream shape {g.shape} differs from input shape {x.shape}")
    plan = lb.plan
    _, saved = _run_stages(plan, x, lb.blocks, keep=True)
    lead = x.shape[:-1]
    g = g[..., plan.inverse_order]
    block_grads = [None] * plan.num_stages
    for s in reversed(range(plan.num_stages)):
        stage = plan.stages[s]
        stage_in = saved[s]
        groups = stage_in.shape[-3]
        g = g.reshape(*lead, groups, stage.radix, stage.rest) * np.conj(plan._twiddles[s])
        # lead is (..., heads); sum over everything except heads and the block indices
        gw = np.einsum("...hgcm,...hgam->...hca", g, np.conj(stage_in))
        block_grads[s] = gw.reshape(-1, *gw.shape[-3:]).sum(axis=0)
        w_adj = np.conj(np.swapaxes(lb.blocks[s], -1, -2))[:, None]
        g = np.matmul(w_adj, g).reshape(*lead, plan.n)
    x_grad = g.reshape(*lead, plan.n)
    return block_grads, (x_grad[0] if squeeze else x_grad)
