"""Three-pass FFT convolution for ``n = l * m``.

The length-``n`` circular convolution is rewritten as

    y = conj(B) (I_m (x) F_l^{-1}) D' (I_m (x) F_l) conj(B)^{-1} u

where ``B`` is an ``n x n`` block matrix of ``m x m`` diagonal ``l x l``
blocks with ``B[j*l + t, k*l + t] = exp(-2*pi*i*k*(j*l + t)/n)`` and ``D'``
holds the kernel spectrum regrouped so block ``k`` sees bins ``k, k+m, ...``.
The outer block-butterfly products each touch every element once; the middle
is ``m`` independent length-``l`` FFT convolutions, each of which fits in a
working set of ``l`` elements.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field

import numpy as np

from .butterfly import ButterflyPlan, apply_plan
from .core import ConditioningError, PlanError, ShapeError, as_sequence
from .dft_reference import dft_matrix

DEFAULT_WORKING_SET = 8192
CONDITION_LIMIT = 1e12


@dataclass
class PassCounter:
    """Per-phase access counts over the length-``n`` global buffer.

    A batch is processed in lockstep, so counts are per sequence position.
    ``sweeps`` for a phase is the largest number of times any position was
    read or written in it.
    """

    working_set: int = DEFAULT_WORKING_SET
    n: int = 0
    reads: dict = field(default_factory=dict)
    writes: dict = field(default_factory=dict)
    peak_working_set: int = 0

    def reset(self, n: int):
        self.n = n
        self.reads = {}
        self.writes = {}
        self.peak_working_set = 0

    def _counts(self, table: dict, phase: int) -> np.ndarray:
        if phase not in (1, 2, 3):
            raise ValueError("phases are labeled 1..3")
        if phase not in table:
            table[phase] = np.zeros(self.n, dtype=np.int64)
        return table[phase]

    def read(self, phase: int, positions):
        np.add.at(self._counts(self.reads, phase), positions, 1)

    def write(self, phase: int, positions):
        np.add.at(self._counts(self.writes, phase), positions, 1)

    def tile(self, elements: int):
        self.peak_working_set = max(self.peak_working_set, int(elements))

    @property
    def phases(self) -> int:
        return len(set(self.reads) | set(self.writes))

    def phase_sweeps(self, phase: int) -> int:
        r = self.reads.get(phase)
        w = self.writes.get(phase)
        return int(max(0 if r is None else r.max(), 0 if w is None else w.max()))

    @property
    def sweeps(self) -> int:
        return sum(self.phase_sweeps(p) for p in sorted(set(self.reads) | set(self.writes)))

    def report(self) -> dict:
        return {
            "n": self.n,
            "working_set_cap": self.working_set,
            "peak_working_set": self.peak_working_set,
            "phases": [
                {
                    "phase": p,
                    "reads": int(self.reads[p].sum()) if p in self.reads else 0,
                    "writes": int(self.writes[p].sum()) if p in self.writes else 0,
                    "sweeps": self.phase_sweeps(p),
                }
                for p in sorted(set(self.reads) | set(self.writes))
            ],
            "sweeps": self.sweeps,
        }

    def to_json(self) -> str:
        return json.dumps(self.report(), indent=2)


class BlockDiagonalButterfly:
    """``m x m`` grid of diagonal ``l x l`` blocks, stored as ``blocks[j, k, t]``.

    Without explicit ``blocks`` the object is the canonical butterfly
    ``B[j*l + t, k*l + t] = exp(-2*pi*i*k*(j*l + t)/n)`` (or its conjugate or
    inverse, tracked by ``conjugated`` and ``inverted``). For fixed ``t`` that
    matrix is ``F_m diag(exp(-2*pi*i*k*t/n))``, so products run as length-``m``
    FFTs and the dense block array is only built when ``blocks`` is read.
    """

    def __init__(self, l: int, m: int, blocks: np.ndarray | None = None, r: int = 16,
                 conjugated: bool = False, inverted: bool = False):
        self.l, self.m = int(l), int(m)
        self.n = self.l * self.m
        self.r = int(r)
        self.structured = blocks is None
        self.conjugated = bool(conjugated) and self.structured
        self.inverted = bool(inverted) and self.structured
        self._blocks = None
        if blocks is not None:
            blocks = np.asarray(blocks, dtype=np.complex128)
            if blocks.shape != (self.m, self.m, self.l):
                raise ShapeError(f"blocks must be ({self.m}, {self.m}, {self.l}), got {blocks.shape}")
            self._blocks = blocks

    @property
    def blocks(self) -> np.ndarray:
        if self._blocks is None:
            j = np.arange(self.m)[:, None, None]
            k = np.arange(self.m)[None, :, None]
            t = np.arange(self.l)[None, None, :]
            if self.inverted:
                vals = np.exp(2j * np.pi * ((j * (k * self.l + t)) % self.n) / self.n) / self.m
            else:
                vals = np.exp(-2j * np.pi * ((k * (j * self.l + t)) % self.n) / self.n)
            self._blocks = np.conj(vals) if self.conjugated else vals
        return self._blocks

    def conj(self) -> "BlockDiagonalButterfly":
        if self.structured:
            return BlockDiagonalButterfly(self.l, self.m, None, self.r, not self.conjugated, self.inverted)
        return BlockDiagonalButterfly(self.l, self.m, np.conj(self.blocks), self.r)

    def to_dense(self) -> np.ndarray:
        dense = np.zeros((self.n, self.n), dtype=np.complex128)
        t = np.arange(self.l)
        for j in range(self.m):
            for k in range(self.m):
                dense[j * self.l + t, k * self.l + t] = self.blocks[j, k]
        return dense

    def _column_transform(self, cols: np.ndarray, t: np.ndarray) -> np.ndarray:
        """Canonical product on ``cols[..., t, k]`` for diagonal positions ``t``."""
        n, m = self.n, self.m
        tw = np.exp(-2j * np.pi * ((t[:, None] * np.arange(m)[None, :]) % n) / n)
        if self.conjugated:
            tw = np.conj(tw)
        # conjugation and inversion each flip the transform direction
        forward = self.inverted == self.conjugated
        if not self.inverted:
            return _dft_last(cols * tw, m, self.r, forward)
        return np.conj(tw) * _dft_last(cols, m, self.r, forward) / m

    def matvec(self, x: np.ndarray, counter: PassCounter | None = None, phase: int = 1) -> np.ndarray:
        """Tiled product along the last axis; each input is read once.

        A tile covers a run of diagonal positions ``t`` across all ``m``
        block columns, which is everything needed for the same positions in
        all ``m`` block rows.
        """
        x = np.asarray(x, dtype=np.complex128)
        if x.shape[-1] != self.n:
            raise ShapeError(f"expected length {self.n}, got {x.shape[-1]}")
        xs = x.reshape(*x.shape[:-1], self.m, self.l)
        out = np.empty_like(xs)
        cap = counter.working_set if counter is not None else DEFAULT_WORKING_SET
        width = max(1, min(self.l, cap // self.m))
        rows = np.arange(self.m)[:, None] * self.l
        for t0 in range(0, self.l, width):
            t1 = min(self.l, t0 + width)
            if self.structured:
                cols = np.swapaxes(xs[..., t0:t1], -1, -2)
                res = self._column_transform(cols, np.arange(t0, t1))
                out[..., t0:t1] = np.swapaxes(res, -1, -2)
            else:
                out[..., t0:t1] = np.einsum("jkt,...kt->...jt", self.blocks[:, :, t0:t1], xs[..., t0:t1])
            if counter is not None:
                positions = (rows + np.arange(t0, t1)).ravel()
                counter.read(phase, positions)
                counter.write(phase, positions)
                counter.tile(self.m * (t1 - t0))
        return out.reshape(x.shape)


def _dft_last(x: np.ndarray, m: int, r: int, forward: bool) -> np.ndarray:
    """Unnormalized DFT (or its conjugate-kernel counterpart) along the last axis."""
    try:
        plan = ButterflyPlan(m, r)
    except PlanError:
        f = dft_matrix(m)
        return x @ (f if forward else np.conj(f)).T
    if forward:
        return apply_plan(plan, x)
    return np.conj(apply_plan(plan, np.conj(x)))


def invert_block_butterfly(b: BlockDiagonalButterfly) -> BlockDiagonalButterfly:
    """Inverse in the same storage format.

    Fixing the diagonal position ``t`` picks out an ``m x m`` matrix
    ``b.blocks[:, :, t]``; the full matrix is a permutation of the direct sum
    of these, so inverting each one inverts ``b``. For the canonical
    butterfly each of those is ``F_m`` times a unit diagonal, whose inverse is
    known in closed form and has condition number 1.
    """
    if b.structured:
        return BlockDiagonalButterfly(b.l, b.m, None, b.r, b.conjugated, not b.inverted)
    inv = np.empty_like(b.blocks)
    for t in range(b.l):
        sub = b.blocks[:, :, t]
        cond = np.linalg.cond(sub)
        if not np.isfinite(cond) or cond > CONDITION_LIMIT:
            raise ConditioningError(
                f"sub-system at diagonal position {t} has condition number {cond:.3g}; "
                f"l={b.l}, m={b.m} is not a valid factorization"
            )
        inv[:, :, t] = np.linalg.inv(sub)
    return BlockDiagonalButterfly(b.l, b.m, inv, b.r)


class ThreePassPlan:
    """Precomputed block butterflies and regrouped kernel spectrum for one kernel."""

    def __init__(self, k, l: int, m: int, r: int = 16):
        k = as_sequence(k, "k")
        self.l, self.m = int(l), int(m)
        self.n = self.l * self.m
        if k.size != self.n:
            raise ShapeError(f"kernel length {k.size} != l*m = {self.n}")
        self.inner = ButterflyPlan(self.l, r) if self.l > 1 else ButterflyPlan(1, 2)
        spectrum = _dft_last(k, self.n, r, forward=True)
        # bin t*m + k of the full spectrum drives slot t of inner block k
        self.spectra = np.ascontiguousarray(spectrum.reshape(self.l, self.m).T)
        self.butterfly = BlockDiagonalButterfly(self.l, self.m, r=r)
        self.butterfly_inverse = invert_block_butterfly(self.butterfly)

    @property
    def diagonal(self) -> np.ndarray:
        """The middle diagonal as a flat length-``n`` vector."""
        return self.spectra.ravel()


def build_three_pass(k, l: int, m: int, r: int = 16) -> ThreePassPlan:
    return ThreePassPlan(k, l, m, r)


def default_split(n: int) -> tuple[int, int]:
    """``(l, m)`` with ``l`` the smallest divisor of ``n`` at least ``sqrt(n)``."""
    for l in range(int(np.ceil(np.sqrt(n))), n + 1):
        if n % l == 0:
            return l, n // l
    return n, 1


def conv_three_pass(plan: ThreePassPlan, u, counter: PassCounter | None = None,
                    order=None) -> np.ndarray:
    """Circular convolution of ``u`` (last axis) with the plan's kernel.

    ``order`` permutes the execution order of the ``m`` inner convolutions;
    the result does not depend on it.
    """
    u = np.asarray(u, dtype=np.complex128)
    if u.ndim == 1:
        as_sequence(u, "u")
    if u.shape[-1] != plan.n:
        raise ShapeError(f"plan covers length {plan.n}, input has {u.shape[-1]}")
    if counter is not None:
        counter.reset(plan.n)
    l, m = plan.l, plan.m

    # phase 1: conj(B)^{-1} u
    v = plan.butterfly_inverse.conj().matvec(u, counter, phase=1)

    # phase 2: m independent length-l FFT convolutions
    v = v.reshape(*v.shape[:-1], m, l)
    out = np.empty_like(v)
    order = range(m) if order is None else order
    seen = set()
    for blk in order:
        blk = int(blk)
        seen.add(blk)
        seg = v[..., blk, :]
        out[..., blk, :] = apply_plan(
            plan.inner, apply_plan(plan.inner, seg) * plan.spectra[blk], "inverse"
        )
        if counter is not None:
            positions = np.arange(blk * l, (blk + 1) * l)
            counter.read(2, positions)
            counter.write(2, positions)
            counter.tile(2 * l)
    if seen != set(range(m)):
        raise ValueError("order must be a permutation of range(m)")
    v = out.reshape(*out.shape[:-2], plan.n)

    # phase 3: conj(B) v
    return plan.butterfly.conj().matvec(v, counter, phase=3)


def _real_spectrum(x: np.ndarray, plan: ButterflyPlan) -> np.ndarray:
    """All ``2L`` DFT bins of real ``x`` from one complex length-``L`` transform."""
    half = plan.n
    z = apply_plan(plan, x[..., 0::2] + 1j * x[..., 1::2])
    mirrored = np.conj(z[..., (-np.arange(half)) % half])
    even = 0.5 * (z + mirrored)
    odd = -0.5j * (z - mirrored)
    w = np.exp(-1j * np.pi * np.arange(half) / half)
    return np.concatenate([even + w * odd, even - w * odd], axis=-1)


def _real_inverse(spectrum: np.ndarray, plan: ButterflyPlan) -> np.ndarray:
    half = plan.n
    w = np.exp(1j * np.pi * np.arange(half) / half)
    even = 0.5 * (spectrum[..., :half] + spectrum[..., half:])
    odd = 0.5 * (spectrum[..., :half] - spectrum[..., half:]) * w
    z = apply_plan(plan, even + 1j * odd, "inverse")
    y = np.empty(z.shape[:-1] + (2 * half,))
    y[..., 0::2] = z.real
    y[..., 1::2] = z.imag
    return y


def conv_real_packed(u, k, mode: str = "circular", r: int = 16) -> np.ndarray:
    """Real convolution of even length ``2L`` through complex length-``L`` transforms.

    Adjacent pairs ``(x[2t], x[2t+1])`` are packed as one complex value; the
    full real spectrum is recovered from the half-length transform with a
    twiddle, multiplied, and unpacked the same way on the way back.
    """
    u = np.asarray(u, dtype=np.float64)
    k = np.asarray(k, dtype=np.float64)
    n = u.shape[-1]
    if k.shape[-1] != n:
        raise ShapeError(f"length mismatch: {n} vs {k.shape[-1]}")
    if n % 2:
        raise ShapeError(f"packed convolution needs an even length, got {n}")
    if not (np.all(np.isfinite(u)) and np.all(np.isfinite(k))):
        raise ValueError("inputs contain non-finite values")
    if mode == "causal":
        size = 2 * n
        u = np.concatenate([u, np.zeros_like(u)], axis=-1)
        k = np.concatenate([k, np.zeros_like(k)], axis=-1)
    elif mode == "circular":
        size = n
    else:
        raise ValueError(f"mode must be 'circular' or 'causal', got {mode!r}")
    plan = ButterflyPlan(size // 2, r)
    y = _real_inverse(_real_spectrum(u, plan) * _real_spectrum(k, plan), plan)
    return y[..., :n]
