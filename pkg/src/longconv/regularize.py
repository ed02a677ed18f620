"""Kernel regularizers, initializations and the regularized long-convolution layer."""

from __future__ import annotations

import json
from dataclasses import asdict, dataclass

import numpy as np

from .butterfly import ButterflyPlan, apply_plan, conv_butterfly
from .core import KernelBank, PlanError, SeededRng, ShapeError, SignalBatch, standard_normal_draws
from .dft_reference import conv_causal_naive, conv_circular_naive, dft_naive, idft_naive
from .three_pass import build_three_pass, conv_three_pass, default_split

ENGINES = ("naive", "butterfly", "three_pass")


@dataclass(frozen=True)
class RegularizationConfig:
    lam: float = 0.0
    smooth_width: int = 0
    dropout_rate: float = 0.0
    smooth_domain: str = "time"
    seed: int = 0
    training: bool = False

    def __post_init__(self):
        if self.lam < 0:
            raise ValueError("lambda must be >= 0")
        if self.smooth_width < 0:
            raise ValueError("smooth width must be >= 0")
        if not 0 <= self.dropout_rate < 1:
            raise ValueError("dropout rate must lie in [0, 1)")
        if self.smooth_domain not in ("time", "frequency"):
            raise ValueError("smooth_domain must be 'time' or 'frequency'")

    def to_json(self) -> str:
        return json.dumps(asdict(self), indent=2, sort_keys=True)

    @classmethod
    def from_json(cls, text: str) -> "RegularizationConfig":
        return cls(**json.loads(text))


@dataclass(frozen=True)
class InitConfig:
    kind: str = "random"
    heads: int = 1
    length: int = 1
    seed: int = 0

    def __post_init__(self):
        if self.kind not in ("random", "geometric"):
            raise ValueError("kind must be 'random' or 'geometric'")
        if self.heads < 1 or self.length < 1:
            raise ValueError("heads and length must be >= 1")

    def to_json(self) -> str:
        return json.dumps(asdict(self), indent=2, sort_keys=True)

    @classmethod
    def from_json(cls, text: str) -> "InitConfig":
        return cls(**json.loads(text))


def squash(k, lam: float) -> np.ndarray:
    """Soft threshold: ``sign(k) * max(|k| - lam, 0)``.

    This is the proximal map of ``lam * |x|`` under the ``(1/2)(x - k)^2``
    penalty; against an unhalved ``(x - k)^2`` the matching threshold is
    ``lam / 2``.
    """
    if lam < 0:
        raise ValueError("lambda must be >= 0")
    k = np.asarray(k, dtype=np.float64)
    return np.sign(k) * np.maximum(np.abs(k) - lam, 0.0)


def _window_mean(k: np.ndarray, p: int, wrap: bool = False) -> np.ndarray:
    # divisor stays 2p + 1 everywhere; edges are zero-padded or wrapped
    if p == 0:
        return k.copy()
    n = k.shape[-1]
    if wrap:
        idx = np.arange(-p, n + p) % n
        padded = k[..., idx]
    else:
        padded = np.zeros(k.shape[:-1] + (n + 2 * p,), dtype=k.dtype)
        padded[..., p: p + n] = k
    csum = np.cumsum(padded, axis=-1)
    csum = np.concatenate([np.zeros_like(csum[..., :1]), csum], axis=-1)
    return (csum[..., 2 * p + 1:] - csum[..., : n]) / (2 * p + 1)


def smooth(k, p: int) -> np.ndarray:
    """Centered moving average of width ``2p + 1`` along the last axis."""
    if p < 0:
        raise ValueError("p must be >= 0")
    return _window_mean(np.asarray(k, dtype=np.float64), int(p))


def smooth_frequency(k, p: int) -> np.ndarray:
    """The same moving average applied to the kernel's complex spectrum.

    The window wraps around the spectrum so conjugate symmetry survives and
    the result is exactly real.
    """
    if p < 0:
        raise ValueError("p must be >= 0")
    k = np.asarray(k, dtype=np.float64)
    if p == 0:
        return k.copy()
    try:
        plan = ButterflyPlan(k.shape[-1], 16)
    except PlanError:
        spectrum = _window_mean(dft_naive(k.astype(np.complex128)), int(p), wrap=True)
        return idft_naive(spectrum).real
    spectrum = _window_mean(apply_plan(plan, k), int(p), wrap=True)
    return apply_plan(plan, spectrum, "inverse").real


def kernel_dropout(k, rate: float, rng: SeededRng, training: bool = True) -> np.ndarray:
    """Inverted dropout on kernel entries; identity outside training."""
    if not 0 <= rate < 1:
        raise ValueError("rate must lie in [0, 1)")
    k = np.asarray(k, dtype=np.float64)
    if not training or rate == 0:
        return k.copy()
    keep = rng.uniform(k.size).reshape(k.shape) >= rate
    return np.where(keep, k / (1.0 - rate), 0.0)


def geometric_envelope(heads: int, length: int) -> np.ndarray:
    """``exp(-(k/N) * (H/2)**(h/H))`` for ``h < H``, ``k < N``."""
    h = np.arange(heads)[:, None]
    k = np.arange(length)[None, :]
    return np.exp(-(k / length) * (heads / 2.0) ** (h / heads))


def init_kernels(cfg: InitConfig) -> KernelBank:
    rng = SeededRng(cfg.seed)
    x = standard_normal_draws(rng, cfg.heads * cfg.length).reshape(cfg.heads, cfg.length)
    if cfg.kind == "geometric":
        x = x * geometric_envelope(cfg.heads, cfg.length)
    skip = standard_normal_draws(rng, cfg.heads)
    return KernelBank(x, skip)


def regularize_kernels(kernels, cfg: RegularizationConfig) -> np.ndarray:
    """Dropout, then smooth, then squash, one child stream per head for dropout."""
    kernels = np.atleast_2d(np.asarray(kernels, dtype=np.float64))
    rng = SeededRng(cfg.seed)
    out = np.empty_like(kernels)
    for h, k in enumerate(kernels):
        k = kernel_dropout(k, cfg.dropout_rate, rng.child(h), cfg.training)
        if cfg.smooth_domain == "frequency":
            k = smooth_frequency(k, cfg.smooth_width)
        else:
            k = smooth(k, cfg.smooth_width)
        out[h] = squash(k, cfg.lam)
    return out


def _pow2_at_least(n: int) -> int:
    return 1 << max(0, (n - 1).bit_length())


def convolve_head(u: np.ndarray, k: np.ndarray, engine: str, mode: str, r: int = 16) -> np.ndarray:
    """Convolve every row of ``u`` (shape ``(B, N)``) with the real kernel ``k``."""
    n = u.shape[-1]
    if engine == "naive":
        fn = conv_causal_naive if mode == "causal" else conv_circular_naive
        return np.stack([fn(row, k).real for row in u])
    if mode not in ("causal", "circular"):
        raise ValueError(f"mode must be 'circular' or 'causal', got {mode!r}")
    size = 2 * n if mode == "causal" else n
    if engine == "butterfly":
        if mode == "causal":
            # padding past 2N changes nothing after truncation and keeps the plan power-of-two
            size = _pow2_at_least(size)
            uu = np.zeros((u.shape[0], size))
            uu[:, :n] = u
            kk = np.zeros(size)
            kk[:n] = k
            plan = ButterflyPlan(size, r)
            return conv_butterfly(uu, kk, plan, "circular")[:, :n].real
        return conv_butterfly(u, k, ButterflyPlan(n, r), "circular").real
    if engine == "three_pass":
        if mode == "causal":
            size = _pow2_at_least(size)
        uu = np.zeros((u.shape[0], size))
        uu[:, :n] = u
        kk = np.zeros(size)
        kk[:n] = k
        l, m = default_split(size)
        plan = build_three_pass(kk, l, m, r)
        return conv_three_pass(plan, uu)[:, :n].real
    raise ValueError(f"engine must be one of {ENGINES}, got {engine!r}")


def regularized_long_conv(u: SignalBatch, bank: KernelBank, cfg: RegularizationConfig,
                          engine: str = "butterfly", mode: str = "causal",
                          executor=None) -> SignalBatch:
    """``y[b, h] = conv(u[b, h], regularized K_h) + skip_gain[h] * u[b, h]``.

    ``executor`` (anything with ``map``) spreads heads across workers; heads
    are independent so the result does not depend on it.
    """
    if not isinstance(u, SignalBatch):
        u = SignalBatch(u)
    if bank.heads != u.heads or bank.length != u.length:
        raise ShapeError(
            f"kernel bank is {bank.heads}x{bank.length}, input has H={u.heads}, N={u.length}"
        )
    kernels = regularize_kernels(bank.kernels, cfg)
    data = u.data

    def one(h):
        return convolve_head(data[:, h, :], kernels[h], engine, mode) + bank.skip_gain[h] * data[:, h, :]

    mapper = map if executor is None else executor.map
    heads = list(mapper(one, range(u.heads)))
    return SignalBatch(np.stack(heads, axis=1))
