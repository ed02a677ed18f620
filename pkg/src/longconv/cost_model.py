"""Analytical FLOP and pass-count models for the butterfly and three-pass paths.

FLOPs count dense block stages: an ``r``-block stage costs ``n * r`` complex
multiply-adds, and a hardware ``b x b`` unit charges blocks smaller than
``b`` as if they were ``b`` wide. Complex multiply-adds convert to real
flops with ``counts_complex_as`` (4 multiplies + 2 adds by default).

The unfused pass model is a comparative approximation: each transform side
of an out-of-core FFT needs ``ceil(log_w(n / w))`` extra sweeps when only
``w`` elements fit on chip.
"""

from __future__ import annotations

from dataclasses import dataclass

from .butterfly import stage_radices
from .core import PlanError

ALGORITHMS = ("fused", "three_pass", "unfused_fft")


@dataclass(frozen=True)
class CostModelConfig:
    matmul_unit: int = 16
    sram_elements: int = 8192
    counts_complex_as: float = 6.0

    def __post_init__(self):
        if self.matmul_unit < 1 or self.sram_elements < 1:
            raise ValueError("matmul_unit and sram_elements must be >= 1")


def stage_count(n: int, r: int) -> int:
    """Smallest ``s`` with ``r**s >= n``."""
    s, reach = 0, 1
    while reach < n:
        reach *= r
        s += 1
    return s


def butterfly_flops(n: int, r: int, cfg: CostModelConfig = CostModelConfig()):
    """``(theoretical_flops, effective_flops, stages)`` for an ``n``-point transform."""
    stage_radices(n, r)  # raises PlanError when no plan exists
    stages = stage_count(n, r)
    theoretical = cfg.counts_complex_as * n * r * stages
    effective = cfg.counts_complex_as * n * max(r, cfg.matmul_unit) * stages
    return theoretical, effective, stages


def _ceil_log(x: int, base: int) -> int:
    """Smallest ``e >= 0`` with ``base**e >= x``, in integer arithmetic."""
    if base < 2:
        return 0 if x <= 1 else x
    e, reach = 0, 1
    while reach < x:
        reach *= base
        e += 1
    return e


def pass_counts(n: int, algorithm: str, cfg: CostModelConfig = CostModelConfig()) -> int:
    if n < 1:
        raise ValueError("n must be >= 1")
    w = cfg.sram_elements
    if algorithm == "fused":
        if n > w:
            raise PlanError(f"n={n} exceeds working set of {w} elements")
        return 1
    if algorithm == "three_pass":
        return 3
    if algorithm == "unfused_fft":
        extra = 0 if n <= w else _ceil_log(-(-n // w), w)
        return 3 + 2 * extra
    raise ValueError(f"algorithm must be one of {ALGORITHMS}, got {algorithm!r}")
