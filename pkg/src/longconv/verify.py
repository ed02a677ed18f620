"""Oracle suites run by ``longconv verify``.

Each check returns a :class:`Check`; a suite is a list of them. All inputs
come from fixed seeds so a report is reproducible line for line.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .butterfly import (
    ButterflyPlan,
    LearnedButterfly,
    apply_plan,
    conv_butterfly,
    learned_forward,
    learned_gradients,
    stage_radices,
)
from .core import KernelBank, PlanError, SeededRng, SignalBatch
from .cost_model import CostModelConfig, butterfly_flops, pass_counts
from .dft_reference import conv_causal_naive, conv_circular_naive, dft_naive, idft_naive
from .recursive import (
    ConstantRecursiveKernel,
    companion_kernel,
    companion_matrix,
    conv_recurrent,
    materialize,
    s4d_case,
)
from .regularize import ENGINES, RegularizationConfig, regularized_long_conv, smooth, squash
from .ssm_bridge import DiagonalSsm, kernel_to_ssm, ssm_to_kernel, ssms_to_kernel
from .three_pass import PassCounter, build_three_pass, conv_three_pass, conv_real_packed

SUITES = ("fft", "butterfly", "three_pass", "regularize", "ssm", "recursive")


@dataclass
class Check:
    name: str
    passed: bool
    error: float
    tolerance: float

    def line(self) -> str:
        status = "PASS" if self.passed else "FAIL"
        return f"{status}  {self.name}  err={self.error:.1e}  tol={self.tolerance:.1e}"

    def to_dict(self) -> dict:
        return {"name": self.name, "passed": self.passed,
                "error": float(f"{self.error:.1e}"), "tolerance": self.tolerance}


def _check(name, error, tol) -> Check:
    error = float(error)
    return Check(name, bool(error <= tol), error, float(tol))


def _cplx(rng: SeededRng, shape) -> np.ndarray:
    size = int(np.prod(shape))
    z = rng.standard_normal(2 * size)
    return (z[:size] + 1j * z[size:]).reshape(shape)


def _pow2_upto(lo: int, hi: int) -> list[int]:
    out, n = [], lo
    while n <= hi:
        out.append(n)
        n *= 2
    return out


def suite_fft(max_n: int) -> list[Check]:
    rng = SeededRng(101)
    checks = []
    sizes = [n for n in (1, 4, 16, 64, 256, 1024) if n <= max_n]
    x = np.array([1, 2, 3, 4], dtype=complex)
    checks.append(_check("dft [1,2,3,4]", np.max(np.abs(dft_naive(x) - [10, -2 + 2j, -2, -2 - 2j])), 1e-12))
    for n in sizes:
        v = _cplx(rng, (n,))
        energy = np.sum(np.abs(dft_naive(v)) ** 2)
        checks.append(_check(f"parseval n={n}", abs(energy - n * np.sum(np.abs(v) ** 2)) / energy, 1e-10))
        w = _cplx(rng, (n,))
        alpha, beta = _cplx(rng, (2,))
        lin = dft_naive(alpha * v + beta * w) - alpha * dft_naive(v) - beta * dft_naive(w)
        checks.append(_check(f"linearity n={n}", np.max(np.abs(lin)), 1e-9 * np.sqrt(n)))
        theorem = idft_naive(dft_naive(v) * dft_naive(w)) - conv_circular_naive(v, w)
        checks.append(_check(f"conv theorem n={n}", np.max(np.abs(theorem)), 1e-10 * max(1, np.sqrt(n))))
        checks.append(_check(f"inverse roundtrip n={n}", np.max(np.abs(idft_naive(dft_naive(v)) - v)), 1e-12 * n))
    return checks


def suite_butterfly(max_n: int) -> list[Check]:
    rng = SeededRng(202)
    checks = []
    for n in [n for n in (4, 8, 16, 64, 256, 1024, 4096) if n <= max_n]:
        dense_tol = 1e-9 * np.sqrt(n)
        x = _cplx(rng, (4, n))
        ref = dft_naive(x)
        outputs = {}
        u, k = _cplx(rng, (n,)), _cplx(rng, (n,))
        scale = (1 + np.max(np.abs(u))) * (1 + np.max(np.abs(k)))
        naive_circ, naive_causal = conv_circular_naive(u, k), conv_causal_naive(u, k)
        for r in (2, 4, 8, 16, 32):
            plan = ButterflyPlan(n, r)
            fx = apply_plan(plan, x)
            checks.append(_check(f"factorization n={n} r={r}", np.max(np.abs(fx - ref)), dense_tol))
            ratio = np.sum(np.abs(fx) ** 2) / (n * np.sum(np.abs(x) ** 2))
            checks.append(_check(f"unitarity n={n} r={r}", abs(ratio - 1), 1e-9))
            outputs[r] = conv_butterfly(u, k, plan, "circular")
            checks.append(_check(f"conv circular n={n} r={r}",
                                 np.max(np.abs(outputs[r] - naive_circ)), 1e-9 * np.sqrt(n) * scale))
            causal = conv_butterfly(u, k, ButterflyPlan(2 * n, r), "causal")
            checks.append(_check(f"conv causal n={n} r={r}",
                                 np.max(np.abs(causal - naive_causal)), 1e-9 * np.sqrt(n) * scale))
        spread = max(np.max(np.abs(outputs[a] - outputs[2])) for a in outputs)
        checks.append(_check(f"block-size invariance n={n}", spread, 2e-9 * np.sqrt(n) * scale))

    n = min(64, max(4, max_n))
    plan = ButterflyPlan(n, 4)
    lb = LearnedButterfly.from_plan(plan)
    xs = _cplx(rng, (100, 1, n))
    diff = np.max(np.abs(learned_forward(lb, xs)[:, 0] - apply_plan(plan, xs[:, 0])))
    checks.append(_check(f"learned-at-init n={n}", diff, 1e-12))

    lb = LearnedButterfly.random(ButterflyPlan(16, 4), rng)
    x, y = _cplx(rng, (16,)), _cplx(rng, (16,))
    _, adj = learned_gradients(lb, x, y)
    lhs = np.vdot(learned_forward(lb, x), y)
    rhs = np.vdot(x, adj)
    checks.append(_check("adjoint inner product n=16", abs(lhs - rhs) / abs(lhs), 1e-10))
    checks.append(_check("learned gradient finite difference n=8 r=2", _fd_gradient_error(rng), 1e-6))

    cfg = CostModelConfig()
    eff = [butterfly_flops(4096, r, cfg)[1] for r in (2, 4, 8, 16, 32, 64)]
    ok = all(a > b for a, b in zip(eff[:4], eff[1:4])) and all(a < b for a, b in zip(eff[3:], eff[4:]))
    checks.append(Check("effective flops fall to r=b then rise n=4096 b=16", ok, 0.0, 0.0))
    return checks


def _fd_gradient_error(rng: SeededRng, n: int = 8, r: int = 2, step: float = 1e-5) -> float:
    lb = LearnedButterfly.random(ButterflyPlan(n, r), rng)
    x, g = _cplx(rng, (n,)), _cplx(rng, (n,))
    block_grads, x_grad = learned_gradients(lb, x, g)

    def loss(blocks, xv):
        return np.real(np.vdot(g, learned_forward(LearnedButterfly(lb.plan, blocks), xv)))

    analytic, numeric = [], []
    for i in range(n):
        for unit in (1, 1j):
            e = np.zeros(n, dtype=complex)
            e[i] = unit * step
            numeric.append((loss(lb.blocks, x + e) - loss(lb.blocks, x - e)) / (2 * step))
            analytic.append(x_grad[i].real if unit == 1 else x_grad[i].imag)
    for s, block in enumerate(lb.blocks):
        for idx in np.ndindex(block.shape):
            for unit in (1, 1j):
                plus = [b.copy() for b in lb.blocks]
                minus = [b.copy() for b in lb.blocks]
                plus[s][idx] += unit * step
                minus[s][idx] -= unit * step
                numeric.append((loss(plus, x) - loss(minus, x)) / (2 * step))
                gval = block_grads[s][idx]
                analytic.append(gval.real if unit == 1 else gval.imag)
    analytic, numeric = np.array(analytic), np.array(numeric)
    return float(np.max(np.abs(analytic - numeric)) / np.max(np.abs(analytic)))


def suite_three_pass(max_n: int) -> list[Check]:
    rng = SeededRng(303)
    checks = []
    cfg = CostModelConfig()
    for n in [n for n in (8, 16, 64, 256, 1024, 4096, 16384) if n <= max_n]:
        u, k = _cplx(rng, (n,)), _cplx(rng, (n,))
        scale = (1 + np.max(np.abs(u))) * (1 + np.max(np.abs(k)))
        ref = conv_circular_naive(u, k)
        splits = [(1 << e, n >> e) for e in range(n.bit_length())]
        for l, m in splits:
            counter = PassCounter()
            y = conv_three_pass(build_three_pass(k, l, m), u, counter)
            checks.append(_check(f"three-pass n={n} l={l} m={m}", np.max(np.abs(y - ref)),
                                 1e-9 * np.sqrt(n) * scale))
            checks.append(Check(f"passes <= 3 n={n} l={l} m={m}", counter.sweeps <= 3,
                                float(counter.sweeps), 3.0))
            checks.append(Check(f"pass model matches measurement n={n} l={l} m={m}",
                                counter.sweeps == pass_counts(n, "three_pass", cfg),
                                float(counter.sweeps), 3.0))
        l, m = _near_square(n)
        plan = build_three_pass(k, l, m)
        forward = conv_three_pass(plan, u)
        backward = conv_three_pass(plan, u, order=range(m - 1, -1, -1))
        checks.append(Check(f"phase-2 order independence n={n}", bool(np.array_equal(forward, backward)),
                            0.0, 0.0))
        ur, kr = rng.standard_normal(n), rng.standard_normal(n)
        rscale = (1 + np.max(np.abs(ur))) * (1 + np.max(np.abs(kr)))
        for mode, oracle in (("circular", conv_circular_naive), ("causal", conv_causal_naive)):
            err = np.max(np.abs(conv_real_packed(ur, kr, mode) - oracle(ur, kr)))
            checks.append(_check(f"real packing {mode} n={n}", err, 1e-9 * np.sqrt(n) * rscale))
    return checks


def _near_square(n: int) -> tuple[int, int]:
    l = 1 << ((n.bit_length() - 1 + 1) // 2)
    return l, n // l


def suite_regularize(max_n: int) -> list[Check]:
    rng = SeededRng(404)
    checks = []
    w = rng.standard_normal(100) * 2
    lam = rng.uniform(100) * 2
    grid = np.arange(-8, 8, 1e-4)
    # squash with threshold lam minimizes lam|x| + (1/2)(x - w)^2
    worst = 0.0
    for wi, li in zip(w, lam):
        best = grid[np.argmin(li * np.abs(grid) + 0.5 * (grid - wi) ** 2)]
        worst = max(worst, abs(best - squash(wi, li)))
    checks.append(_check("squash is the L1 proximal step (half-squared penalty)", worst, 1e-4))
    a, b = rng.standard_normal(256), rng.standard_normal(256)
    gap = np.max(np.abs(squash(a, 0.3) - squash(b, 0.3))) - np.max(np.abs(a - b))
    checks.append(_check("squash non-expansive", max(gap, 0.0), 0.0))
    k = rng.standard_normal(64)
    for p in (1, 2, 5):
        leak = abs(smooth(k, p).sum() - k.sum())
        bound = p / (2 * p + 1) * (np.abs(k[:p]).sum() + np.abs(k[-p:]).sum())
        checks.append(_check(f"smooth sum leakage p={p}", max(leak - bound, 0.0), 1e-12))
    n = min(64, max(8, max_n))
    u = SignalBatch(rng.standard_normal((2, 3, n)))
    bank = KernelBank(rng.standard_normal((3, n)), rng.standard_normal(3))
    for lam_v, p, domain in ((0.0, 0, "time"), (0.2, 1, "time"), (0.1, 2, "frequency")):
        cfg = RegularizationConfig(lam=lam_v, smooth_width=p, smooth_domain=domain)
        for mode in ("causal", "circular"):
            outs = [regularized_long_conv(u, bank, cfg, e, mode).data for e in ENGINES]
            spread = max(np.max(np.abs(o - outs[0])) for o in outs)
            checks.append(_check(f"engine equivalence lam={lam_v} p={p} {domain} {mode}", spread,
                                 2e-9 * np.sqrt(n)))
    return checks


def suite_ssm(max_n: int) -> list[Check]:
    rng = SeededRng(505)
    checks = []
    for n in [n for n in (4, 8, 16, 32, 64) if n <= max(4, max_n)]:
        k = _cplx(rng, (n,))
        for m in [d for d in range(1, n + 1) if n % d == 0]:
            rec = ssms_to_kernel(kernel_to_ssm(k, m), n)
            checks.append(_check(f"roundtrip N={n} M={m}", np.max(np.abs(rec - k)),
                                 1e-7 * np.max(np.abs(k))))
        alt = 0.9 * np.exp(2j * np.pi * (np.arange(n) + 0.5) / n)
        diff = np.max(np.abs(ssms_to_kernel(kernel_to_ssm(k, n, alt), n) - ssms_to_kernel(kernel_to_ssm(k, n), n)))
        checks.append(_check(f"node-set invariance N={n}", diff, 1e-7))
    s1 = DiagonalSsm(_cplx(rng, (3,)) * 0.5, _cplx(rng, (3,)))
    s2 = DiagonalSsm(_cplx(rng, (2,)) * 0.5, _cplx(rng, (2,)))
    sup = ssm_to_kernel(s1 + s2, 32) - ssm_to_kernel(s1, 32) - ssm_to_kernel(s2, 32)
    checks.append(_check("superposition", np.max(np.abs(sup)), 1e-12))
    return checks


def stable_coefficients(rng: SeededRng, p: int, budget: float = 0.9) -> np.ndarray:
    """Random complex coefficients with ``sum |a| == budget`` so the recurrence stays bounded."""
    a = _cplx(rng, (p,))
    return a * (budget / np.sum(np.abs(a)))


def suite_recursive(max_n: int) -> list[Check]:
    rng = SeededRng(606)
    checks = []
    for p in (1, 2, 3, 5):
        for n in [n for n in (8, 32, 256) if n <= max(8, max_n)]:
            worst = 0.0
            for _ in range(3):
                crk = ConstantRecursiveKernel(_cplx(rng, (p,)), stable_coefficients(rng, p), n)
                u = _cplx(rng, (n,))
                ref = conv_causal_naive(u, materialize(crk))
                scale = (1 + np.max(np.abs(u))) * (1 + np.max(np.abs(crk.seeds)))
                worst = max(worst, np.max(np.abs(conv_recurrent(crk, u) - ref)) / scale)
            checks.append(_check(f"recurrent output p={p} N={n}", worst, 1e-9 * np.sqrt(n)))
        a, k = stable_coefficients(rng, p), _cplx(rng, (p,))
        mat = companion_matrix(a)
        dense = np.array([np.linalg.matrix_power(mat, i)[0] @ k for i in range(20)])
        checks.append(_check(f"companion matrix power p={p}", np.max(np.abs(companion_kernel(a, k, 20) - dense)), 1e-10))
    poles = 0.9 * np.exp(2j * np.pi * rng.uniform(3))
    crk = ConstantRecursiveKernel(_cplx(rng, (1, 3)), poles[None, :], 32)
    diff = np.max(np.abs(ssm_to_kernel(s4d_case(crk), 32) - materialize(crk)))
    checks.append(_check("p=1 maps onto a diagonal SSM", diff, 1e-12))
    return checks


_RUNNERS = {
    "fft": suite_fft,
    "butterfly": suite_butterfly,
    "three_pass": suite_three_pass,
    "regularize": suite_regularize,
    "ssm": suite_ssm,
    "recursive": suite_recursive,
}


def run_suite(name: str, max_n: int) -> dict[str, list[Check]]:
    """Run one suite, or every suite for ``name == "all"``."""
    names = SUITES if name == "all" else (name,)
    for s in names:
        if s not in _RUNNERS:
            raise KeyError(s)
    return {s: _RUNNERS[s](max_n) for s in names}


def admissible(n: int, r: int) -> bool:
    try:
        stage_radices(n, r)
    except PlanError:
        return False
    return True
