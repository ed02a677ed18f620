"""``longconv`` command line.

Exit codes: 0 success, 1 verification failure, 2 usage or IO error.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import os
import statistics
import sys
import time
from concurrent.futures import ThreadPoolExecutor

import numpy as np

from . import io as lcio
from .butterfly import ButterflyPlan, conv_butterfly
from .core import KernelBank, PlanError, SeededRng, ShapeError, SignalBatch
from .cost_model import CostModelConfig, butterfly_flops, pass_counts
from .recursive import ConstantRecursiveKernel, materialize
from .regularize import ENGINES, InitConfig, RegularizationConfig, init_kernels, regularize_kernels, regularized_long_conv
from .ssm_bridge import DiagonalSsm, kernel_to_ssm, ssms_to_kernel
from .three_pass import PassCounter, build_three_pass, conv_three_pass, default_split
from .verify import SUITES, run_suite

THREADS_ENV = "LONGCONV_THREADS"
BENCH_COLUMNS = [
    "engine", "n", "l", "m", "r", "b", "repetitions", "stages", "complex_ops", "theoretical_flops",
    "effective_flops", "passes", "measured_passes", "measured_wall_time_ns", "status",
]


class UsageError(Exception):
    pass


def _sidecar(path: str) -> str:
    return path + ".json"


def _read_sidecar(path: str) -> dict:
    side = _sidecar(path)
    if not os.path.exists(side):
        return {}
    with open(side) as fh:
        return json.load(fh)


def _dump_json(obj) -> bytes:
    return (json.dumps(obj, indent=2, sort_keys=True) + "\n").encode()


def _read_bank(path: str) -> KernelBank:
    data, _ = lcio.read_array(path)
    if data.shape[0] != 1:
        raise UsageError(f"kernel file {path} must have B=1, found B={data.shape[0]}")
    skip = _read_sidecar(path).get("skip_gain")
    return KernelBank(data[0], None if skip is None else np.asarray(skip, dtype=np.float64))


def _write_bank(path: str, kernels: np.ndarray, meta: dict):
    lcio.write_array(path, np.asarray(kernels, dtype=np.float64)[None])
    lcio.atomic_write(_sidecar(path), _dump_json(meta))


def _threads(value) -> int:
    if value is not None:
        return max(1, value)
    env = os.environ.get(THREADS_ENV)
    if env:
        return max(1, int(env))
    return os.cpu_count() or 1


def cmd_verify(args) -> int:
    try:
        results = run_suite(args.suite, args.max_n)
    except KeyError:
        print(f"unknown suite {args.suite!r}; choose from all, {', '.join(SUITES)}", file=sys.stderr)
        return 2
    ok = all(c.passed for checks in results.values() for c in checks)
    if args.json:
        report = {s: [c.to_dict() for c in checks] for s, checks in results.items()}
        print(json.dumps({"passed": ok, "suites": report}, indent=2, sort_keys=True))
    else:
        for suite, checks in results.items():
            print(f"[{suite}]")
            for c in checks:
                print("  " + c.line())
        total = sum(len(c) for c in results.values())
        failed = sum(not c.passed for checks in results.values() for c in checks)
        print(f"{total - failed}/{total} checks passed")
    return 0 if ok else 1


def cmd_convolve(args) -> int:
    data, fmt = lcio.read_array(args.input)
    bank = _read_bank(args.kernel)
    if bank.heads != data.shape[1] or bank.length != data.shape[2]:
        raise UsageError(
            f"kernel bank is H={bank.heads}, N={bank.length} but input has H={data.shape[1]}, N={data.shape[2]}"
        )
    cfg = RegularizationConfig(lam=args.lam, smooth_width=args.p, dropout_rate=args.dropout,
                               smooth_domain=args.smooth_domain, seed=args.seed,
                               training=args.dropout > 0)
    with ThreadPoolExecutor(max_workers=_threads(args.threads)) as pool:
        y = regularized_long_conv(SignalBatch(data), bank, cfg, args.engine, args.mode, executor=pool)
    lcio.write_array(args.output, y.data, fmt)
    return 0


def _time_ns(fn, reps: int) -> int:
    samples = []
    for _ in range(reps):
        t0 = time.perf_counter_ns()
        fn()
        samples.append(time.perf_counter_ns() - t0)
    return int(statistics.median(samples))


def bench_rows(ns, rs, engines, reps, cfg: CostModelConfig, l_override=None):
    rng = SeededRng(0)
    rows = []
    for n in ns:
        u = rng.standard_normal(n) + 1j * rng.standard_normal(n)
        k = rng.standard_normal(n) + 1j * rng.standard_normal(n)
        for engine in engines:
            for r in rs:
                row = dict.fromkeys(BENCH_COLUMNS, "")
                row.update(engine=engine, n=n, r=r, b=cfg.matmul_unit, repetitions=reps, status="ok")
                try:
                    if engine == "butterfly":
                        theo, eff, stages = butterfly_flops(n, r, cfg)
                        plan = ButterflyPlan(n, r)
                        algo = "fused" if n <= cfg.sram_elements else "unfused_fft"
                        row.update(l=n, m=1, stages=stages, complex_ops=n * r * stages, theoretical_flops=theo,
                                   effective_flops=eff, passes=pass_counts(n, algo, cfg))
                        row["measured_wall_time_ns"] = _time_ns(lambda: conv_butterfly(u, k, plan), reps)
                    elif engine == "three_pass":
                        l, m = (l_override, n // l_override) if l_override else default_split(n)
                        if l * m != n:
                            raise PlanError(f"l={l} does not divide n={n}")
                        theo, eff, stages = butterfly_flops(l, r, cfg)
                        plan = build_three_pass(k, l, m, r)
                        counter = PassCounter(working_set=cfg.sram_elements)
                        conv_three_pass(plan, u, counter)
                        # inner transforms only: m blocks of length l
                        row.update(l=l, m=m, stages=stages, complex_ops=n * r * stages, theoretical_flops=theo * m,
                                   effective_flops=eff * m, passes=pass_counts(n, "three_pass", cfg),
                                   measured_passes=counter.sweeps)
                        row["measured_wall_time_ns"] = _time_ns(lambda: conv_three_pass(plan, u), reps)
                    else:
                        raise UsageError(f"unknown engine {engine!r}")
                except PlanError as exc:
                    row["status"] = f"skipped: {exc}"
                    print(f"warning: n={n} r={r} engine={engine} skipped ({exc})", file=sys.stderr)
                rows.append(row)
    return rows


def cmd_bench(args) -> int:
    if args.repetitions < 3:
        raise UsageError("repetitions must be >= 3")
    cfg = CostModelConfig(matmul_unit=args.b, sram_elements=args.w)
    rows = bench_rows(args.n, args.r, args.engines, args.repetitions, cfg, args.l)
    buf = io.StringIO(newline="")
    writer = csv.DictWriter(buf, fieldnames=BENCH_COLUMNS, lineterminator="\n")
    writer.writeheader()
    writer.writerows(rows)
    lcio.atomic_write(args.output, buf.getvalue().encode())
    return 0


def _ssm_heads(doc) -> tuple[list[list[DiagonalSsm]], int | None]:
    if isinstance(doc, dict) and "heads" in doc:
        return [[DiagonalSsm.from_dict(s) for s in head] for head in doc["heads"]], doc.get("n")
    if isinstance(doc, dict):
        return [[DiagonalSsm.from_dict(doc)]], doc.get("n")
    return [[DiagonalSsm.from_dict(s) for s in doc]], None


def cmd_kernel(args) -> int:
    action = args.action
    if action == "init":
        cfg = InitConfig(kind=args.kind, heads=args.heads, length=args.n, seed=args.seed)
        bank = init_kernels(cfg)
        _write_bank(args.output, bank.kernels,
                    {"init": json.loads(cfg.to_json()), "skip_gain": bank.skip_gain.tolist()})
    elif action == "regularize":
        bank = _read_bank(args.input)
        cfg = RegularizationConfig(lam=args.lam, smooth_width=args.p, dropout_rate=args.dropout,
                                   smooth_domain=args.smooth_domain, seed=args.seed,
                                   training=args.dropout > 0)
        meta = dict(_read_sidecar(args.input))
        meta.update(skip_gain=bank.skip_gain.tolist(), regularization=json.loads(cfg.to_json()))
        _write_bank(args.output, regularize_kernels(bank.kernels, cfg), meta)
    elif action == "to-ssm":
        bank = _read_bank(args.input)
        heads = [[s.to_dict() for s in kernel_to_ssm(k, args.m)] for k in bank.kernels]
        doc = {"n": bank.length, "m": args.m, "heads": heads, "skip_gain": bank.skip_gain.tolist()}
        lcio.atomic_write(args.output, _dump_json(doc))
    elif action == "from-ssm":
        with open(args.input) as fh:
            doc = json.load(fh)
        heads, n = _ssm_heads(doc)
        n = args.n or n
        if not n:
            raise UsageError("kernel length unknown; pass --n")
        kernels = np.stack([ssms_to_kernel(h, n).real for h in heads])
        skip = doc.get("skip_gain", [0.0] * len(heads)) if isinstance(doc, dict) else [0.0] * len(heads)
        _write_bank(args.output, kernels, {"skip_gain": list(skip)})
    elif action == "from-recursive":
        with open(args.input) as fh:
            doc = json.load(fh)
        items = doc["heads"] if isinstance(doc, dict) and "heads" in doc else [doc]
        kernels = np.stack([materialize(ConstantRecursiveKernel.from_dict(d)).real for d in items])
        _write_bank(args.output, kernels, {"skip_gain": [0.0] * len(items)})
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="longconv", description="Long-convolution kernels: verify, convolve, benchmark.")
    sub = parser.add_subparsers(dest="command", required=True)

    v = sub.add_parser("verify", help="run oracle suites")
    v.add_argument("--suite", default="all")
    v.add_argument("--max-n", type=int, default=1024)
    v.add_argument("--json", action="store_true")
    v.set_defaults(func=cmd_verify)

    def regularization_flags(p):
        p.add_argument("--lambda", dest="lam", type=float, default=0.0)
        p.add_argument("--p", type=int, default=0)
        p.add_argument("--dropout", type=float, default=0.0)
        p.add_argument("--smooth-domain", choices=("time", "frequency"), default="time")
        p.add_argument("--seed", type=int, default=0)

    c = sub.add_parser("convolve", help="apply the regularized long-convolution layer to a file")
    c.add_argument("--input", required=True)
    c.add_argument("--kernel", required=True)
    c.add_argument("--output", required=True)
    c.add_argument("--engine", choices=ENGINES, default="butterfly")
    c.add_argument("--mode", choices=("causal", "circular"), default="causal")
    regularization_flags(c)
    c.add_argument("--threads", type=int, default=None,
                   help=f"worker cap (default: ${THREADS_ENV} or all cores)")
    c.set_defaults(func=cmd_convolve)

    b = sub.add_parser("bench", help="timing sweep with cost-model columns")
    b.add_argument("--n", type=int, nargs="+", required=True)
    b.add_argument("--r", type=int, nargs="+", required=True)
    b.add_argument("--engines", nargs="+", choices=("butterfly", "three_pass"), default=["butterfly"])
    b.add_argument("--repetitions", type=int, default=5)
    b.add_argument("--b", type=int, default=16)
    b.add_argument("--w", type=int, default=8192)
    b.add_argument("--l", type=int, default=None)
    b.add_argument("--output", required=True)
    b.set_defaults(func=cmd_bench)

    k = sub.add_parser("kernel", help="generate, regularize and convert kernels")
    k.add_argument("action", choices=("init", "regularize", "from-ssm", "to-ssm", "from-recursive"))
    k.add_argument("--output", required=True)
    k.add_argument("--input")
    k.add_argument("--kind", choices=("random", "geometric"), default="random")
    k.add_argument("--heads", type=int, default=1)
    k.add_argument("--n", type=int, default=None)
    k.add_argument("--m", type=int, default=None)
    regularization_flags(k)
    k.set_defaults(func=cmd_kernel)
    return parser


def _validate_kernel_args(parser, args):
    if args.command != "kernel":
        return
    if args.action == "init" and not args.n:
        parser.error("kernel init needs --n")
    if args.action != "init" and not args.input:
        parser.error(f"kernel {args.action} needs --input")
    if args.action == "to-ssm" and not args.m:
        parser.error("kernel to-ssm needs --m")


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    _validate_kernel_args(parser, args)
    try:
        return args.func(args)
    except (lcio.FormatError, UsageError, ShapeError, PlanError, ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
