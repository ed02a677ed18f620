"""Why the block size should match the hardware matmul width."""

# %% Effective flops fall until r reaches b, then rise again.
from longconv import CostModelConfig, butterfly_flops, pass_counts

cfg = CostModelConfig(matmul_unit=16, sram_elements=8192)
print(" r  stages  theoretical  effective")
for r in (2, 4, 8, 16, 32, 64, 256):
    theo, eff, stages = butterfly_flops(4096, r, cfg)
    print(f"{r:3d}  {stages:6d}  {theo:11.3g}  {eff:9.3g}")

# %% Passes over global memory: three-pass stays at 3 as n grows past the working set.
for n in (4096, 16384, 1 << 20, 1 << 27):
    fused = pass_counts(n, "fused", cfg) if n <= cfg.sram_elements else "-"
    print(f"n={n:>9}  fused={fused}  three_pass={pass_counts(n, 'three_pass', cfg)}  "
          f"unfused_fft={pass_counts(n, 'unfused_fft', cfg)}")
