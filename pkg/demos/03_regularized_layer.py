"""Regularized long-convolution layer: init, squash, smooth, convolve."""

# %% Geometric-decay kernels: later heads fade faster.
import numpy as np

from longconv import InitConfig, RegularizationConfig, SignalBatch, init_kernels, regularized_long_conv, squash

bank = init_kernels(InitConfig(kind="geometric", heads=4, length=1024, seed=7))
tail = np.abs(bank.kernels[:, -256:]).mean(axis=1)
print("mean |K| over the last quarter, per head:", np.round(tail, 3))

# %% Squash is a soft threshold: small weights go to exactly zero.
for lam in (0.0, 0.1, 0.5):
    kept = np.count_nonzero(squash(bank.kernels, lam)) / bank.kernels.size
    print(f"lambda={lam}: {kept:.0%} of weights survive")

# %% Every engine computes the same layer output.
u = SignalBatch(np.random.default_rng(2).standard_normal((2, 4, 1024)))
cfg = RegularizationConfig(lam=0.1, smooth_width=2)
outs = {e: regularized_long_conv(u, bank, cfg, engine=e).data for e in ("naive", "butterfly", "three_pass")}
print("butterfly vs naive:", np.abs(outs["butterfly"] - outs["naive"]).max())
print("three_pass vs naive:", np.abs(outs["three_pass"] - outs["naive"]).max())
