"""A DFT built from small dense blocks, then used for long convolution."""

# %% The four-step split, checked densely at n = 12 = 4 * 3.
import numpy as np

from longconv import ButterflyPlan, apply_plan, conv_butterfly, dft_matrix, factorization_matrices
from longconv.dft_reference import conv_causal_naive

f = factorization_matrices(12, 4)
rebuilt = f["P"] @ f["left"] @ f["P"].T @ f["D"] @ f["right"] @ f["P"]
print("four-step split error:", np.abs(rebuilt - dft_matrix(12)).max())

# %% Recursing on the second factor gives a plan of r x r stages.
plan = ButterflyPlan(4096, 16)
print(plan, "->", [s["dense_cost"] for s in plan.describe()["stages"]], "multiply-adds per stage")

# %% The plan is a drop-in DFT.
rng = np.random.default_rng(0)
x = rng.standard_normal(4096) + 1j * rng.standard_normal(4096)
print("vs numpy.fft:", np.abs(apply_plan(plan, x) - np.fft.fft(x)).max())

# %% Causal convolution pads to 2N; the same plan family handles it.
u, k = rng.standard_normal(2048), np.exp(-np.arange(2048) / 200.0)
y = conv_butterfly(u, k, ButterflyPlan(4096, 16), mode="causal").real
print("causal conv vs direct sum:", np.abs(y - conv_causal_naive(u, k).real).max())
