"""Kernels as state-space models and as recurrences."""

# %% Any length-N kernel splits into N/M diagonal SSMs of state size M.
import numpy as np

from longconv import ConstantRecursiveKernel, conv_recurrent, kernel_to_ssm, materialize, s4d_case, ssms_to_kernel
from longconv.dft_reference import conv_causal_naive
from longconv.ssm_bridge import ssm_to_kernel

rng = np.random.default_rng(3)
k = rng.standard_normal(64)
for m in (1, 8, 64):
    ssms = kernel_to_ssm(k, m)
    print(f"M={m:2d}: {len(ssms):2d} SSMs, roundtrip error {np.abs(ssms_to_kernel(ssms, 64) - k).max():.1e}")

# %% A constant-recursive kernel never needs to be materialized to convolve with it.
crk = ConstantRecursiveKernel(seeds=[1.0, -0.5, 0.25], coefs=[0.5, 0.2, 0.1], length=256)
u = rng.standard_normal(256)
print("recurrent vs direct:", np.abs(conv_recurrent(crk, u) - conv_causal_naive(u, materialize(crk))).max())

# %% With p = 1 the recurrence is a diagonal SSM.
geo = ConstantRecursiveKernel(seeds=[[2.0, 1.0]], coefs=[[0.9, -0.5]], length=32)
print("p=1 as SSM:", np.abs(ssm_to_kernel(s4d_case(geo), 32) - materialize(geo)).max())
