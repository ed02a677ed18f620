"""Long convolutions through FFT butterflies, the three-pass factorization,
kernel regularization and the SSM/recurrence bridges."""

from .butterfly import (
    ButterflyPlan,
    LearnedButterfly,
    StridePermutation,
    TwiddleDiagonal,
    apply_plan,
    build_plan,
    conv_butterfly,
    factorization_matrices,
    learned_forward,
    learned_gradients,
    stage_radices,
)
from .core import (
    ConditioningError,
    KernelBank,
    PlanError,
    SeededRng,
    ShapeError,
    SignalBatch,
    max_abs_diff,
)
from .cost_model import CostModelConfig, butterfly_flops, pass_counts, stage_count
from .dft_reference import conv_causal_naive, conv_circular_naive, dft_matrix, dft_naive, idft_naive
from .io import FormatError, read_array, write_array
from .recursive import (
    ConstantRecursiveKernel,
    companion_kernel,
    companion_matrix,
    conv_recurrent,
    materialize,
    s4d_case,
)
from .regularize import (
    InitConfig,
    RegularizationConfig,
    init_kernels,
    kernel_dropout,
    regularize_kernels,
    regularized_long_conv,
    smooth,
    smooth_frequency,
    squash,
)
from .ssm_bridge import DiagonalSsm, VandermondeSystem, kernel_to_ssm, roots_of_unity, ssm_to_kernel, ssms_to_kernel, vandermonde_solve
from .three_pass import (
    BlockDiagonalButterfly,
    PassCounter,
    ThreePassPlan,
    build_three_pass,
    conv_real_packed,
    conv_three_pass,
    default_split,
)

__version__ = "0.1.0"
