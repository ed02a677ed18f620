import numpy as np
import pytest

from longconv.core import PlanError
from longconv.cost_model import CostModelConfig, butterfly_flops, pass_counts, stage_count


def test_documented_examples():
    theo, eff, stages = butterfly_flops(4096, 2)
    assert stages == 12 and eff / theo == 8
    theo, eff, stages = butterfly_flops(4096, 16)
    assert stages == 3 and eff == theo


def test_effective_direction_around_b():
    eff = [butterfly_flops(4096, r)[1] for r in (2, 4, 8, 16, 32, 64)]
    assert eff[0] > eff[1] > eff[2] > eff[3]
    assert eff[3] < eff[4] < eff[5]


def test_radix2_matches_n_log_n():
    for n in (8, 256, 4096):
        theo, _, _ = butterfly_flops(n, 2)
        assert theo == 6 * 2 * n * np.log2(n)


def test_stage_count_ceil():
    assert stage_count(1000, 10) == 3
    assert stage_count(1001, 10) == 4
    assert stage_count(1, 4) == 0


def test_inadmissible_pair():
    with pytest.raises(PlanError):
        butterfly_flops(4099, 16)


def test_pass_counts():
    cfg = CostModelConfig()
    assert pass_counts(4096, "fused", cfg) == 1
    with pytest.raises(PlanError, match="exceeds working set"):
        pass_counts(16384, "fused", cfg)
    for n in (16, 16384, 1 << 24):
        assert pass_counts(n, "three_pass", cfg) == 3
    assert pass_counts(4096, "unfused_fft", cfg) == 3
    assert pass_counts(16384, "unfused_fft", cfg) == 5
    assert pass_counts(8192 ** 3, "unfused_fft", cfg) == 7
    with pytest.raises(ValueError):
        pass_counts(16, "magic", cfg)


def test_config_validation():
    with pytest.raises(ValueError):
        CostModelConfig(matmul_unit=0)
