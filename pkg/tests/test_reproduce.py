import subprocess
import sys
from pathlib import Path

import numpy as np
import pytest
import scipy.io

from lstc.reproduce import PRESETS, benchmark, preset_config


def _mock_mat(path, seed=0):
    # sensor x day x interval speeds with a daily profile and a few zero gaps
    r = np.random.default_rng(seed)
    profile = 40 + 10 * np.sin(np.linspace(0, 2 * np.pi, 48))
    arr = profile[None, None, :] * r.uniform(0.8, 1.2, (80, 1, 1)) + r.normal(0, 0.5, (80, 6, 48))
    arr[r.random(arr.shape) < 0.05] = 0.0
    scipy.io.savemat(path, {"tensor": arr})
    return arr


def test_preset_config():
    config = preset_config("guangzhou", "rm")
    assert (config.rho0, config.lambda_coef, config.epsilon) == (2e-3, 0.5, 1e-3)
    assert preset_config("pems", "nm", transform="dct", max_iters=5).max_iters == 5
    assert set(PRESETS) == {"guangzhou", "pems", "london"}


@pytest.mark.parametrize("pattern", ["rm", "nm"])
def test_benchmark_on_mock_dataset(tmp_path, pattern):
    arr = _mock_mat(tmp_path / "tensor.mat")
    result = benchmark(tmp_path / "tensor.mat", "guangzhou", pattern, 0.3, max_iters=30)
    observed = np.count_nonzero(arr)
    assert 0 < result.report.n_eval < observed
    assert result.report.n_skipped_zero == 0
    # the preset tolerance stops a small mock early; imputing zeros would score 100
    assert result.report.mape < 25.0
    assert result.trace.iterations <= 30


def test_script_runs(tmp_path):
    _mock_mat(tmp_path / "tensor.mat")
    script = Path(__file__).parent.parent / "scripts" / "reproduce.py"
    proc = subprocess.run([sys.executable, str(script), "guangzhou", str(tmp_path / "tensor.mat"),
                           "--cells", "rm:0.3", "--transforms", "dct"],
                          capture_output=True, text=True)
    assert proc.returncode == 0, proc.stderr
    assert "rm:0.3" in proc.stdout.splitlines()[-1]
