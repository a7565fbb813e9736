"""Acceptance criteria, one test per criterion.

Each test records a PASS/FAIL/BLOCKED line that is repeated in the
"acceptance criteria" section of the pytest summary. Criteria that need the
public traffic datasets read their location from an environment variable and
are skipped (BLOCKED) when it is unset.
"""

import os
import re
import subprocess
import sys
import time
from pathlib import Path

import numpy as np
import pytest

from lstc.evaluation import MaskSpec, generate_mask
from lstc.io import synth
from lstc.proximal import matrix_svt
from lstc.reproduce import benchmark
from lstc.smoothing import build_system, solve_smoothing
from lstc.solver import SolverConfig, run
from lstc.tensor import ObservationMask, TensorDims
from lstc.transforms import dct_matrix, fit_data_driven, forward, identity, inverse

from oracles import smoothing_oracle, svt_oracle

pytestmark = pytest.mark.acceptance

TESTS = Path(__file__).parent
GUANGZHOU = os.environ.get("LSTC_GUANGZHOU")
PEMS = os.environ.get("LSTC_PEMS4W")


def _timed(fn):
    start = time.perf_counter()
    out = fn()
    return out, time.perf_counter() - start


def test_1_svt_oracle(acceptance_log):
    r = np.random.default_rng(1)
    taus = (0.01, 0.3, 2.0)

    def check():
        worst_out = worst_spec = 0.0
        for k in range(200):
            m, n = r.integers(1, 21, size=2)
            a = r.standard_normal((m, n))
            tau = taus[k % 3]
            out, _ = matrix_svt(a, tau)
            worst_out = max(worst_out, np.linalg.norm(out - svt_oracle(a, tau)))
            expected = np.maximum(np.linalg.svd(a, compute_uv=False) - tau, 0.0)
            got = np.linalg.svd(out, compute_uv=False)
            worst_spec = max(worst_spec, np.max(np.abs(got - expected)))
        return worst_out, worst_spec

    (worst_out, worst_spec), seconds = _timed(check)
    ok = worst_out <= 1e-9 and worst_spec <= 1e-8 and seconds < 5
    acceptance_log("1 SVT oracle", ok,
                   f"max frob {worst_out:.1e} (<=1e-9), max spectral {worst_spec:.1e} "
                   f"(<=1e-8), {seconds:.2f}s (<5s)")
    assert ok


def test_2_smoothing_oracle(acceptance_log):
    r = np.random.default_rng(2)
    alphas = (0.01, 1.0, 100.0)

    def check():
        worst = 0.0
        for k in range(100):
            m, n = int(r.integers(1, 7)), int(r.integers(1, 51))
            b = r.standard_normal((m, n))
            alpha = alphas[k % 3]
            z = solve_smoothing(b, build_system(n, alpha))
            worst = max(worst, np.max(np.abs(z - smoothing_oracle(b, alpha))))
        return worst

    worst, seconds = _timed(check)
    ok = worst <= 1e-10 and seconds < 5
    acceptance_log("2 smoothing solve vs dense inverse", ok,
                   f"max abs {worst:.1e} (<=1e-10), {seconds:.2f}s (<5s)")
    assert ok


def test_3_transform_round_trips(acceptance_log):
    r = np.random.default_rng(3)
    makers = {"data-driven": fit_data_driven,
              "dct": lambda x: dct_matrix(x.shape[2]),
              "identity": lambda x: identity(x.shape[2])}

    def check():
        worst = {}
        for kind, make in makers.items():
            err = 0.0
            for _ in range(100):
                x = r.standard_normal(tuple(r.integers(1, 9, size=3)))
                phi = make(x)
                fx = forward(x, phi)
                scale = np.linalg.norm(x)
                err = max(err, np.linalg.norm(inverse(fx, phi) - x) / scale,
                          abs(np.linalg.norm(fx) - scale) / scale)
            worst[kind] = err
        return worst

    worst, seconds = _timed(check)
    ok = max(worst.values()) <= 1e-10 and seconds < 5
    detail = ", ".join(f"{k} {v:.1e}" for k, v in worst.items())
    acceptance_log("3 transform round trips", ok, f"rel err {detail} (<=1e-10), "
                   f"{seconds:.2f}s (<5s)")
    assert ok


def test_4_fixed_point(acceptance_log):
    dims = TensorDims(10, 8, 6)
    y = np.random.default_rng(4).standard_normal(dims.matrix_shape)
    config = SolverConfig(rho0=1e8, rho_max=1e8, lambda_coef=0.0)
    recovered, trace = run(y, ObservationMask.full(y.shape), dims, config)
    rel = np.linalg.norm(recovered - y) / np.linalg.norm(y)
    ok = rel <= 1e-6 and trace.converged and trace.iterations <= 3
    acceptance_log("4 no-missing fixed point", ok,
                   f"rel {rel:.1e} (<=1e-6), {trace.iterations} iterations (<=3)")
    assert ok


# frozen after the oracle runs over seeds 0-5 gave 5.5e-3 to 7.0e-3
SYNTH_THRESHOLD = 1.5e-2


def test_5_synthetic_recovery(acceptance_log):
    dims = TensorDims(60, 48, 14)
    y = synth(dims, 3, 0.0, seed=0)
    train, test = generate_mask(ObservationMask.full(y.shape), dims, MaskSpec("rm", 0.3, 0))
    config = SolverConfig(rho0=1.0, lambda_coef=0.0, epsilon=1e-7, max_iters=300)

    def solve():
        return run(y, train, dims, config)

    (recovered, trace), seconds = _timed(solve)
    again, _ = run(y, train, dims, config)
    held = test.to_dense()
    rel = np.linalg.norm((recovered - y)[held]) / np.linalg.norm(y[held])
    same = np.array_equal(recovered, again)
    ok = rel < SYNTH_THRESHOLD and same and seconds < 60
    acceptance_log("5 synthetic tubal-rank-3 recovery", ok,
                   f"rel RMSE {rel:.2e} (<{SYNTH_THRESHOLD}), repeat identical={same}, "
                   f"{trace.iterations} iterations, {seconds:.1f}s (<60s)")
    assert ok


def _require(path, name, acceptance_log, criterion):
    if not path or not Path(path).exists():
        acceptance_log(criterion, None, f"dataset not available; set {name} to its tensor.mat")
        pytest.skip(f"{name} not set")


def test_6_guangzhou_rm(acceptance_log):
    criterion = "6 Guangzhou RM reproduction"
    _require(GUANGZHOU, "LSTC_GUANGZHOU", acceptance_log, criterion)
    low = benchmark(GUANGZHOU, "guangzhou", "rm", 0.3)
    high = benchmark(GUANGZHOU, "guangzhou", "rm", 0.7)
    ok = (abs(low.report.mape - 7.33) <= 0.4 and abs(low.report.rmse - 3.11) <= 0.2
          and abs(high.report.mape - 8.60) <= 0.4)
    acceptance_log(criterion, ok,
                   f"30% MAPE {low.report.mape:.2f} (7.33+-0.4) RMSE {low.report.rmse:.2f} "
                   f"(3.11+-0.2); 70% MAPE {high.report.mape:.2f} (8.60+-0.4)")
    assert ok


def test_7_guangzhou_nm_ordering(acceptance_log):
    criterion = "7 Guangzhou NM data-driven <= DCT"
    _require(GUANGZHOU, "LSTC_GUANGZHOU", acceptance_log, criterion)
    tubal = benchmark(GUANGZHOU, "guangzhou", "nm", 0.3, transform="data-driven")
    dct = benchmark(GUANGZHOU, "guangzhou", "nm", 0.3, transform="dct")
    ok = tubal.report.mape <= dct.report.mape
    acceptance_log(criterion, ok,
                   f"data-driven MAPE {tubal.report.mape:.2f}, DCT {dct.report.mape:.2f}")
    assert ok


def test_8_pems(acceptance_log):
    criterion = "8 PeMS-4W RM reproduction (optional)"
    _require(PEMS, "LSTC_PEMS4W", acceptance_log, criterion)
    result = benchmark(PEMS, "pems", "rm", 0.3)
    minutes = result.seconds / 60
    ok = abs(result.report.mape - 1.72) <= 0.1 and minutes <= 81.6
    acceptance_log(criterion, ok,
                   f"MAPE {result.report.mape:.2f} (1.72+-0.1), {minutes:.1f} min "
                   f"(same order as 8.16)")
    assert ok


MODULES = ["tensor", "transforms", "proximal", "smoothing", "solver", "evaluation", "io"]


def test_9_property_suites(acceptance_log):
    files = [str(TESTS / f"test_{name}.py") for name in MODULES]
    proc = subprocess.run(
        [sys.executable, "-m", "pytest", *files, "-q", "-p", "no:cacheprovider",
         "--hypothesis-show-statistics"],
        capture_output=True, text=True, cwd=TESTS.parent,
    )
    counts = {}
    for block in re.split(r"\n(?=tests/\S+::)", proc.stdout):
        head = re.match(r"tests/test_(\w+)\.py::(\S+):", block)
        if head:
            passing = sum(int(n) for n in re.findall(r"(\d+) passing examples", block))
            counts[(head.group(1), head.group(2))] = passing
    per_module = {m: [n for (mod, _), n in counts.items() if mod == m] for m in MODULES}
    covered = all(per_module.values())
    fewest = min(counts.values(), default=0)
    ok = proc.returncode == 0 and covered and fewest >= 200
    detail = ", ".join(f"{m} {len(v)}" for m, v in per_module.items())
    acceptance_log("9 property suites", ok,
                   f"{len(counts)} suites ({detail}), fewest examples {fewest} (>=200), "
                   f"exit {proc.returncode}")
    assert ok, proc.stdout[-3000:]
