"""Benchmark runs on the public traffic speed datasets.

The datasets are not bundled. Point the functions here (or the scripts in
``scripts/``) at the downloaded ``tensor.mat`` files, which hold a
``sensor x day x interval`` array with zeros for missing readings.
"""

from __future__ import annotations

import time
from dataclasses import dataclass

from .evaluation import EvalReport, MaskSpec, evaluate, generate_mask
from .io import read_dataset
from .solver import SolverConfig, SolverTrace, run

__all__ = ["PRESETS", "BenchmarkResult", "preset_config", "benchmark"]

# (rho0, lambda coefficient) per dataset and missing pattern
PRESETS = {
    "guangzhou": {"rm": (2e-3, 0.5), "nm": (2e-3, 0.5)},
    "pems": {"rm": (1e-3, 1e-3), "nm": (1e-4, 1e-3)},
    "london": {"rm": (1e-3, 1e-3), "nm": (1e-3, 1e-3)},
}


@dataclass
class BenchmarkResult:
    report: EvalReport
    trace: SolverTrace
    seconds: float
    config: SolverConfig
    mask: MaskSpec


def preset_config(dataset: str, pattern: str, transform: str = "data-driven",
                  **overrides) -> SolverConfig:
    rho0, coef = PRESETS[dataset][pattern]
    params = dict(rho0=rho0, lambda_coef=coef, epsilon=1e-3, transform_kind=transform)
    params.update(overrides)
    return SolverConfig(**params)


def benchmark(path, dataset: str, pattern: str, rate: float, transform: str = "data-driven",
              seed: int = 1000, **overrides) -> BenchmarkResult:
    """Mask ``rate`` of the observed entries, complete them and score the result."""
    y, base, dims = read_dataset(path)
    spec = MaskSpec(pattern, rate, seed)
    train, test = generate_mask(base, dims, spec)
    config = preset_config(dataset, pattern, transform, **overrides)
    start = time.perf_counter()
    recovered, trace = run(y, train, dims, config)
    seconds = time.perf_counter() - start
    return BenchmarkResult(evaluate(y, recovered, test), trace, seconds, config, spec)
