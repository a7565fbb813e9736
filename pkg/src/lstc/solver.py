"""ADMM solver for low-tubal-rank smoothing tensor completion.

The model is

    min ||X||_* + lambda/2 sum_t ||z_t - z_{t-1}||^2
    s.t. X = Q(Z),  Z = Y on the observed set

with the tensor nuclear norm taken in the domain of a day-mode transform.
Each iteration thresholds the transformed slices of ``Q(Z) - T/rho``,
smooths ``Q^{-1}(X + T/rho)`` in time, updates the dual ``T`` and resets the
observed entries of ``Z``.
"""

from __future__ import annotations

import csv
import io
import logging
import time
from dataclasses import asdict, dataclass, field

import numpy as np

from . import smoothing
from .proximal import tensor_svt
from .tensor import ObservationMask, TensorDims, matricize, overwrite_observed, project, tensorize
from .transforms import TransformMatrix, fit_data_driven, make_transform

__all__ = [
    "SolverConfig",
    "SolverState",
    "IterationRecord",
    "SolverTrace",
    "NonFiniteError",
    "initialize",
    "update_x",
    "update_z",
    "update_dual",
    "convergence_metric",
    "refresh_transform",
    "run",
]

log = logging.getLogger(__name__)


class NonFiniteError(FloatingPointError):
    pass


@dataclass(frozen=True)
class SolverConfig:
    """Hyperparameters of the solver.

    ``lambda_coef`` is ``c`` in ``lambda = c * rho``; ``c = 0`` drops the
    smoothing term. ``rho_max`` defaults to ``1e5 * rho0``. A
    ``phi_refresh_period`` of 0 disables the data-driven refresh.
    """

    rho0: float = 1e-3
    rho_max: float | None = None
    rho_growth: float = 1.05
    lambda_coef: float = 1e-3
    epsilon: float = 1e-3
    max_iters: int = 200
    phi_refresh_period: int = 10
    transform_kind: str = "data-driven"
    seed: int = 0
    workers: int | None = None

    def __post_init__(self):
        if self.rho_max is None:
            object.__setattr__(self, "rho_max", 1e5 * self.rho0)
        if not self.rho0 > 0:
            raise ValueError(f"rho0 must be positive, got {self.rho0}")
        if not self.rho0 <= self.rho_max:
            raise ValueError(f"rho0 ({self.rho0}) must not exceed rho_max ({self.rho_max})")
        if not self.rho_growth >= 1:
            raise ValueError(f"rho_growth must be >= 1, got {self.rho_growth}")
        if not self.lambda_coef >= 0:
            raise ValueError(f"lambda_coef must be nonnegative, got {self.lambda_coef}")
        if not self.epsilon > 0:
            raise ValueError(f"epsilon must be positive, got {self.epsilon}")
        if self.max_iters < 1:
            raise ValueError(f"max_iters must be at least 1, got {self.max_iters}")
        if self.phi_refresh_period < 0:
            raise ValueError("phi_refresh_period must be nonnegative")
        if self.transform_kind not in ("data-driven", "dct", "identity"):
            raise ValueError(f"unknown transform kind {self.transform_kind!r}")

    def to_dict(self) -> dict:
        return asdict(self)


@dataclass
class SolverState:
    x: np.ndarray
    z: np.ndarray
    dual: np.ndarray
    rho: float
    phi: TransformMatrix
    dims: TensorDims
    iteration: int = 0
    # observed-entry energy, the denominator of the convergence metric
    observed_norm_sq: float = 0.0


@dataclass(frozen=True)
class IterationRecord:
    iteration: int
    rho: float
    metric: float
    nuclear_norm: float
    quadratic_variation: float
    ranks: tuple[int, ...]
    wall_time: float


@dataclass
class SolverTrace:
    records: list[IterationRecord] = field(default_factory=list)
    converged: bool = False

    @property
    def iterations(self) -> int:
        return len(self.records)

    COLUMNS = ("iteration", "rho", "metric", "nuclear_norm",
               "quadratic_variation", "ranks", "wall_time")

    def to_csv(self) -> str:
        """One line per iteration; ``ranks`` is a ``;``-joined list per slice."""
        buf = io.StringIO()
        buf.write(f"# converged={str(self.converged).lower()} iterations={self.iterations}\n")
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(self.COLUMNS)
        for r in self.records:
            writer.writerow([r.iteration, repr(r.rho), repr(r.metric), repr(r.nuclear_norm),
                             repr(r.quadratic_variation), ";".join(map(str, r.ranks)),
                             f"{r.wall_time:.6f}"])
        return buf.getvalue()

    @classmethod
    def from_csv(cls, text: str) -> "SolverTrace":
        lines = text.splitlines()
        meta = dict(kv.split("=") for kv in lines[0].lstrip("# ").split())
        rows = list(csv.DictReader(lines[1:]))
        records = [
            IterationRecord(
                iteration=int(row["iteration"]),
                rho=float(row["rho"]),
                metric=float(row["metric"]),
                nuclear_norm=float(row["nuclear_norm"]),
                quadratic_variation=float(row["quadratic_variation"]),
                ranks=tuple(int(v) for v in row["ranks"].split(";") if v),
                wall_time=float(row["wall_time"]),
            )
            for row in rows
        ]
        return cls(records, converged=meta["converged"] == "true")


def initialize(y: np.ndarray, mask: ObservationMask, dims: TensorDims, config: SolverConfig,
               phi: TransformMatrix | None = None) -> SolverState:
    """Zero dual, ``Z = P(Y)``, ``rho = rho0`` and the initial transform.

    ``phi`` overrides the transform named by ``config.transform_kind``.
    """
    y = np.asarray(y, dtype=float)
    if y.shape != dims.matrix_shape:
        raise ValueError(f"data shape {y.shape} does not match dims {dims.matrix_shape}")
    if mask.shape != y.shape:
        raise ValueError(f"mask shape {mask.shape} does not match data shape {y.shape}")
    if mask.observed_count == 0:
        raise ValueError("mask has no observed entries; nothing to complete")
    z = project(y, mask)
    if not np.all(np.isfinite(z)):
        raise ValueError("observed entries must be finite")
    norm_sq = float(np.sum(z * z))
    if norm_sq == 0.0:
        raise ValueError("observed entries are all zero; the convergence metric is undefined")

    x = tensorize(z, dims)
    if phi is None:
        phi = make_transform(config.transform_kind, x)
    elif phi.order != dims.days:
        raise ValueError(f"transform order {phi.order} does not match {dims.days} days")
    return SolverState(x=x, z=z, dual=np.zeros(dims.tensor_shape), rho=float(config.rho0),
                       phi=phi, dims=dims, iteration=0, observed_norm_sq=norm_sq)


def update_x(state: SolverState, config: SolverConfig, return_reports: bool = False):
    """Tensor SVT of ``Q(Z) - T/rho`` with threshold ``1/rho``."""
    target = tensorize(state.z, state.dims) - state.dual / state.rho
    return tensor_svt(target, state.phi, 1.0 / state.rho, workers=config.workers,
                      return_reports=return_reports)


def update_z(state: SolverState, y: np.ndarray, mask: ObservationMask, config: SolverConfig,
             system: smoothing.SmoothingSystem | None = None, overwrite: bool = True) -> np.ndarray:
    """Smooth ``Q^{-1}(X + T/rho)`` in time and reset the observed entries.

    With ``lambda = c * rho`` the smoothing weight ``rho / lambda`` is ``1/c``
    and does not change between iterations; pass a prebuilt ``system`` to
    reuse its factorisation. ``overwrite=False`` returns the smoothed matrix
    without the reset; :func:`run` uses it so the dual update sees the
    smoothed values and resets the observed entries afterwards.
    """
    b = matricize(state.x + state.dual / state.rho)
    if config.lambda_coef > 0:
        if system is None:
            system = smoothing.build_system(state.dims.total_time, 1.0 / config.lambda_coef)
        b = smoothing.solve_smoothing(b, system)
    if not overwrite:
        return b
    return overwrite_observed(b, y, mask)


def update_dual(state: SolverState) -> np.ndarray:
    """``T + rho (X - Q(Z))``."""
    return state.dual + state.rho * (state.x - tensorize(state.z, state.dims))


def convergence_metric(x_new: np.ndarray, x_old: np.ndarray, y: np.ndarray,
                       mask: ObservationMask) -> float:
    """``||x_new - x_old||_F^2 / ||P(Y)||_F^2``."""
    denom = float(np.sum(project(y, mask) ** 2))
    if denom == 0.0:
        raise ValueError("observed entries have zero norm")
    diff = np.asarray(x_new) - np.asarray(x_old)
    return float(np.sum(diff * diff)) / denom


def refresh_transform(state: SolverState) -> TransformMatrix:
    """Data-driven transform of ``Q(Z) - T/rho``."""
    return fit_data_driven(tensorize(state.z, state.dims) - state.dual / state.rho)


def _check_finite(name: str, arr: np.ndarray, iteration: int) -> None:
    if not np.all(np.isfinite(arr)):
        raise NonFiniteError(f"non-finite values in {name} at iteration {iteration}")


def run(y: np.ndarray, mask: ObservationMask, dims: TensorDims, config: SolverConfig,
        phi: TransformMatrix | None = None, callback=None):
    """Complete ``y`` on the unobserved entries of ``mask``.

    Returns ``(recovered, trace)`` where ``recovered`` is ``Q^{-1}(X)`` at the
    last iteration. ``trace.converged`` is False when ``max_iters`` was hit.
    ``callback(state)`` is called after every iteration if given.
    """
    y = np.where(mask.to_dense(), np.asarray(y, dtype=float), 0.0)
    state = initialize(y, mask, dims, config, phi=phi)
    system = None
    if config.lambda_coef > 0:
        system = smoothing.build_system(dims.total_time, 1.0 / config.lambda_coef)
    refresh = (config.transform_kind == "data-driven" and phi is None
               and config.phi_refresh_period > 0)

    trace = SolverTrace()
    recovered_old = matricize(state.x)
    start = time.perf_counter()
    while state.iteration < config.max_iters:
        state.rho = min(config.rho_growth * state.rho, config.rho_max)
        if refresh and state.iteration > 0 and state.iteration % config.phi_refresh_period == 0:
            state.phi = refresh_transform(state)

        state.x, reports = update_x(state, config, return_reports=True)
        # the dual is updated with the smoothed Z; observed entries are reset after
        state.z = update_z(state, y, mask, config, system, overwrite=False)
        state.dual = update_dual(state)
        state.z = overwrite_observed(state.z, y, mask)
        state.iteration += 1
        for name in ("x", "z", "dual"):
            _check_finite(name, getattr(state, name), state.iteration)

        recovered = matricize(state.x)
        metric = convergence_metric(recovered, recovered_old, y, mask)
        recovered_old = recovered
        trace.records.append(IterationRecord(
            iteration=state.iteration,
            rho=state.rho,
            metric=metric,
            nuclear_norm=float(sum(r.nuclear_norm for r in reports)),
            quadratic_variation=smoothing.quadratic_variation(state.z),
            ranks=tuple(r.rank for r in reports),
            wall_time=time.perf_counter() - start,
        ))
        log.debug("iter %d rho=%.3g metric=%.3e", state.iteration, state.rho, metric)
        if callback is not None:
            callback(state)
        if metric < config.epsilon:
            trace.converged = True
            break

    if not trace.converged:
        log.warning("stopped after %d iterations without converging", state.iteration)
    return matricize(state.x), trace
