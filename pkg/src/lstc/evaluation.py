"""Missing-pattern generation and imputation metrics."""

from __future__ import annotations

from dataclasses import asdict, dataclass

import numpy as np

from .tensor import ObservationMask, TensorDims
from .transforms import TransformMatrix, forward

__all__ = [
    "MaskSpec",
    "EvalReport",
    "generate_mask",
    "evaluate",
    "residuals",
    "spectrum",
]

# Ground-truth values this close to zero are left out of MAPE.
ZERO_TOL = 1e-12


@dataclass(frozen=True)
class MaskSpec:
    """Random missing (``"rm"``) or non-random missing (``"nm"``) at ``rate``.

    RM masks entries independently; NM masks whole (sensor, day) fibers.
    ``rate`` is a per-unit probability unless ``exact`` is set, in which case
    exactly ``round(rate * units)`` units are masked.
    """

    pattern: str
    rate: float
    seed: int = 0
    exact: bool = False

    def __post_init__(self):
        pattern = self.pattern.lower()
        if pattern not in ("rm", "nm"):
            raise ValueError(f"pattern must be 'rm' or 'nm', got {self.pattern!r}")
        object.__setattr__(self, "pattern", pattern)
        if not 0.0 < self.rate < 1.0:
            raise ValueError(f"rate must lie in (0, 1), got {self.rate}")


@dataclass(frozen=True)
class EvalReport:
    mape: float
    rmse: float
    n_eval: int
    n_skipped_zero: int

    def to_dict(self) -> dict:
        return asdict(self)


def _draw(rng: np.random.Generator, n_units: int, spec: MaskSpec) -> np.ndarray:
    if spec.exact:
        chosen = np.zeros(n_units, dtype=bool)
        chosen[rng.permutation(n_units)[:int(round(spec.rate * n_units))]] = True
        return chosen
    return rng.random(n_units) < spec.rate


def generate_mask(base: ObservationMask, dims: TensorDims, spec: MaskSpec):
    """Split the observed set ``base`` into ``(train, test)``.

    Only entries observed in ``base`` can be held out. For NM, each
    (sensor, day) pair with at least one observed entry is one unit and
    its whole observed fiber moves to the test set together.
    """
    if base.shape != dims.matrix_shape:
        raise ValueError(f"mask shape {base.shape} does not match dims {dims.matrix_shape}")
    if base.observed_count == 0:
        raise ValueError("base mask is empty")
    rng = np.random.default_rng(spec.seed)
    grid = base.to_dense()

    if spec.pattern == "rm":
        flat = base.flat_indices()
        held = flat[_draw(rng, flat.size, spec)]
        test_grid = np.zeros(dims.matrix_shape, dtype=bool)
        test_grid.ravel()[held] = True
    else:
        m, i, j = dims.tensor_shape
        # fiber_obs[m, j] is True when sensor m has any observation on day j
        fiber_obs = grid.reshape(m, j, i).any(axis=2)
        units = np.flatnonzero(fiber_obs)
        hit = np.zeros(m * j, dtype=bool)
        hit[units[_draw(rng, units.size, spec)]] = True
        test_grid = np.repeat(hit.reshape(m, j), i, axis=1) & grid

    train_grid = grid & ~test_grid
    test = ObservationMask.from_dense(test_grid)
    train = ObservationMask.from_dense(train_grid)
    if test.observed_count == 0:
        raise ValueError(f"rate {spec.rate} left the test set empty")
    if train.observed_count == 0:
        raise ValueError(f"rate {spec.rate} left the training set empty")
    return train, test


def _test_pairs(truth, recovered, test: ObservationMask):
    truth = np.asarray(truth, dtype=float)
    recovered = np.asarray(recovered, dtype=float)
    if truth.shape != recovered.shape or truth.shape != test.shape:
        raise ValueError(
            f"shape mismatch: truth {truth.shape}, recovered {recovered.shape}, mask {test.shape}"
        )
    if test.observed_count == 0:
        raise ValueError("test set is empty")
    flat = test.flat_indices()
    return truth.ravel()[flat], recovered.ravel()[flat]


def evaluate(truth: np.ndarray, recovered: np.ndarray, test: ObservationMask) -> EvalReport:
    """MAPE (percent) and RMSE over the entries of ``test``."""
    y, y_hat = _test_pairs(truth, recovered, test)
    err = y - y_hat
    rmse = float(np.sqrt(np.mean(err * err)))
    nonzero = np.abs(y) >= ZERO_TOL
    n_skipped = int(y.size - np.count_nonzero(nonzero))
    if np.any(nonzero):
        mape = float(np.mean(np.abs(err[nonzero] / y[nonzero])) * 100.0)
    else:
        mape = float("nan")
    return EvalReport(mape=mape, rmse=rmse, n_eval=int(y.size), n_skipped_zero=n_skipped)


def residuals(truth: np.ndarray, recovered: np.ndarray, test: ObservationMask) -> np.ndarray:
    """``truth - recovered`` on the test entries, in row-major order."""
    y, y_hat = _test_pairs(truth, recovered, test)
    return y - y_hat


def spectrum(x: np.ndarray, phi: TransformMatrix) -> np.ndarray:
    """Descending singular values of every transformed frontal slice.

    Returns a ``J x min(M, I)`` array; row ``j`` belongs to slice ``j``.
    """
    transformed = forward(np.asarray(x, dtype=float), phi)
    return np.stack([np.linalg.svd(transformed[:, :, j], compute_uv=False)
                     for j in range(transformed.shape[2])])
