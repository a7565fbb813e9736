"""Containers and index maps shared by every other module.

Layout conventions
------------------
* A spatiotemporal matrix is a ``numpy`` array of shape ``(M, T)`` with
  ``T = I * J``; column ``t`` is interval ``t % I`` of day ``t // I``.
* A third-order tensor is a C-ordered array of shape ``(M, I, J)``:
  ``x[m, i, j]`` is sensor ``m``, interval ``i``, day ``j``.
* Mode-k unfoldings follow Kolda & Bader: the rows index mode ``k`` and the
  remaining indices run in column-major order (lowest mode fastest).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

__all__ = [
    "TensorDims",
    "ObservationMask",
    "unfold",
    "fold",
    "tensorize",
    "matricize",
    "project",
    "overwrite_observed",
]

# Masks denser than this are stored as a boolean grid, sparser ones as indices.
DENSE_THRESHOLD = 1.0 / 8.0


@dataclass(frozen=True)
class TensorDims:
    """Sensors ``M``, intervals per day ``I`` and days ``J``."""

    sensors: int
    intervals: int
    days: int

    def __post_init__(self):
        for name in ("sensors", "intervals", "days"):
            value = getattr(self, name)
            if int(value) != value or value < 1:
                raise ValueError(f"{name} must be a positive integer, got {value!r}")
            object.__setattr__(self, name, int(value))

    @property
    def total_time(self) -> int:
        return self.intervals * self.days

    @property
    def tensor_shape(self) -> tuple[int, int, int]:
        return (self.sensors, self.intervals, self.days)

    @property
    def matrix_shape(self) -> tuple[int, int]:
        return (self.sensors, self.total_time)

    @classmethod
    def from_tensor(cls, x: np.ndarray) -> "TensorDims":
        if x.ndim != 3:
            raise ValueError(f"expected a third-order tensor, got ndim={x.ndim}")
        return cls(*x.shape)

    def unfolding_shape(self, mode: int) -> tuple[int, int]:
        _check_mode(mode)
        n = self.tensor_shape[mode - 1]
        return (n, self.sensors * self.intervals * self.days // n)


def _check_mode(mode: int) -> None:
    if mode not in (1, 2, 3):
        raise ValueError(f"mode must be 1, 2 or 3, got {mode!r}")


def unfold(x: np.ndarray, mode: int) -> np.ndarray:
    """Mode-``mode`` unfolding of a third-order tensor.

    Mode 1 gives ``M x (I*J)``, mode 2 ``I x (M*J)`` and mode 3 ``J x (M*I)``.
    """
    _check_mode(mode)
    if x.ndim != 3:
        raise ValueError(f"expected a third-order tensor, got ndim={x.ndim}")
    k = mode - 1
    return np.reshape(np.moveaxis(x, k, 0), (x.shape[k], -1), order="F")


def fold(mat: np.ndarray, mode: int, dims: TensorDims) -> np.ndarray:
    """Inverse of :func:`unfold` for the given mode and dimensions."""
    _check_mode(mode)
    expected = dims.unfolding_shape(mode)
    if mat.shape != expected:
        raise ValueError(
            f"mode-{mode} unfolding for dims {dims.tensor_shape} must have shape "
            f"{expected}, got {mat.shape}"
        )
    k = mode - 1
    full = list(dims.tensor_shape)
    moved = [full[k]] + full[:k] + full[k + 1:]
    return np.ascontiguousarray(np.moveaxis(np.reshape(mat, moved, order="F"), 0, k))


def tensorize(y: np.ndarray, dims: TensorDims) -> np.ndarray:
    """Split the time axis of an ``M x (I*J)`` matrix into (interval, day).

    ``result[m, i, j] == y[m, j*I + i]``.
    """
    if y.ndim != 2 or y.shape != dims.matrix_shape:
        raise ValueError(
            f"matrix of shape {dims.matrix_shape} expected for dims "
            f"{dims.tensor_shape}, got {y.shape}"
        )
    m, i, j = dims.tensor_shape
    return np.ascontiguousarray(y.reshape(m, j, i).transpose(0, 2, 1))


def matricize(x: np.ndarray) -> np.ndarray:
    """Inverse of :func:`tensorize`."""
    if x.ndim != 3:
        raise ValueError(f"expected a third-order tensor, got ndim={x.ndim}")
    m, i, j = x.shape
    return np.ascontiguousarray(x.transpose(0, 2, 1).reshape(m, i * j))


class ObservationMask:
    """Set of observed ``(row, column)`` positions of an ``M x T`` matrix.

    Storage is a boolean grid when more than one eighth of the entries are
    observed and a sorted array of flat (row-major) indices otherwise. Either
    way the mask is treated as immutable.
    """

    __slots__ = ("_shape", "_grid", "_flat", "_count")

    def __init__(self, shape, grid=None, flat=None):
        self._shape = (int(shape[0]), int(shape[1]))
        self._grid = grid
        self._flat = flat
        if grid is not None:
            grid.setflags(write=False)
            self._count = int(np.count_nonzero(grid))
        else:
            flat.setflags(write=False)
            self._count = int(flat.size)

    @classmethod
    def from_dense(cls, grid: np.ndarray) -> "ObservationMask":
        grid = np.asarray(grid, dtype=bool)
        if grid.ndim != 2:
            raise ValueError(f"mask grid must be 2-D, got ndim={grid.ndim}")
        count = int(np.count_nonzero(grid))
        if grid.size and count > DENSE_THRESHOLD * grid.size:
            return cls(grid.shape, grid=grid.copy())
        return cls(grid.shape, flat=np.flatnonzero(grid).astype(np.int64))

    @classmethod
    def from_indices(cls, shape, rows, cols) -> "ObservationMask":
        rows = np.asarray(rows, dtype=np.int64).ravel()
        cols = np.asarray(cols, dtype=np.int64).ravel()
        if rows.shape != cols.shape:
            raise ValueError("rows and cols must have equal length")
        n_rows, n_cols = shape
        if rows.size and (rows.min() < 0 or rows.max() >= n_rows
                          or cols.min() < 0 or cols.max() >= n_cols):
            raise IndexError(f"mask index out of range for shape {tuple(shape)}")
        grid = np.zeros(shape, dtype=bool)
        grid[rows, cols] = True
        return cls.from_dense(grid)

    @classmethod
    def full(cls, shape) -> "ObservationMask":
        return cls.from_dense(np.ones(shape, dtype=bool))

    @classmethod
    def empty(cls, shape) -> "ObservationMask":
        return cls.from_dense(np.zeros(shape, dtype=bool))

    @classmethod
    def from_values(cls, values: np.ndarray) -> "ObservationMask":
        """Observed wherever ``values`` is finite."""
        return cls.from_dense(np.isfinite(values))

    @property
    def shape(self) -> tuple[int, int]:
        return self._shape

    @property
    def observed_count(self) -> int:
        return self._count

    @property
    def is_dense(self) -> bool:
        return self._grid is not None

    def __len__(self) -> int:
        return self._count

    def to_dense(self) -> np.ndarray:
        """Read-only boolean grid of the observed positions."""
        if self._grid is not None:
            return self._grid
        grid = np.zeros(self._shape, dtype=bool)
        grid.ravel()[self._flat] = True
        grid.setflags(write=False)
        return grid

    def flat_indices(self) -> np.ndarray:
        """Sorted row-major flat indices of the observed positions."""
        if self._flat is not None:
            return self._flat
        return np.flatnonzero(self._grid)

    def indices(self) -> tuple[np.ndarray, np.ndarray]:
        """``(rows, cols)`` of the observed positions in row-major order."""
        return np.unravel_index(self.flat_indices(), self._shape)

    def __contains__(self, item) -> bool:
        m, n = item
        if not (0 <= m < self._shape[0] and 0 <= n < self._shape[1]):
            return False
        if self._grid is not None:
            return bool(self._grid[m, n])
        flat = m * self._shape[1] + n
        pos = np.searchsorted(self._flat, flat)
        return bool(pos < self._flat.size and self._flat[pos] == flat)

    def __eq__(self, other) -> bool:
        if not isinstance(other, ObservationMask):
            return NotImplemented
        return (self._shape == other._shape
                and np.array_equal(self.flat_indices(), other.flat_indices()))

    def __hash__(self):
        return hash((self._shape, self._count))

    def __repr__(self) -> str:
        kind = "dense" if self.is_dense else "sparse"
        return f"ObservationMask(shape={self._shape}, observed={self._count}, {kind})"

    def _check_same_shape(self, other: "ObservationMask") -> None:
        if self._shape != other._shape:
            raise ValueError(f"mask shapes differ: {self._shape} vs {other._shape}")

    def union(self, other: "ObservationMask") -> "ObservationMask":
        self._check_same_shape(other)
        return ObservationMask.from_dense(self.to_dense() | other.to_dense())

    def intersection(self, other: "ObservationMask") -> "ObservationMask":
        self._check_same_shape(other)
        return ObservationMask.from_dense(self.to_dense() & other.to_dense())

    def difference(self, other: "ObservationMask") -> "ObservationMask":
        self._check_same_shape(other)
        return ObservationMask.from_dense(self.to_dense() & ~other.to_dense())

    def complement(self) -> "ObservationMask":
        return ObservationMask.from_dense(~self.to_dense())

    def isdisjoint(self, other: "ObservationMask") -> bool:
        self._check_same_shape(other)
        return not np.any(self.to_dense() & other.to_dense())


def _check_mask(y: np.ndarray, mask: ObservationMask) -> None:
    if y.shape != mask.shape:
        raise ValueError(f"matrix shape {y.shape} does not match mask shape {mask.shape}")


def project(y: np.ndarray, mask: ObservationMask) -> np.ndarray:
    """Keep ``y`` on the observed positions and zero it elsewhere."""
    _check_mask(y, mask)
    return np.where(mask.to_dense(), y, 0.0)


def overwrite_observed(z: np.ndarray, y: np.ndarray, mask: ObservationMask) -> np.ndarray:
    """``y`` on the observed positions, ``z`` elsewhere."""
    if z.shape != y.shape:
        raise ValueError(f"shape mismatch: {z.shape} vs {y.shape}")
    _check_mask(y, mask)
    return np.where(mask.to_dense(), y, z)
