"""Singular value thresholding for matrices and for transformed tensors."""

from __future__ import annotations

import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from .tensor import TensorDims, fold, unfold
from .transforms import TransformMatrix

__all__ = [
    "NumericalBreakdown",
    "SvtReport",
    "matrix_svt",
    "tensor_svt",
]

# Relative cutoff below which a singular value is reported as zero rank.
RANK_RTOL = 1e-12

# Slices smaller than this many entries are thresholded serially.
_PARALLEL_MIN_SIZE = 100_000


class NumericalBreakdown(ArithmeticError):
    """An SVD failed to converge or produced non-finite output."""

    def __init__(self, message, slice_index=None):
        if slice_index is not None:
            message = f"slice {slice_index}: {message}"
        super().__init__(message)
        self.slice_index = slice_index


@dataclass(frozen=True)
class SvtReport:
    tau: float
    rank: int
    largest: float
    smallest: float
    slice_index: int | None = None
    nuclear_norm: float = 0.0


def matrix_svt(a: np.ndarray, tau: float, slice_index: int | None = None):
    """Shrink the singular values of ``a`` by ``tau`` and truncate at zero.

    Returns ``(result, report)``. ``result`` is the minimiser of
    ``||X||_* + ||X - a||_F^2 / (2 tau)``.
    """
    if not tau > 0:
        raise ValueError(f"tau must be positive, got {tau!r}")
    a = np.asarray(a, dtype=float)
    if a.ndim != 2:
        raise ValueError(f"expected a matrix, got ndim={a.ndim}")
    if a.size == 0:
        return a.copy(), SvtReport(tau, 0, 0.0, 0.0, slice_index)
    if not np.all(np.isfinite(a)):
        raise NumericalBreakdown("non-finite input to SVT", slice_index)

    # factor the short side so U/V stay thin whichever way the slice is oriented
    wide = a.shape[0] < a.shape[1]
    work = a.T if wide else a
    try:
        u, s, vt = np.linalg.svd(work, full_matrices=False)
    except np.linalg.LinAlgError as exc:
        raise NumericalBreakdown(f"SVD did not converge ({exc})", slice_index) from exc

    shrunk = np.maximum(s - tau, 0.0)
    k = int(np.count_nonzero(shrunk))
    out = (u[:, :k] * shrunk[:k]) @ vt[:k]
    if wide:
        out = out.T

    cutoff = RANK_RTOL * s[0] if s.size else 0.0
    kept = shrunk[shrunk > cutoff]
    report = SvtReport(
        tau=float(tau),
        rank=int(kept.size),
        largest=float(kept[0]) if kept.size else 0.0,
        smallest=float(kept[-1]) if kept.size else 0.0,
        slice_index=slice_index,
        nuclear_norm=float(shrunk.sum()),
    )
    return np.ascontiguousarray(out), report


def tensor_svt(z: np.ndarray, phi: TransformMatrix, tau: float,
               workers: int | None = None, return_reports: bool = False):
    """Slice-wise SVT of ``z`` in the domain of the transform ``phi``.

    Every frontal slice of the forward-transformed tensor is thresholded
    with :func:`matrix_svt` and the result is mapped back with the inverse
    transform. Slices are independent and run on a thread pool when they are
    large; each worker writes its own slice, so the result does not depend
    on scheduling.
    """
    dims = TensorDims.from_tensor(z)
    if phi.order != dims.days:
        raise ValueError(f"transform order {phi.order} does not match {dims.days} days")
    if not tau > 0:
        raise ValueError(f"tau must be positive, got {tau!r}")

    transformed = fold(phi.matrix.T @ unfold(z, 3), 3, dims)
    shrunk = np.empty_like(transformed)
    reports: list[SvtReport | None] = [None] * dims.days

    def work(j):
        shrunk[:, :, j], reports[j] = matrix_svt(transformed[:, :, j], tau, slice_index=j)

    if workers is None:
        big = dims.sensors * dims.intervals >= _PARALLEL_MIN_SIZE
        workers = min(dims.days, os.cpu_count() or 1) if big else 1
    if workers > 1 and dims.days > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            list(pool.map(work, range(dims.days)))
    else:
        for j in range(dims.days):
            work(j)

    out = fold(phi.matrix @ unfold(shrunk, 3), 3, dims)
    if return_reports:
        return out, reports
    return out
