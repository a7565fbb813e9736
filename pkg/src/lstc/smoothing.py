"""Quadratic-variation smoothing along the time axis.

The smoothing step solves

    min_Z  1/2 ||Psi Z^T||_F^2 + alpha/2 ||Z - B||_F^2

where ``Psi`` is the ``(T-1) x T`` first-difference matrix. Its solution
satisfies ``Z (Psi^T Psi + alpha I) = alpha B``. The system matrix is
tridiagonal, so every row of ``Z`` costs O(T).
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

__all__ = [
    "SmoothingSystem",
    "quadratic_variation",
    "quadratic_variation_matrix_form",
    "difference_matrix",
    "build_system",
    "solve_smoothing",
]


def quadratic_variation(z: np.ndarray) -> float:
    """``sum_{t=2..T} ||z_t - z_{t-1}||^2`` over the columns of ``z``."""
    z = np.asarray(z, dtype=float)
    if z.ndim != 2:
        raise ValueError(f"expected a matrix, got ndim={z.ndim}")
    d = np.diff(z, axis=1)
    return float(np.sum(d * d))


def difference_matrix(n: int) -> np.ndarray:
    """Dense ``(n-1) x n`` matrix ``[0 I] - [I 0]``."""
    eye = np.eye(n - 1) if n > 1 else np.zeros((0, 0))
    zero = np.zeros((n - 1, 1))
    return np.hstack([zero, eye]) - np.hstack([eye, zero])


def quadratic_variation_matrix_form(z: np.ndarray) -> float:
    """``||Psi Z^T||_F^2`` with an explicit dense difference matrix."""
    z = np.asarray(z, dtype=float)
    psi = difference_matrix(z.shape[1])
    return float(np.linalg.norm(psi @ z.T) ** 2)


@dataclass(frozen=True)
class SmoothingSystem:
    """Tridiagonal ``Psi^T Psi + alpha I`` of order ``T``.

    The main diagonal is ``(1+a, 2+a, ..., 2+a, 1+a)`` (``a`` alone when
    ``T == 1``) and both off-diagonals are ``-1``. The forward-elimination
    pivots are computed once at construction.
    """

    size: int
    alpha: float
    diagonal: np.ndarray = field(repr=False)
    off_diagonal: np.ndarray = field(repr=False)
    _pivots: np.ndarray = field(repr=False, compare=False)
    _upper: np.ndarray = field(repr=False, compare=False)

    def dense(self) -> np.ndarray:
        mat = np.diag(self.diagonal)
        if self.size > 1:
            mat += np.diag(self.off_diagonal, 1) + np.diag(self.off_diagonal, -1)
        return mat


def build_system(size: int, alpha: float) -> SmoothingSystem:
    if int(size) != size or size < 1:
        raise ValueError(f"time length must be a positive integer, got {size!r}")
    if not alpha > 0:
        raise ValueError(f"alpha must be positive, got {alpha!r}")
    size = int(size)
    alpha = float(alpha)

    diag = np.full(size, 2.0 + alpha)
    if size == 1:
        diag[0] = alpha
    else:
        diag[0] = diag[-1] = 1.0 + alpha
    off = np.full(size - 1, -1.0)

    # Thomas elimination: pivots[i] = d_i - l_i * upper[i-1], upper[i] = u_i / pivots[i]
    pivots = np.empty(size)
    upper = np.empty(max(size - 1, 0))
    pivots[0] = diag[0]
    for i in range(1, size):
        upper[i - 1] = off[i - 1] / pivots[i - 1]
        pivots[i] = diag[i] - off[i - 1] * upper[i - 1]
    for arr in (diag, off, pivots, upper):
        arr.setflags(write=False)
    return SmoothingSystem(size, alpha, diag, off, pivots, upper)


def solve_smoothing(b: np.ndarray, system: SmoothingSystem) -> np.ndarray:
    """Solve ``Z (Psi^T Psi + alpha I) = alpha b`` for ``Z``.

    All rows of ``b`` are eliminated together, one time step at a time.
    """
    b = np.asarray(b, dtype=float)
    if b.ndim != 2 or b.shape[1] != system.size:
        raise ValueError(f"right-hand side must have {system.size} columns, got shape {b.shape}")
    n = system.size
    piv, up, off = system._pivots, system._upper, system.off_diagonal

    # time-major copy so each step touches one contiguous row
    work = np.ascontiguousarray(system.alpha * b.T)
    work[0] /= piv[0]
    for i in range(1, n):
        work[i] -= off[i - 1] * work[i - 1]
        work[i] /= piv[i]
    for i in range(n - 2, -1, -1):
        work[i] -= up[i] * work[i + 1]
    return np.ascontiguousarray(work.T)
