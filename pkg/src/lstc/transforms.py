"""Orthogonal transforms applied along the day mode (mode 3)."""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field

import numpy as np

from .tensor import TensorDims, fold, unfold

__all__ = [
    "TransformMatrix",
    "forward",
    "inverse",
    "fit_data_driven",
    "dct_matrix",
    "identity",
    "make_transform",
    "canonicalize_signs",
    "TRANSFORM_KINDS",
]

TRANSFORM_KINDS = ("data-driven", "dct", "identity", "custom")


@dataclass(frozen=True, eq=False)
class TransformMatrix:
    """A ``J x J`` orthogonal matrix ``phi``.

    The forward transform of a tensor is ``fold3(phi.T @ unfold3(x))``.
    ``degenerate`` is set when a data-driven fit had nothing to fit and fell
    back to the identity.
    """

    matrix: np.ndarray
    kind: str = "custom"
    degenerate: bool = False
    singular_values: np.ndarray | None = field(default=None, repr=False)

    def __post_init__(self):
        mat = np.array(self.matrix, dtype=float)
        if mat.ndim != 2 or mat.shape[0] != mat.shape[1] or mat.shape[0] < 1:
            raise ValueError(f"transform matrix must be square and non-empty, got {mat.shape}")
        if self.kind not in TRANSFORM_KINDS:
            raise ValueError(f"unknown transform kind {self.kind!r}")
        mat.setflags(write=False)
        object.__setattr__(self, "matrix", mat)

    @property
    def order(self) -> int:
        return self.matrix.shape[0]

    def orthogonality_error(self) -> float:
        """``max |phi.T phi - I|``."""
        return float(np.max(np.abs(self.matrix.T @ self.matrix - np.eye(self.order))))

    def with_signs(self, signs) -> "TransformMatrix":
        """Copy with column ``k`` multiplied by ``signs[k]``."""
        return TransformMatrix(self.matrix * np.asarray(signs, dtype=float), kind="custom")


def _check_order(x: np.ndarray, phi: TransformMatrix) -> TensorDims:
    dims = TensorDims.from_tensor(x)
    if phi.order != dims.days:
        raise ValueError(f"transform order {phi.order} does not match {dims.days} days")
    return dims


def forward(x: np.ndarray, phi: TransformMatrix) -> np.ndarray:
    dims = _check_order(x, phi)
    return fold(phi.matrix.T @ unfold(x, 3), 3, dims)


def inverse(x: np.ndarray, phi: TransformMatrix) -> np.ndarray:
    dims = _check_order(x, phi)
    return fold(phi.matrix @ unfold(x, 3), 3, dims)


def canonicalize_signs(mat: np.ndarray) -> np.ndarray:
    """Flip columns so that each column's largest-magnitude entry is positive.

    Ties go to the lowest row index.
    """
    mat = np.array(mat, dtype=float)
    if mat.size == 0:
        return mat
    pivot = np.argmax(np.abs(mat), axis=0)
    signs = np.sign(mat[pivot, np.arange(mat.shape[1])])
    signs[signs == 0] = 1.0
    return mat * signs


def fit_data_driven(x: np.ndarray) -> TransformMatrix:
    """Left singular vectors of the mode-3 unfolding, by descending singular value.

    Computed from the ``J x J`` Gram matrix of the unfolding, which is cheap
    because the number of days is small compared with ``M * I``.
    """
    a = unfold(np.asarray(x, dtype=float), 3)
    if not np.all(np.isfinite(a)):
        raise ValueError("cannot fit a transform to non-finite data")
    n_days = a.shape[0]
    if not np.any(a):
        warnings.warn("all-zero tensor: falling back to the identity transform",
                      RuntimeWarning, stacklevel=2)
        return TransformMatrix(np.eye(n_days), kind="data-driven", degenerate=True,
                               singular_values=np.zeros(n_days))
    gram = a @ a.T
    evals, evecs = np.linalg.eigh(gram)
    order = np.argsort(-evals, kind="stable")
    evecs = canonicalize_signs(evecs[:, order])
    svals = np.sqrt(np.clip(evals[order], 0.0, None))
    return TransformMatrix(evecs, kind="data-driven", singular_values=svals)


def dct_matrix(n: int) -> TransformMatrix:
    """Orthonormal DCT-II matrix ``C`` with ``C[k, n] = s_k cos(pi (2n+1) k / 2N)``.

    The returned transform stores ``C.T`` so that the forward transform
    ``phi.T @ unfold3(x)`` is the DCT of every tube.
    """
    if int(n) != n or n < 1:
        raise ValueError(f"DCT order must be a positive integer, got {n!r}")
    n = int(n)
    k = np.arange(n)[:, None]
    t = np.arange(n)[None, :]
    c = np.sqrt(2.0 / n) * np.cos(np.pi * (2 * t + 1) * k / (2 * n))
    c[0, :] /= np.sqrt(2.0)
    return TransformMatrix(c.T, kind="dct")


def identity(n: int) -> TransformMatrix:
    return TransformMatrix(np.eye(int(n)), kind="identity")


def make_transform(kind: str, x: np.ndarray) -> TransformMatrix:
    """Build a transform of the given kind for tensor ``x``."""
    n_days = x.shape[2]
    if kind == "data-driven":
        return fit_data_driven(x)
    if kind == "dct":
        return dct_matrix(n_days)
    if kind == "identity":
        return identity(n_days)
    raise ValueError(f"unknown transform kind {kind!r}")
