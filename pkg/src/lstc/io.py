"""File formats, run manifests and synthetic data.

Binary dataset layout (all little-endian)::

    offset  size  field
    0       8     magic  b"LSTCDAT\\0"
    8       4     uint32 format version (1)
    12      4     uint32 reserved, zero
    16      8     uint64 M (sensors)
    24      8     uint64 I (intervals per day)
    32      8     uint64 J (days)
    40      8*M*I*J  float64 values, row-major over (sensor, time)

Time index ``t = day * I + interval``. Unobserved entries are NaN.

Delimited datasets are comma-separated, one sensor per line, with ``nan``
for unobserved entries. They carry no shape, so ``I`` and ``J`` have to be
supplied when reading.
"""

from __future__ import annotations

import contextlib
import json
import os
import struct
import tempfile
from dataclasses import asdict, dataclass, field
from pathlib import Path

import numpy as np

from .evaluation import MaskSpec
from .solver import SolverConfig
from .tensor import ObservationMask, TensorDims, matricize
from .transforms import TransformMatrix, inverse

__all__ = [
    "FormatError",
    "MAGIC",
    "VERSION",
    "RunManifest",
    "atomic_write",
    "read_matrix",
    "write_matrix",
    "read_dataset",
    "from_day_major",
    "load_day_major",
    "synth",
    "synth_tensor",
    "random_orthogonal",
]

MAGIC = b"LSTCDAT\0"
VERSION = 1
_HEADER = struct.Struct("<8sII3Q")


class FormatError(ValueError):
    pass


@contextlib.contextmanager
def atomic_write(path, mode="wb"):
    """Write to a temporary sibling and rename it over ``path`` on success."""
    path = Path(path)
    fd, tmp = tempfile.mkstemp(prefix=f".{path.name}.", dir=path.parent or ".")
    try:
        with os.fdopen(fd, mode) as fh:
            yield fh
        os.replace(tmp, path)
    except BaseException:
        with contextlib.suppress(FileNotFoundError):
            os.unlink(tmp)
        raise


def _guess_format(path) -> str:
    return "delimited" if Path(path).suffix.lower() in (".csv", ".txt", ".tsv") else "binary"


def write_matrix(path, matrix: np.ndarray, mask: ObservationMask, dims: TensorDims,
                 fmt: str | None = None) -> None:
    """Write ``matrix`` with unobserved entries as NaN."""
    fmt = fmt or _guess_format(path)
    matrix = np.asarray(matrix, dtype=float)
    if matrix.shape != dims.matrix_shape or mask.shape != dims.matrix_shape:
        raise ValueError(f"matrix {matrix.shape} / mask {mask.shape} do not match {dims}")
    values = np.where(mask.to_dense(), matrix, np.nan)
    if fmt == "binary":
        with atomic_write(path, "wb") as fh:
            fh.write(_HEADER.pack(MAGIC, VERSION, 0, *dims.tensor_shape))
            fh.write(values.astype("<f8").tobytes(order="C"))
    elif fmt == "delimited":
        with atomic_write(path, "w") as fh:
            np.savetxt(fh, values, fmt="%.17g", delimiter=",")
    else:
        raise ValueError(f"unknown format {fmt!r}")


def read_matrix(path, fmt: str | None = None, intervals: int | None = None,
                days: int | None = None):
    """Read a dataset file.

    Returns ``(matrix, mask, dims)``. The matrix is zero wherever the file
    holds NaN, and the mask marks the finite entries.
    """
    fmt = fmt or _guess_format(path)
    if fmt == "binary":
        raw = Path(path).read_bytes()
        if len(raw) < _HEADER.size:
            raise FormatError(f"{path}: truncated header")
        magic, version, _, m, i, j = _HEADER.unpack_from(raw)
        if magic != MAGIC:
            raise FormatError(f"{path}: bad magic {magic!r}")
        if version != VERSION:
            raise FormatError(f"{path}: unsupported version {version}")
        try:
            dims = TensorDims(m, i, j)
        except ValueError as exc:
            raise FormatError(f"{path}: {exc}") from exc
        payload = len(raw) - _HEADER.size
        if payload != 8 * m * i * j:
            raise FormatError(
                f"{path}: header declares {m}x{i}x{j} values but payload holds {payload / 8:g}"
            )
        values = np.frombuffer(raw, dtype="<f8", offset=_HEADER.size).reshape(m, i * j)
        values = values.astype(float)
    elif fmt == "delimited":
        if intervals is None or days is None:
            raise ValueError("delimited input needs the number of intervals and days")
        try:
            values = np.loadtxt(path, delimiter=",", dtype=float, ndmin=2)
        except ValueError as exc:
            raise FormatError(f"{path}: {exc}") from exc
        if values.shape[1] != intervals * days:
            raise FormatError(
                f"{path}: {values.shape[1]} columns cannot be split into "
                f"{intervals} intervals x {days} days"
            )
        dims = TensorDims(values.shape[0], intervals, days)
    else:
        raise ValueError(f"unknown format {fmt!r}")

    if np.any(np.isinf(values)):
        raise FormatError(f"{path}: infinite values are not allowed")
    mask = ObservationMask.from_values(values)
    return np.nan_to_num(values, nan=0.0), mask, dims


def read_dataset(path, fmt=None, intervals=None, days=None):
    """:func:`read_matrix`, also accepting day-major ``.mat``/``.npy`` tensors."""
    suffix = Path(path).suffix.lower()
    if suffix in (".mat", ".npy", ".npz"):
        return load_day_major(path)
    return read_matrix(path, fmt=fmt, intervals=intervals, days=days)


def from_day_major(tensor: np.ndarray, zero_is_missing: bool = True):
    """Convert a ``sensor x day x interval`` array to ``(matrix, mask, dims)``.

    This is how the public traffic speed tensors are distributed; zeros and
    NaNs there mark missing readings.
    """
    tensor = np.asarray(tensor, dtype=float)
    if tensor.ndim != 3:
        raise ValueError(f"expected a 3-D array, got shape {tensor.shape}")
    m, j, i = tensor.shape
    matrix = tensor.reshape(m, j * i)
    observed = np.isfinite(matrix)
    if zero_is_missing:
        observed &= matrix != 0
    dims = TensorDims(m, i, j)
    return np.where(observed, matrix, 0.0), ObservationMask.from_dense(observed), dims


def load_day_major(path, key: str = "tensor"):
    """Load a day-major tensor from ``.mat`` (variable ``key``) or ``.npy``/``.npz``."""
    suffix = Path(path).suffix.lower()
    if suffix == ".mat":
        from scipy.io import loadmat
        arr = loadmat(path)[key]
    elif suffix == ".npz":
        with np.load(path) as data:
            arr = data[key]
    else:
        arr = np.load(path)
    return from_day_major(arr)


@dataclass
class RunManifest:
    """Everything needed to repeat one CLI invocation."""

    command: str
    inputs: dict = field(default_factory=dict)
    outputs: dict = field(default_factory=dict)
    mask_spec: dict | None = None
    solver_config: dict | None = None
    seed: int | None = None
    parameters: dict = field(default_factory=dict)
    results: dict = field(default_factory=dict)
    tool_version: str = ""

    def to_json(self) -> str:
        return json.dumps(asdict(self), indent=2, sort_keys=True)

    @classmethod
    def from_json(cls, text: str) -> "RunManifest":
        return cls(**json.loads(text))

    def write(self, path) -> None:
        with atomic_write(path, "w") as fh:
            fh.write(self.to_json() + "\n")

    @classmethod
    def read(cls, path) -> "RunManifest":
        return cls.from_json(Path(path).read_text())

    def mask(self) -> MaskSpec | None:
        return MaskSpec(**self.mask_spec) if self.mask_spec else None

    def config(self) -> SolverConfig | None:
        return SolverConfig(**self.solver_config) if self.solver_config else None


def random_orthogonal(n: int, rng: np.random.Generator) -> np.ndarray:
    """Haar-distributed ``n x n`` orthogonal matrix."""
    q, r = np.linalg.qr(rng.standard_normal((n, n)))
    return q * np.sign(np.diag(r))


def synth_tensor(dims: TensorDims, rank: int, noise: float = 0.0, seed: int = 0):
    """Random tensor whose slices have rank ``<= rank`` under a random transform.

    Returns ``(tensor, phi)`` where ``phi`` is the generating orthogonal
    transform: ``forward(tensor, phi)`` (before noise) has rank-``rank``
    frontal slices. The transformed slices have decaying energy so that the
    day-mode spectrum is not flat.
    """
    if int(rank) != rank or not 1 <= rank <= min(dims.sensors, dims.intervals):
        raise ValueError(f"rank must be in [1, {min(dims.sensors, dims.intervals)}], got {rank}")
    if noise < 0:
        raise ValueError(f"noise must be nonnegative, got {noise}")
    rng = np.random.default_rng(seed)
    m, i, j = dims.tensor_shape
    phi = TransformMatrix(random_orthogonal(j, rng), kind="custom")
    a = rng.standard_normal((j, m, rank))
    if rank * j <= i:
        # orthonormal interval factors across all slices make the transformed
        # slices mutually orthogonal, so phi is the data's own day-mode basis
        q = random_orthogonal(i, rng)[:, :rank * j]
        b = np.sqrt(i) * q.T.reshape(j, rank, i).transpose(0, 2, 1)
    else:
        b = rng.standard_normal((j, i, rank))
    weights = 1.0 / np.arange(1, j + 1)
    core = np.einsum("jmr,jir->mij", a, b) * weights / np.sqrt(rank)
    x = inverse(core, phi)
    if noise > 0:
        x = x + noise * rng.standard_normal(x.shape)
    return x, phi


def synth(dims: TensorDims, rank: int, noise: float = 0.0, seed: int = 0) -> np.ndarray:
    """Matricized :func:`synth_tensor`."""
    return matricize(synth_tensor(dims, rank, noise, seed)[0])
