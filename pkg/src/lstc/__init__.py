"""Low-tubal-rank smoothing tensor completion for spatiotemporal data."""

from importlib.metadata import PackageNotFoundError, version

try:
    __version__ = version("artifact")
except PackageNotFoundError:
    __version__ = "0.0.0"

from .evaluation import EvalReport, MaskSpec, evaluate, generate_mask, residuals, spectrum
from .proximal import NumericalBreakdown, SvtReport, matrix_svt, tensor_svt
from .smoothing import build_system, quadratic_variation, solve_smoothing
from .solver import SolverConfig, SolverTrace, run
from .tensor import (
    ObservationMask,
    TensorDims,
    fold,
    matricize,
    overwrite_observed,
    project,
    tensorize,
    unfold,
)
from .transforms import TransformMatrix, dct_matrix, fit_data_driven, forward, identity, inverse

__all__ = [
    "EvalReport",
    "MaskSpec",
    "NumericalBreakdown",
    "ObservationMask",
    "SolverConfig",
    "SolverTrace",
    "SvtReport",
    "TensorDims",
    "TransformMatrix",
    "build_system",
    "dct_matrix",
    "evaluate",
    "fit_data_driven",
    "fold",
    "forward",
    "generate_mask",
    "identity",
    "inverse",
    "matricize",
    "matrix_svt",
    "overwrite_observed",
    "project",
    "quadratic_variation",
    "residuals",
    "run",
    "solve_smoothing",
    "spectrum",
    "tensor_svt",
    "tensorize",
    "unfold",
]
