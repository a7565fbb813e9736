"""Command-line front end: ``lstc synth|mask|impute|eval|spectrum|convert``."""

from __future__ import annotations

import argparse
import csv
import json
import logging
import sys
from pathlib import Path

import numpy as np

from . import __version__
from .evaluation import MaskSpec, evaluate, generate_mask, residuals, spectrum
from .io import RunManifest, atomic_write, read_dataset, synth, write_matrix
from .solver import SolverConfig, run
from .tensor import ObservationMask, TensorDims, tensorize
from .transforms import make_transform

log = logging.getLogger("lstc")

# CLI names for the transform kinds
TRANSFORMS = {"unitary": "data-driven", "dct": "dct", "identity": "identity"}


class CliError(Exception):
    pass


def _manifest_path(args, output) -> Path:
    return Path(args.manifest) if args.manifest else Path(f"{output}.manifest.json")


def _read(args, path):
    return read_dataset(path, fmt=args.format, intervals=args.intervals, days=args.days)


def _emit(args, manifest: RunManifest, output) -> None:
    manifest.tool_version = __version__
    path = _manifest_path(args, output)
    manifest.outputs.setdefault("manifest", str(path))
    manifest.write(path)


def cmd_synth(args) -> None:
    dims = TensorDims(args.sensors, args.intervals_per_day, args.n_days)
    y = synth(dims, args.rank, args.noise, args.seed) + args.offset
    write_matrix(args.output, y, ObservationMask.full(dims.matrix_shape), dims, args.format)
    _emit(args, RunManifest(
        command="synth",
        outputs={"dataset": str(args.output)},
        seed=args.seed,
        parameters={"dims": list(dims.tensor_shape), "rank": args.rank,
                    "noise": args.noise, "offset": args.offset},
    ), args.output)


def cmd_mask(args) -> None:
    y, base, dims = _read(args, args.input)
    spec = MaskSpec(args.pattern, args.rate, args.seed, exact=args.exact)
    train, test = generate_mask(base, dims, spec)
    write_matrix(args.output, y, train, dims, args.format)
    write_matrix(args.test, y, test, dims, args.format)
    _emit(args, RunManifest(
        command="mask",
        inputs={"dataset": str(args.input)},
        outputs={"train": str(args.output), "test": str(args.test)},
        mask_spec={"pattern": spec.pattern, "rate": spec.rate, "seed": spec.seed,
                   "exact": spec.exact},
        seed=args.seed,
        results={"n_train": train.observed_count, "n_test": test.observed_count},
    ), args.output)


def cmd_impute(args) -> None:
    y, mask, dims = _read(args, args.input)
    config = SolverConfig(
        rho0=args.rho0,
        rho_max=args.rho_max,
        lambda_coef=args.lambda_coef,
        epsilon=args.epsilon,
        max_iters=args.max_iters,
        phi_refresh_period=args.refresh,
        transform_kind=TRANSFORMS[args.transform],
        seed=args.seed,
        workers=args.workers,
    )
    recovered, trace = run(y, mask, dims, config)
    write_matrix(args.output, recovered, ObservationMask.full(dims.matrix_shape), dims,
                 args.format)
    trace_path = args.trace or f"{args.output}.trace.csv"
    with atomic_write(trace_path, "w") as fh:
        fh.write(trace.to_csv())
    status = "converged" if trace.converged else "stopped at max_iters"
    print(f"{status} after {trace.iterations} iterations")
    _emit(args, RunManifest(
        command="impute",
        inputs={"dataset": str(args.input)},
        outputs={"recovered": str(args.output), "trace": str(trace_path)},
        solver_config=config.to_dict(),
        seed=args.seed,
        results={"iterations": trace.iterations, "converged": trace.converged,
                 "final_metric": trace.records[-1].metric},
    ), args.output)


def cmd_eval(args) -> None:
    truth, test, dims = _read(args, args.truth)
    recovered, _, rec_dims = _read(args, args.recovered)
    if rec_dims != dims:
        raise CliError(f"dimension mismatch: truth {dims.tensor_shape}, "
                       f"recovered {rec_dims.tensor_shape}")
    report = evaluate(truth, recovered, test)
    with atomic_write(args.output, "w") as fh:
        json.dump(report.to_dict(), fh, indent=2)
        fh.write("\n")
    outputs = {"report": str(args.output)}
    if args.residuals:
        res = residuals(truth, recovered, test)
        with atomic_write(args.residuals, "w") as fh:
            fh.write("residual\n")
            np.savetxt(fh, res, fmt="%.17g")
        outputs["residuals"] = str(args.residuals)
    print(f"MAPE {report.mape:.4f}  RMSE {report.rmse:.4f}  n={report.n_eval}")
    _emit(args, RunManifest(
        command="eval",
        inputs={"truth": str(args.truth), "recovered": str(args.recovered)},
        outputs=outputs,
        results=report.to_dict(),
    ), args.output)


def cmd_spectrum(args) -> None:
    y, _, dims = _read(args, args.input)
    x = tensorize(y, dims)
    phi = make_transform(TRANSFORMS[args.transform], x)
    svals = spectrum(x, phi)
    with atomic_write(args.output, "w") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["slice", "index", "singular_value"])
        for j, row in enumerate(svals):
            for k, value in enumerate(row):
                writer.writerow([j, k, repr(float(value))])
    _emit(args, RunManifest(
        command="spectrum",
        inputs={"dataset": str(args.input)},
        outputs={"spectrum": str(args.output)},
        parameters={"transform": args.transform},
    ), args.output)


def cmd_convert(args) -> None:
    # --format names the output here; the input format follows its extension
    y, mask, dims = read_dataset(args.input, intervals=args.intervals, days=args.days)
    write_matrix(args.output, y, mask, dims, args.format)
    print(f"{dims.sensors} x {dims.intervals} x {dims.days}, "
          f"{mask.observed_count} observed entries")
    _emit(args, RunManifest(
        command="convert",
        inputs={"dataset": str(args.input)},
        outputs={"dataset": str(args.output)},
        parameters={"dims": list(dims.tensor_shape)},
    ), args.output)


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--format", choices=["binary", "delimited"], default=None,
                        help="file format (default: by extension, .csv is delimited)")
    common.add_argument("--intervals", type=int, help="intervals per day of delimited input")
    common.add_argument("--days", type=int, help="number of days of delimited input")
    common.add_argument("--manifest", help="manifest path (default: <output>.manifest.json)")
    common.add_argument("-v", "--verbose", action="store_true")

    parser = argparse.ArgumentParser(prog="lstc", description=__doc__)
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("synth", parents=[common], help="generate a low-tubal-rank dataset")
    p.add_argument("-o", "--output", required=True)
    p.add_argument("--sensors", type=int, required=True)
    p.add_argument("--intervals-per-day", type=int, required=True)
    p.add_argument("--n-days", type=int, required=True)
    p.add_argument("--rank", type=int, default=3)
    p.add_argument("--noise", type=float, default=0.0)
    p.add_argument("--offset", type=float, default=0.0, help="constant added to every entry")
    p.add_argument("--seed", type=int, default=0)
    p.set_defaults(func=cmd_synth)

    p = sub.add_parser("mask", parents=[common], help="hold out entries for evaluation")
    p.add_argument("input")
    p.add_argument("-o", "--output", required=True, help="training dataset")
    p.add_argument("--test", required=True, help="held-out entries with their true values")
    p.add_argument("--pattern", choices=["rm", "nm"], default="rm")
    p.add_argument("--rate", type=float, required=True)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--exact", action="store_true", help="mask an exact quota, not a probability")
    p.set_defaults(func=cmd_mask)

    p = sub.add_parser("impute", parents=[common], help="complete a dataset")
    p.add_argument("input")
    p.add_argument("-o", "--output", required=True)
    p.add_argument("--trace", help="trace path (default: <output>.trace.csv)")
    p.add_argument("--transform", choices=sorted(TRANSFORMS), default="unitary")
    p.add_argument("--rho0", type=float, default=1e-3)
    p.add_argument("--rho-max", type=float, default=None)
    p.add_argument("--lambda-coef", type=float, default=1e-3, help="c in lambda = c * rho")
    p.add_argument("--epsilon", type=float, default=1e-3)
    p.add_argument("--max-iters", type=int, default=200)
    p.add_argument("--refresh", type=int, default=10, help="transform refresh period, 0 = never")
    p.add_argument("--workers", type=int, default=None)
    p.add_argument("--seed", type=int, default=0)
    p.set_defaults(func=cmd_impute)

    p = sub.add_parser("eval", parents=[common], help="score a completion")
    p.add_argument("--truth", required=True, help="held-out dataset written by `mask`")
    p.add_argument("--recovered", required=True)
    p.add_argument("-o", "--output", required=True, help="report (JSON)")
    p.add_argument("--residuals", help="write truth - recovered per held-out entry")
    p.set_defaults(func=cmd_eval)

    p = sub.add_parser("spectrum", parents=[common],
                       help="singular values of every transformed slice")
    p.add_argument("input")
    p.add_argument("-o", "--output", required=True)
    p.add_argument("--transform", choices=sorted(TRANSFORMS), default="unitary")
    p.set_defaults(func=cmd_spectrum)

    p = sub.add_parser("convert", parents=[common],
                       help="convert between dataset formats, including .mat/.npy tensors")
    p.add_argument("input")
    p.add_argument("-o", "--output", required=True)
    p.set_defaults(func=cmd_convert)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        args.func(args)
    except (CliError, ValueError, OSError, ArithmeticError, KeyError) as exc:
        print(f"lstc {args.command}: error: {exc}", file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
