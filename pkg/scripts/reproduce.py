"""Run the benchmark table cells on a downloaded dataset.

    python3 scripts/reproduce.py guangzhou path/to/tensor.mat
    python3 scripts/reproduce.py pems path/to/pems-4w.npy --cells rm:0.3
"""

import argparse
import logging

from lstc.reproduce import benchmark

CELLS = ["rm:0.3", "rm:0.7", "nm:0.3", "nm:0.7"]


def main():
    parser = argparse.ArgumentParser(description=__doc__,
                                     formatter_class=argparse.RawDescriptionHelpFormatter)
    parser.add_argument("dataset", choices=["guangzhou", "pems", "london"])
    parser.add_argument("path")
    parser.add_argument("--cells", nargs="+", default=CELLS)
    parser.add_argument("--transforms", nargs="+", default=["data-driven", "dct"])
    parser.add_argument("--seed", type=int, default=1000)
    args = parser.parse_args()
    logging.basicConfig(level=logging.INFO)

    print(f"{'transform':<12} {'cell':<8} {'MAPE':>7} {'RMSE':>7} {'iters':>6} {'minutes':>8}")
    for transform in args.transforms:
        for cell in args.cells:
            pattern, rate = cell.split(":")
            res = benchmark(args.path, args.dataset, pattern, float(rate), transform, args.seed)
            print(f"{transform:<12} {cell:<8} {res.report.mape:7.2f} {res.report.rmse:7.2f} "
                  f"{res.trace.iterations:6d} {res.seconds / 60:8.2f}")


if __name__ == "__main__":
    main()
