#!/usr/bin/env python3
"""Run the full 1D experiment and print its summary.

Equivalent to

    rominv repro-1d --config configs/repro_1d.ini --out <dir>

followed by `cat <dir>/summary.txt`.  Writes plot-ready CSVs for the data
set, the orthogonalized model, the extracted grid, the internal solutions,
the reconstruction against the true medium, and the basis comparison.
"""

import argparse
import os
import sys

from rominv import cli

HERE = os.path.dirname(os.path.abspath(__file__))
DEFAULT_CONFIG = os.path.join(HERE, "..", "configs", "repro_1d.ini")


def main() -> int:
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--config", default=DEFAULT_CONFIG)
    ap.add_argument("--out", default="out/repro_1d")
    ap.add_argument("--lambda", dest="lam", default=None, help="override spectral points")
    args = ap.parse_args()

    argv = ["repro-1d", "--config", args.config, "--out", args.out]
    if args.lam is not None:
        argv += ["--lambda", args.lam]
    rc = cli.main(argv)
    if rc == 0:
        with open(os.path.join(args.out, "summary.txt")) as fh:
            sys.stdout.write(fh.read())
    return rc


if __name__ == "__main__":
    raise SystemExit(main())
