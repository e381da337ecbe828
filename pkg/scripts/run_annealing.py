#!/usr/bin/env python3
"""Accelerated two-spin annealing sweep (transverse field 10 -> 0).

Runs the bundled preset through the batch front-end, then prints the
terminal populations and fidelity floor.  The trajectory and driving
coefficient CSVs land in the output directory.
"""

import argparse
import json
import pathlib
import sys

from spinff.cli import main as spinff_main


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--out", default="out/qa", help="output directory")
    ap.add_argument("--dt", type=float, default=None, help="integrator step")
    args = ap.parse_args()

    argv = ["run", "--config", "preset:qa", "--out", args.out]
    if args.dt:
        argv += ["--dt", str(args.dt)]
    code = spinff_main(argv)
    summary = json.loads((pathlib.Path(args.out) / "summary.json").read_text())
    print(f"min fidelity      : {summary['min_fidelity']!r}")
    print(f"terminal |C_j|^2  : {summary['terminal_populations']}")
    print(f"norm drift        : {summary['max_norm_drift']!r}")
    print(f"runtime           : {summary['runtime_s']:.2f} s")
    print(f"artifacts         : {args.out}/trajectory.csv, coefficients.csv")
    return code


if __name__ == "__main__":
    sys.exit(main())
