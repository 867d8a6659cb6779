#!/usr/bin/env python3
"""
Desk-scale nonlinear experiments: the reference stable run at eps = 0.1 nu
and the stability-threshold scan over the viscosity sweep.  The scan is the
expensive part (about an hour with two workers); pass --skip-scan to run
only the reference simulation.
"""

import argparse
import sys

from nscr.cli import main as cli_main


def main() -> int:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--out", default="out/nonlinear")
    parser.add_argument("--skip-scan", action="store_true")
    args = parser.parse_args()

    rc = cli_main(["simulate", "--nu", "1e-2", "--beta", "2", "--grid", "32,64,32",
                   "--eps", "1e-3", "--sigma", "5", "--T", "100",
                   "--ledger-stride", "5", "--out", args.out])
    if rc != 0:
        return rc
    if not args.skip_scan:
        rc = cli_main(["threshold-scan", "--out", args.out])
    return rc


if __name__ == "__main__":
    sys.exit(main())
