#!/usr/bin/env python3
"""
Reproduce the three linear-mechanism experiments in one go: the
enhanced-dissipation envelope of a nonzero-k mode, the lift-up
cancellation contrast at the zero frequency, and the inertial-wave
dispersion decay.  Results land in out/linear/ as CSV files.
"""

import sys

from nscr.cli import main

OUT = sys.argv[1] if len(sys.argv) > 1 else "out/linear"

rc = 0
rc |= main(["linear-modes", "--nu", "1e-2", "--beta", "2", "--k", "1", "--l", "1",
            "--T", "20", "--out", OUT])
rc |= main(["zero-freq", "--nu", "1e-2", "--beta", "2", "--out", OUT])
rc |= main(["zero-freq", "--nu", "1e-3", "--beta", "2", "--out", OUT + "/nu1e-3"])
rc |= main(["dispersion", "--out", OUT])
sys.exit(rc)
