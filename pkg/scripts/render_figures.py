#!/usr/bin/env python3
"""
Render every committed sample figure spec through the plots component.
The plots package reads only CSV files, so this works from a clean checkout.
"""

import sys
from pathlib import Path

from nscr_plots.render import main as render_main

SAMPLES = Path(__file__).resolve().parent.parent / "plots" / "samples"

rc = 0
for spec in sorted(SAMPLES.glob("fig_*.json")):
    rc |= render_main([str(spec)])
sys.exit(rc)
