#!/usr/bin/env python3
"""Visiting-frequency densities with and without parametric modulation.

Runs the reproduction preset (modulation at the computed resonance, which
is where the breakdown actually shows for this geometry) and writes the
overlay data plus a gnuplot script.  Equivalent to

    drivenwell reproduce fig3 --resonant --out out_fig3
"""

import sys

from drivenwell.cli import run_command

if __name__ == "__main__":
    out = sys.argv[1] if len(sys.argv) > 1 else "out_fig3"
    sys.exit(run_command(["reproduce", "fig3", "--resonant", "--out", out,
                          *sys.argv[2:]]))
