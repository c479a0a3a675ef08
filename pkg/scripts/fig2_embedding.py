#!/usr/bin/env python3
"""Lag-330 state-space portraits: regular torus versus broken-down cloud.

Equivalent to

    drivenwell reproduce fig2 --resonant --out out_fig2
"""

import sys

from drivenwell.cli import run_command

if __name__ == "__main__":
    out = sys.argv[1] if len(sys.argv) > 1 else "out_fig2"
    sys.exit(run_command(["reproduce", "fig2", "--resonant", "--out", out,
                          *sys.argv[2:]]))
