#!/usr/bin/env python3
"""Scan the modulation frequency around A0 * kappa and locate the
parametric resonance by the twin-peak breakdown metric.

Writes scan.csv / scan_summary.csv and a gnuplot overlay.  Serial runtime
is dominated by one propagation per frequency (~15 s each at the preset
resolution); pass --workers on a multicore box.
"""

import sys

from drivenwell.cli import _preset_path, run_command

if __name__ == "__main__":
    out = sys.argv[1] if len(sys.argv) > 1 else "out_scan"
    sys.exit(run_command([
        "scan", "--config", _preset_path("reference_resonant.cfg"), "--out", out,
        "--t-total", "2000.0", "--scan-steps", "26", "--plot-script",
        *sys.argv[2:]]))
