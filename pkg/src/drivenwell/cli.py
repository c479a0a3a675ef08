"""Command-line front door: config loading, pipelines, file emission.

Every run writes its data files plus a ``manifest.json`` (config snapshot,
code version, wall-clock duration, sha256 of each output).  Data files
carry no timestamps and floats are printed with 17 significant digits, so
identical config and version reproduce byte-identical outputs; the clock
lives only in the manifest.
"""

from __future__ import annotations

import argparse
import hashlib
import json
import math
import os
import struct
import sys
import time
from dataclasses import dataclass, replace
from pathlib import Path

import numpy as np

from . import __version__
from .analysis import (
    AnalysisError, OccupationSeries, delay_embed, resonance_scan,
    triplet_spectrum, visiting_density,
)
from .model import (
    ConfigurationError, config_as_dict, load_config, validate_config,
    with_resolved_drive,
)
from .propagator import propagate
from .spectrum import (
    SpectrumError, assemble_h0, localization_fractions, solve_bound_states,
)

FLOAT_FMT = "%.17g"
PSI_MAGIC = b"PSI1"


@dataclass
class RunManifest:
    """Inventory of one CLI run: config, version, clock, output digests."""

    config: dict
    version: str
    duration_seconds: float
    outputs: dict[str, str]

    def write(self, out_dir: Path) -> Path:
        path = out_dir / "manifest.json"
        with open(path, "w") as fh:
            json.dump({"config": self.config, "version": self.version,
                       "duration_seconds": self.duration_seconds,
                       "outputs": self.outputs}, fh, indent=2, sort_keys=True)
            fh.write("\n")
        return path


def _sha256(path: Path) -> str:
    digest = hashlib.sha256()
    with open(path, "rb") as fh:
        for chunk in iter(lambda: fh.read(1 << 20), b""):
            digest.update(chunk)
    return digest.hexdigest()


def _fmt(value: float) -> str:
    return FLOAT_FMT % value


def write_csv(path: Path, header: list[str], rows) -> None:
    with open(path, "w") as fh:
        fh.write(",".join(header) + "\n")
        for row in rows:
            fh.write(",".join(_fmt(v) if isinstance(v, float) else str(v)
                              for v in row) + "\n")


def write_psi_snapshot(fh, psi: np.ndarray, dx: float, t: float) -> None:
    """One binary record: 16-byte header (magic, n, dx, t) + float64 re/im pairs."""
    fh.write(struct.pack("<4sIff", PSI_MAGIC, len(psi), dx, t))
    pairs = np.empty(2 * len(psi))
    pairs[0::2] = psi.real
    pairs[1::2] = psi.imag
    fh.write(pairs.astype("<f8").tobytes())


class _Emitter:
    """Collects emitted files so the manifest can digest them."""

    def __init__(self, out_dir: Path):
        self.out_dir = out_dir
        self.paths: list[Path] = []
        out_dir.mkdir(parents=True, exist_ok=True)

    def csv(self, name: str, header: list[str], rows) -> Path:
        path = self.out_dir / name
        write_csv(path, header, rows)
        self.paths.append(path)
        return path

    def text(self, name: str, content: str) -> Path:
        path = self.out_dir / name
        path.write_text(content)
        self.paths.append(path)
        return path

    def add(self, path: Path) -> None:
        self.paths.append(path)

    def manifest(self, cfg_dict: dict, started: float) -> Path:
        manifest = RunManifest(
            config=cfg_dict, version=__version__,
            duration_seconds=time.monotonic() - started,
            outputs={p.name: _sha256(p) for p in self.paths})
        return manifest.write(self.out_dir)


def _load_pipeline(args):
    """Config + spectrum with 'resonant' placeholders resolved and validated."""
    cfg = load_config(args.config)
    if args.dt is not None:
        cfg = replace(cfg, dt=args.dt)
    if args.t_total is not None:
        cfg = replace(cfg, t_total=args.t_total)
    validate_config(cfg, require_resolved=False)
    spectrum = solve_bound_states(assemble_h0(cfg.grid, cfg.well), cfg.grid)
    cfg = with_resolved_drive(cfg, spectrum.omega_carrier,
                              cfg.drive.a0 * spectrum.kappa)
    return validate_config(cfg), spectrum


def _series_from_csv(path: str, column: int) -> OccupationSeries:
    with open(path) as fh:
        header = fh.readline().strip().split(",")
    name = f"N{column}"
    if name not in header:
        raise AnalysisError(f"column {name} not found in {path} (header: {header})")
    data = np.loadtxt(path, delimiter=",", skiprows=1,
                      usecols=(0, header.index(name)))
    if len(data) < 2:
        raise AnalysisError(f"series in {path} too short")
    dt_sample = float(data[1, 0] - data[0, 0])
    return OccupationSeries(dt_sample=dt_sample, values=data[:, 1])


def _occupation_rows(result):
    for k in range(len(result.times)):
        yield (result.times[k], *result.occupations[k], result.norms[k])


GNUPLOT_FIG2 = """# gnuplot script: 3D delay-embedding scatter (state-space portrait)
set title "Delay-embedding of the occupation series"
set xlabel "N(t)" ; set ylabel "N(t+tau)" ; set zlabel "N(t+2tau)"
set datafile separator ","
splot {plots}
pause -1
"""

GNUPLOT_FIG3 = """# gnuplot script: visiting-frequency density overlay
set title "Visiting-frequency density"
set xlabel "N0" ; set ylabel "xi(N0)"
set datafile separator ","
plot {plots}
pause -1
"""

GNUPLOT_SCAN = """# gnuplot script: breakdown metric against modulation frequency
set title "Parametric-resonance scan"
set xlabel "modulation frequency" ; set ylabel "breakdown metric"
set datafile separator ","
plot "{data}" skip 1 using 1:2 with linespoints title "breakdown"
pause -1
"""

GNUPLOT_TRIPLET = """# gnuplot script: spectral lines of the modulated pulse
set title "Pulse spectrum"
set xlabel "angular frequency" ; set ylabel "amplitude"
set datafile separator ","
plot "{data}" skip 1 using 1:2 with impulses title "lines"
pause -1
"""


def cmd_spectrum(args) -> int:
    started = time.monotonic()
    cfg = load_config(args.config)
    validate_config(cfg, require_resolved=False)
    spectrum = solve_bound_states(assemble_h0(cfg.grid, cfg.well), cfg.grid)
    emitter = _Emitter(Path(args.out))

    rows = []
    print(f"{'index':>5} {'energy':>22} {'left_frac':>10} {'right_frac':>10}")
    for state in spectrum.states:
        left, right = localization_fractions(state, cfg.grid, cfg.well)
        rows.append((state.index, state.energy, left, right))
        print(f"{state.index:>5} {state.energy:>22.15g} {left:>10.4f} {right:>10.4f}")
    print(f"omega_carrier (E1 - E0): {spectrum.omega_carrier:.15g}")
    print(f"kappa |<0|p|1>|:         {spectrum.kappa:.15g}")

    emitter.csv("spectrum.csv",
                ["index", "energy", "left_fraction", "right_fraction"], rows)
    emitter.csv("resonance.csv", ["omega_carrier", "kappa", "n_bound"],
                [(spectrum.omega_carrier, spectrum.kappa, len(spectrum.states))])
    emitter.manifest(config_as_dict(cfg), started)
    return 0


def cmd_propagate(args) -> int:
    started = time.monotonic()
    cfg, spectrum = _load_pipeline(args)
    emitter = _Emitter(Path(args.out))

    if args.psi_dump:
        psi_path = Path(args.psi_dump)
        with open(psi_path, "wb") as fh:
            result = propagate(
                cfg, spectrum, snapshot_stride=args.psi_stride,
                psi_sink=lambda t, psi: write_psi_snapshot(fh, psi, cfg.grid.dx, t))
        emitter.add(psi_path)
    else:
        result = propagate(cfg, spectrum)

    names = [f"N{k}" for k in range(result.occupations.shape[1])]
    emitter.csv("occupations.csv", ["t", *names, "norm"], _occupation_rows(result))
    if result.failed:
        print(f"propagation FAILED at t={result.failure_time}; partial series written",
              file=sys.stderr)
    print(f"samples: {len(result.times)}  max |norm-1|: "
          f"{np.abs(result.norms - 1).max():.3e}")
    emitter.manifest(config_as_dict(cfg), started)
    return 3 if result.failed else 0


def _series_for_analysis(args) -> tuple[OccupationSeries, dict]:
    if args.series:
        series = _series_from_csv(args.series, args.column)
        return series, {"series_file": str(args.series), "column": args.column}
    cfg, spectrum = _load_pipeline(args)
    result = propagate(cfg, spectrum)
    if result.failed:
        raise AnalysisError(f"propagation failed at t={result.failure_time}")
    return result.occupation_series(args.column), config_as_dict(cfg)


def cmd_density(args) -> int:
    started = time.monotonic()
    series, cfg_dict = _series_for_analysis(args)
    emitter = _Emitter(Path(args.out))
    density = visiting_density(series, args.bins)
    emitter.csv("density.csv", ["bin_center", "xi"],
                zip(density.bin_centers().tolist(), density.xi.tolist()))
    if args.plot_script:
        emitter.text("density.gp", GNUPLOT_FIG3.format(
            plots='"density.csv" skip 1 using 1:2 with lines title "xi"'))
    emitter.manifest(cfg_dict, started)
    return 0


def cmd_embed(args) -> int:
    started = time.monotonic()
    series, cfg_dict = _series_for_analysis(args)
    lag_steps = max(1, int(round(args.lag / series.dt_sample)))
    path = delay_embed(series, lag_steps)
    emitter = _Emitter(Path(args.out))
    name = "embedding.csv" if args.format == "csv" else "embedding.ndjson"
    if args.format == "csv":
        emitter.csv(name, ["y1", "y2", "y3"],
                    (tuple(float(v) for v in p) for p in path.points))
    else:
        emitter.text(name, "".join(
            json.dumps([float(v) for v in p]) + "\n" for p in path.points))
    if args.plot_script:
        emitter.text("embedding.gp", GNUPLOT_FIG2.format(
            plots=f'"{name}" skip 1 using 1:2:3 with dots title "path"'))
    print(f"lag: {args.lag} time units = {lag_steps} samples; "
          f"{len(path.points)} points")
    emitter.manifest(cfg_dict, started)
    return 0


def cmd_scan(args) -> int:
    started = time.monotonic()
    cfg, spectrum = _load_pipeline(args)
    if cfg.drive.epsilon <= 0:
        raise AnalysisError("scan requires epsilon > 0 in [drive]")
    center = cfg.drive.a0 * spectrum.kappa
    omegas = np.linspace(args.scan_min, args.scan_max, args.scan_steps) * center
    workers = args.workers or os.cpu_count() or 1
    result = resonance_scan(cfg, omegas, n_bins=args.bins,
                            edge_fraction=args.edge_fraction, n_workers=workers)
    emitter = _Emitter(Path(args.out))
    emitter.csv("scan.csv", ["omega", "breakdown"],
                zip(result.omega_values.tolist(), result.breakdown.tolist()))
    emitter.csv("scan_summary.csv",
                ["omega_prm", "a0_kappa", "relative_offset"],
                [(result.omega_prm, center, result.omega_prm / center - 1.0)])
    if args.plot_script:
        emitter.text("scan.gp", GNUPLOT_SCAN.format(data="scan.csv"))
    print(f"omega_prm = {result.omega_prm:.15g} "
          f"(A0*kappa = {center:.15g}, offset "
          f"{(result.omega_prm / center - 1.0) * 100:+.2f}%)")
    emitter.manifest(config_as_dict(cfg), started)
    return 0


def cmd_triplet(args) -> int:
    started = time.monotonic()
    cfg, spectrum = _load_pipeline(args)
    drive = cfg.drive
    om = drive.omega_mod or 0.0
    duration = args.duration
    if duration is None:
        base = 2.0 * math.pi / om if om > 0 else 2.0 * math.pi / drive.omega_carrier
        duration = 20.0 * base
    lines = triplet_spectrum(drive, spectrum.kappa, duration, args.samples)
    emitter = _Emitter(Path(args.out))
    emitter.csv("triplet.csv", ["omega", "amplitude"],
                [(line.omega, line.amplitude) for line in lines])
    if args.plot_script:
        emitter.text("triplet.gp", GNUPLOT_TRIPLET.format(data="triplet.csv"))
    expected = [drive.omega_carrier]
    if om > 0 and drive.epsilon > 0:
        expected = [drive.omega_carrier - om, drive.omega_carrier,
                    drive.omega_carrier + om]
    print(f"{'line omega':>20} {'amplitude':>20}   nearest expected")
    for line in lines:
        near = min(expected, key=lambda e: abs(e - line.omega))
        print(f"{line.omega:>20.10g} {line.amplitude:>20.10g}   {near:.10g} "
              f"(off by {line.omega - near:+.3g})")
    emitter.manifest(config_as_dict(cfg), started)
    return 0


def _preset_path(name: str) -> str:
    from importlib.resources import files
    return str(files("drivenwell").joinpath(f"presets/{name}"))


def cmd_reproduce(args) -> int:
    started = time.monotonic()
    preset = args.config or _preset_path(
        "reference_resonant.cfg" if args.resonant else "reference.cfg")
    cfg = load_config(preset)
    if args.dt is not None:
        cfg = replace(cfg, dt=args.dt)
    if args.t_total is not None:
        cfg = replace(cfg, t_total=args.t_total)
    validate_config(cfg, require_resolved=False)
    spectrum = solve_bound_states(assemble_h0(cfg.grid, cfg.well), cfg.grid)
    cfg = validate_config(with_resolved_drive(
        cfg, spectrum.omega_carrier, cfg.drive.a0 * spectrum.kappa))

    unmod = replace(cfg, drive=replace(cfg.drive, epsilon=0.0))
    emitter = _Emitter(Path(args.out))

    runs = {"unmodulated": unmod, "modulated": cfg}
    series = {}
    for tag, c in runs.items():
        result = propagate(c, spectrum)
        if result.failed:
            raise AnalysisError(f"{tag} propagation failed at t={result.failure_time}")
        series[tag] = result.occupation_series(c.initial_state)
        names = [f"N{k}" for k in range(result.occupations.shape[1])]
        emitter.csv(f"occupations_{tag}.csv", ["t", *names, "norm"],
                    _occupation_rows(result))

    if args.figure == "fig2":
        plots = []
        for tag, ser in series.items():
            lag_steps = max(1, int(round(args.lag / ser.dt_sample)))
            path = delay_embed(ser, lag_steps)
            emitter.csv(f"embedding_{tag}.csv", ["y1", "y2", "y3"],
                        (tuple(float(v) for v in p) for p in path.points))
            plots.append(f'"embedding_{tag}.csv" skip 1 using 1:2:3 '
                         f'with dots title "{tag}"')
        emitter.text("fig2.gp", GNUPLOT_FIG2.format(plots=", ".join(plots)))
    else:
        plots = []
        style = {"unmodulated": "dashes", "modulated": "lines"}
        for tag, ser in series.items():
            density = visiting_density(ser, args.bins)
            emitter.csv(f"density_{tag}.csv", ["bin_center", "xi"],
                        zip(density.bin_centers().tolist(), density.xi.tolist()))
            plots.append(f'"density_{tag}.csv" skip 1 using 1:2 with '
                         f'{style[tag]} title "{tag}"')
        emitter.text("fig3.gp", GNUPLOT_FIG3.format(plots=", ".join(plots)))

    emitter.manifest(config_as_dict(cfg), started)
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="drivenwell",
        description="Driven double-well tunneling simulator and diagnostics")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p, config_required=True):
        p.add_argument("--config", required=config_required,
                       help="path to the key = value config file")
        p.add_argument("--out", default="out", help="output directory")
        p.add_argument("--dt", type=float, default=None,
                       help="override [run] dt")
        p.add_argument("--t-total", type=float, default=None, dest="t_total",
                       help="override [run] t_total")
        p.add_argument("--seedless", action="store_true",
                       help="assert the deterministic contract (all runs are "
                            "seedless; no RNG anywhere in the core)")

    p = sub.add_parser("spectrum", help="bound states, resonance and kappa")
    common(p)

    p = sub.add_parser("propagate", help="run the propagation, stream occupations")
    common(p)
    p.add_argument("--psi-dump", default=None,
                   help="binary |psi| snapshot file (PSI1 records)")
    p.add_argument("--psi-stride", type=int, default=100,
                   help="samples between psi snapshots")

    for name, help_text in [("density", "visiting-frequency density"),
                            ("embed", "delay embedding of the series")]:
        p = sub.add_parser(name, help=help_text)
        common(p)
        p.add_argument("--series", default=None,
                       help="occupations.csv from a previous propagate run "
                            "(otherwise propagates first)")
        p.add_argument("--column", type=int, default=0,
                       help="bound-state index to monitor (default 0)")
        p.add_argument("--bins", type=int, default=100)
        p.add_argument("--plot-script", action="store_true")
        if name == "embed":
            p.add_argument("--lag", type=float, default=330.0,
                           help="lag time in time units (converted to samples)")
            p.add_argument("--format", choices=["csv", "ndjson"], default="csv")

    p = sub.add_parser("scan", help="modulation-frequency scan for the resonance")
    common(p)
    p.add_argument("--scan-min", type=float, default=0.7,
                   help="lower edge as a fraction of A0*kappa")
    p.add_argument("--scan-max", type=float, default=1.3,
                   help="upper edge as a fraction of A0*kappa")
    p.add_argument("--scan-steps", type=int, default=26)
    p.add_argument("--bins", type=int, default=100)
    p.add_argument("--edge-fraction", type=float, default=0.1)
    p.add_argument("--workers", type=int, default=None,
                   help="parallel propagations (default: available cores)")
    p.add_argument("--plot-script", action="store_true")

    p = sub.add_parser("triplet", help="spectral lines of the modulated pulse")
    common(p)
    p.add_argument("--duration", type=float, default=None,
                   help="sampling window (default 20 modulation periods)")
    p.add_argument("--samples", type=int, default=16384,
                   help="sample count (power of two)")
    p.add_argument("--plot-script", action="store_true")

    p = sub.add_parser("reproduce", help="published-parameter reproduction presets")
    p.add_argument("figure", choices=["fig2", "fig3"])
    common(p, config_required=False)
    p.add_argument("--resonant", action="store_true",
                   help="use the preset with the modulation at the computed "
                        "parametric resonance A0*kappa instead of the "
                        "published value 0.01755")
    p.add_argument("--lag", type=float, default=330.0)
    p.add_argument("--bins", type=int, default=100)
    return parser


_HANDLERS = {
    "spectrum": cmd_spectrum,
    "propagate": cmd_propagate,
    "density": cmd_density,
    "embed": cmd_embed,
    "scan": cmd_scan,
    "triplet": cmd_triplet,
    "reproduce": cmd_reproduce,
}


def run_command(argv=None) -> int:
    """Execute one CLI invocation; returns the exit status."""
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return _HANDLERS[args.command](args)
    except (ConfigurationError, SpectrumError, AnalysisError, OSError) as exc:
        record = {"error": type(exc).__name__, "message": str(exc)}
        if isinstance(exc, ConfigurationError):
            record["violations"] = exc.violations
        print(json.dumps(record), file=sys.stderr)
        return 2


def main() -> None:
    sys.exit(run_command())


if __name__ == "__main__":
    main()
