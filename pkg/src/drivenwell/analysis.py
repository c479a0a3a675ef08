"""Diagnostics on the sampled occupation series.

Covers the delay-embedding state-space portrait, the visiting-frequency
density xi(N0) and its twin-peak breakdown metric, the modulation-frequency
scan locating the parametric resonance, the triplet decomposition of the
modulated pulse, and a Grassberger-Procaccia correlation-dimension
estimate used to quantify regular-versus-irregular embeddings.
"""

from __future__ import annotations

import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, replace
from typing import Callable, Sequence

import numpy as np

from ._kernels import pair_correlation_counts
from .model import Drive, SimulationConfig, drive_amplitude

__all__ = [
    "OccupationSeries", "EmbeddedPath", "VisitingDensity", "ScanResult",
    "SpectralLine", "AnalysisError", "delay_embed", "visiting_density",
    "twin_peak_breakdown", "resonance_scan", "propagation_runner",
    "triplet_spectrum", "correlation_dimension_estimate",
]


class AnalysisError(ValueError):
    """Analysis precondition violated or result undefined."""


@dataclass(frozen=True)
class OccupationSeries:
    """Uniformly sampled occupation probability N(k * dt_sample).

    Values are probabilities: within [0, 1] up to the 1e-9 unitarity
    headroom the propagator guarantees.
    """

    dt_sample: float
    values: np.ndarray

    def __post_init__(self):
        if self.dt_sample <= 0:
            raise AnalysisError(f"dt_sample must be > 0, got {self.dt_sample}")
        values = np.asarray(self.values, dtype=float)
        if len(values) and (values.min() < 0.0 or values.max() > 1.0 + 1e-9):
            raise AnalysisError(
                f"occupations outside [0, 1 + 1e-9]: range "
                f"[{values.min()}, {values.max()}]")


@dataclass(frozen=True)
class EmbeddedPath:
    """Delay-embedded triples Y_k = (N_k, N_{k+lag}, N_{k+2 lag})."""

    lag_steps: int
    points: np.ndarray


@dataclass(frozen=True)
class VisitingDensity:
    """Visiting-frequency probability density over N equal bins of [0, 1]."""

    n_bins: int
    bin_width: float
    xi: np.ndarray

    def bin_centers(self) -> np.ndarray:
        return (np.arange(self.n_bins) + 0.5) * self.bin_width

    def mass(self) -> float:
        """Total integral; 1 by construction up to roundoff."""
        return float(np.sum(self.xi) * self.bin_width)


@dataclass(frozen=True)
class ScanResult:
    """Breakdown metric per scanned modulation frequency."""

    omega_values: np.ndarray
    breakdown: np.ndarray
    omega_prm: float

    def valid(self) -> np.ndarray:
        return np.isfinite(self.breakdown)


@dataclass(frozen=True)
class SpectralLine:
    omega: float
    amplitude: float


def delay_embed(series: OccupationSeries, lag_steps: int) -> EmbeddedPath:
    """Three-dimensional delay embedding of the series; pure reindexing.

    Requires len(values) > 2 * lag_steps; the point count is
    len(values) - 2 * lag_steps.
    """
    if lag_steps < 1:
        raise AnalysisError(f"lag_steps must be >= 1, got {lag_steps}")
    values = np.asarray(series.values, dtype=float)
    m = len(values) - 2 * lag_steps
    if m < 1:
        raise AnalysisError(
            f"series too short for lag {lag_steps}: need at least "
            f"{2 * lag_steps + 1} samples, got {len(values)}")
    points = np.column_stack((values[:m],
                              values[lag_steps:lag_steps + m],
                              values[2 * lag_steps:2 * lag_steps + m]))
    return EmbeddedPath(lag_steps=lag_steps, points=points)


def visiting_density(series: OccupationSeries, n_bins: int = 100) -> VisitingDensity:
    """Histogram of the sampled occupations as a probability density on [0, 1].

    The uniform sampling approximates the long-time visiting-frequency
    limit.  A sample exactly on a bin edge goes to the higher bin; 1 goes
    to the last bin.  Values are clipped to [0, 1] (unitarity leaves at
    most ~1e-9 overshoot).
    """
    if n_bins < 2:
        raise AnalysisError(f"n_bins must be >= 2, got {n_bins}")
    values = np.asarray(series.values, dtype=float)
    if len(values) == 0:
        raise AnalysisError("empty series")
    clipped = np.clip(values, 0.0, 1.0)
    idx = np.minimum(np.floor(clipped * n_bins).astype(np.int64), n_bins - 1)
    counts = np.bincount(idx, minlength=n_bins)
    width = 1.0 / n_bins
    xi = counts / (len(values) * width)
    return VisitingDensity(n_bins=n_bins, bin_width=width, xi=xi)


def twin_peak_breakdown(density: VisitingDensity, edge_fraction: float = 0.1,
                        method: str = "edge_mass") -> float:
    """How far the density has moved away from the twin-peak (edge) shape.

    ``edge_mass`` (default): 1 minus the probability mass inside the outer
    bands [0, e] and [1-e, 1]; regular tunneling concentrates mass at the
    edges (low metric), breakdown pushes it mid-range (high metric).
    ``peak_ratio``: mid-band peak height against the sum of mid- and
    edge-band peak heights; an alternative on the same [0, 1] scale.
    """
    e = edge_fraction
    if not 0.0 < e < 0.5:
        raise AnalysisError(f"edge_fraction must be in (0, 0.5), got {e}")
    width = density.bin_width
    lows = np.arange(density.n_bins) * width
    highs = lows + width

    def band_mass(lo: float, hi: float) -> float:
        overlap = np.clip(np.minimum(highs, hi) - np.maximum(lows, lo), 0.0, None)
        return float(np.sum(density.xi * overlap))

    if method == "edge_mass":
        return 1.0 - band_mass(0.0, e) - band_mass(1.0 - e, 1.0)
    if method == "peak_ratio":
        centers = density.bin_centers()
        edge = (centers <= e) | (centers >= 1.0 - e)
        edge_peak = float(np.max(density.xi[edge])) if np.any(edge) else 0.0
        mid_peak = float(np.max(density.xi[~edge])) if np.any(~edge) else 0.0
        if edge_peak + mid_peak == 0.0:
            return 0.0
        return mid_peak / (edge_peak + mid_peak)
    raise AnalysisError(f"unknown breakdown method '{method}'")


def propagation_runner(cfg: SimulationConfig) -> OccupationSeries:
    """Default scan runner: solve the spectrum, propagate, monitor N0.

    Module-level so process pools can pickle it.
    """
    from .propagator import propagate
    from .spectrum import assemble_h0, solve_bound_states

    spectrum = solve_bound_states(assemble_h0(cfg.grid, cfg.well), cfg.grid)
    from .model import with_resolved_drive
    if cfg.drive.omega_carrier is None or cfg.drive.omega_mod is None:
        cfg = with_resolved_drive(cfg, spectrum.omega_carrier,
                                  cfg.drive.a0 * spectrum.kappa)
    result = propagate(cfg, spectrum)
    if result.failed:
        raise AnalysisError(f"propagation failed at t={result.failure_time}")
    return result.occupation_series(cfg.initial_state)


def _scan_one(args) -> float:
    cfg, runner, n_bins, edge_fraction = args
    series = runner(cfg)
    return twin_peak_breakdown(visiting_density(series, n_bins), edge_fraction)


def resonance_scan(base_cfg: SimulationConfig, omega_grid: Sequence[float],
                   runner: Callable[[SimulationConfig], OccupationSeries] = propagation_runner,
                   n_bins: int = 100, edge_fraction: float = 0.1,
                   n_workers: int = 1) -> ScanResult:
    """Breakdown metric for each modulation frequency; argmax locates the resonance.

    Every frequency is an independent propagation, distributed over
    ``n_workers`` processes.  A failed run marks its frequency invalid
    (NaN) and is excluded; ties break toward the smaller frequency.
    """
    omega_values = np.asarray(list(omega_grid), dtype=float)
    if len(omega_values) == 0:
        raise AnalysisError("omega_grid is empty")
    if base_cfg.drive.epsilon <= 0:
        raise AnalysisError(
            f"resonance_scan requires epsilon > 0, got {base_cfg.drive.epsilon}")

    jobs = [(replace(base_cfg, drive=replace(base_cfg.drive, omega_mod=float(om))),
             runner, n_bins, edge_fraction) for om in omega_values]
    breakdown = np.full(len(omega_values), np.nan)
    if n_workers > 1:
        with ProcessPoolExecutor(max_workers=n_workers) as pool:
            futures = {i: pool.submit(_scan_one, job) for i, job in enumerate(jobs)}
            for i, fut in futures.items():
                try:
                    breakdown[i] = fut.result()
                except Exception:
                    breakdown[i] = np.nan
    else:
        for i, job in enumerate(jobs):
            try:
                breakdown[i] = _scan_one(job)
            except Exception:
                breakdown[i] = np.nan

    valid = np.isfinite(breakdown)
    if not np.any(valid):
        raise AnalysisError("every scanned frequency failed to propagate")
    order = np.argsort(omega_values, kind="stable")
    best = None
    for i in order:
        if valid[i] and (best is None or breakdown[i] > breakdown[best]):
            best = i
    return ScanResult(omega_values=omega_values, breakdown=breakdown,
                      omega_prm=float(omega_values[best]))


def _refine_peak(log_mag: np.ndarray, k: int) -> float:
    """Sub-bin peak offset by parabolic interpolation of the log magnitude."""
    if k <= 0 or k >= len(log_mag) - 1:
        return 0.0
    y0, y1, y2 = log_mag[k - 1], log_mag[k], log_mag[k + 1]
    denom = y0 - 2.0 * y1 + y2
    if denom == 0.0:
        return 0.0
    delta = 0.5 * (y0 - y2) / denom
    return float(np.clip(delta, -0.5, 0.5))


def triplet_spectrum(drive: Drive, kappa: float, duration: float,
                     n_samples: int, max_lines: int = 3,
                     rel_threshold: float = 3e-3,
                     exclusion_bins: int = 5) -> list[SpectralLine]:
    """Dominant lines of the sampled pulse A(t) kappa sin(omega_carrier t).

    A Hann-windowed transform locates up to ``max_lines`` separated peaks
    (each within one frequency bin of the true line); the amplitudes are
    then re-estimated by least squares at the interpolated frequencies, so
    the satellite/carrier ratio is recovered to much better than the
    window's scalloping error.  For a modulated drive the lines sit at the
    carrier and carrier +/- modulation with satellite amplitude
    epsilon/2 of the carrier.

    Requires ``n_samples`` a power of two and, for a modulated drive, a
    duration of at least 10 modulation periods (the resolution needed to
    separate the satellites); the error says how much is required.
    """
    if n_samples < 16 or n_samples & (n_samples - 1):
        raise AnalysisError(f"n_samples must be a power of two >= 16, got {n_samples}")
    if duration <= 0:
        raise AnalysisError(f"duration must be > 0, got {duration}")
    if drive.omega_carrier is None or drive.omega_carrier <= 0:
        raise AnalysisError("drive.omega_carrier must be resolved and positive")
    om = drive.omega_mod or 0.0
    modulated = drive.epsilon > 0 and om > 0
    if modulated:
        needed = 10.0 * 2.0 * math.pi / om
        if duration < needed:
            raise AnalysisError(
                f"duration {duration:g} cannot separate the satellites: "
                f"need at least 10 modulation periods = {needed:g}")
    top = drive.omega_carrier + om
    dt_s = duration / n_samples
    if top * dt_s >= math.pi:
        raise AnalysisError(
            f"undersampled: {n_samples} samples over {duration:g} cannot "
            f"resolve angular frequency {top:g}; increase n_samples")

    t = dt_s * np.arange(n_samples)
    signal = drive_amplitude(drive, t) * kappa * np.sin(
        drive.omega_carrier * t + drive.carrier_phase)

    window = np.hanning(n_samples)
    spectrum = np.fft.rfft(signal * window)
    mag = np.abs(spectrum) * 2.0 / np.sum(window)
    log_mag = np.log(mag + 1e-300)

    order = np.argsort(mag)[::-1]
    peaks: list[int] = []
    for k in order:
        if mag[k] < rel_threshold * mag[order[0]]:
            break
        if all(abs(k - p) > exclusion_bins for p in peaks):
            peaks.append(int(k))
        if len(peaks) == max_lines:
            break

    bin_width = 2.0 * math.pi / duration
    freqs = [(k + _refine_peak(log_mag, k)) * bin_width for k in peaks]

    # Least-squares amplitudes at the refined frequencies: immune to
    # leakage, unlike reading windowed peak heights.
    columns = []
    for f in freqs:
        columns.append(np.cos(f * t))
        columns.append(np.sin(f * t))
    design = np.column_stack(columns)
    coef, *_ = np.linalg.lstsq(design, signal, rcond=None)
    lines = [SpectralLine(omega=float(f),
                          amplitude=float(np.hypot(coef[2 * i], coef[2 * i + 1])))
             for i, f in enumerate(freqs)]
    lines.sort(key=lambda line: line.amplitude, reverse=True)
    return lines


def correlation_dimension_estimate(path: EmbeddedPath,
                                   radii: Sequence[float],
                                   max_points: int = 4000) -> float:
    """Grassberger-Procaccia slope of log C(r) against log r.

    C(r) is the fraction of point pairs closer than r.  Points are thinned
    deterministically (uniform stride) to at most ``max_points``.  Radii
    with an empty correlation sum are dropped; at least two populated
    radii are needed for the fit.
    """
    points = np.asarray(path.points, dtype=float)
    if len(points) < 1000:
        raise AnalysisError(
            f"correlation dimension needs >= 1000 points, got {len(points)}")
    radii_arr = np.asarray(sorted(radii), dtype=float)
    if len(radii_arr) < 2 or np.any(radii_arr <= 0):
        raise AnalysisError("need at least two positive radii")
    if np.all(np.ptp(points, axis=0) == 0.0):
        raise AnalysisError("degenerate point cloud: zero diameter")

    stride = max(1, -(-len(points) // max_points))
    thinned = np.ascontiguousarray(points[::stride])
    m = len(thinned)
    counts = pair_correlation_counts(thinned, radii_arr**2)
    c = 2.0 * counts / (m * (m - 1))

    populated = c > 0
    if np.count_nonzero(populated) < 2:
        raise AnalysisError("correlation sums empty at every radius; "
                            "radii too small for this cloud")
    slope = np.polyfit(np.log(radii_arr[populated]), np.log(c[populated]), 1)[0]
    return float(slope)


def suggested_radii(path: EmbeddedPath, n_radii: int = 8,
                    lo: float = 0.05, hi: float = 0.5) -> np.ndarray:
    """Geometric radius ladder between lo and hi times the cloud RMS size."""
    points = np.asarray(path.points, dtype=float)
    scale = float(np.sqrt(np.sum(np.var(points, axis=0))))
    if scale == 0.0:
        raise AnalysisError("degenerate point cloud: zero diameter")
    return scale * np.geomspace(lo, hi, n_radii)
