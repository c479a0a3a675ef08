"""Time evolution of psi(x,t) under H(t) = p^2/2 + U(x) - A(t) sin(Wt) p.

Crank-Nicolson with the Hamiltonian evaluated at the step midpoint:
unconditionally stable, exactly norm-preserving up to solver roundoff,
second order in dt.  The x-dependence of the vector potential and the A^2
minimal-coupling term are dropped (dipole-like approximation; the drive is
linear in p).
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np

from ._kernels import cn_advance
from .model import Drive, SimulationConfig, drive_amplitude, validate_config
from .spectrum import Spectrum

__all__ = [
    "WaveFunction", "ObservableSample", "PropagationResult", "PropagationError",
    "drive_operator_coefficient", "crank_nicolson_step", "propagate",
    "interval_probability", "dwell_time",
]


class PropagationError(RuntimeError):
    """Solver breakdown during time stepping."""


@dataclass(frozen=True)
class WaveFunction:
    """Complex amplitudes on the interior grid points at time t."""

    amplitudes: np.ndarray
    t: float

    def norm(self, dx: float) -> float:
        """Discrete L2 norm, conserved to ~1e-12 per step."""
        return float(np.sum(np.abs(self.amplitudes) ** 2) * dx)


@dataclass(frozen=True)
class ObservableSample:
    """Projections of the evolving state at one sample time."""

    t: float
    occupations: np.ndarray
    norm: float
    interval_probability: Optional[float] = None


@dataclass
class PropagationResult:
    """Sampled observables of one run, plus the final state.

    ``failed`` marks a run aborted by solver breakdown; the sampled series
    up to the failure is retained.
    """

    times: np.ndarray
    occupations: np.ndarray
    norms: np.ndarray
    psi_final: WaveFunction
    dt_sample: float
    failed: bool = False
    failure_time: Optional[float] = None
    interval_probabilities: Optional[np.ndarray] = None
    snapshot_times: Optional[np.ndarray] = None
    snapshots: Optional[np.ndarray] = None

    def occupation_series(self, state: int = 0):
        """The N_state(t) series in the shape the analysis module consumes."""
        from .analysis import OccupationSeries
        return OccupationSeries(dt_sample=self.dt_sample,
                                values=self.occupations[:, state].copy())


def drive_operator_coefficient(drive: Drive, t) -> float:
    """g(t) = -A(t) sin(omega_carrier t + phase); V(t) acts as g(t) * p."""
    return -drive_amplitude(drive, t) * np.sin(
        drive.omega_carrier * np.asarray(t, dtype=float) + drive.carrier_phase)


def _scratch(n: int) -> tuple[np.ndarray, np.ndarray]:
    return np.empty(n, dtype=np.complex128), np.empty(n, dtype=np.complex128)


def crank_nicolson_step(psi: WaveFunction, cfg: SimulationConfig,
                        diag0: np.ndarray, dt: Optional[float] = None) -> WaveFunction:
    """One Crank-Nicolson step from psi.t; dt < 0 steps backwards in time.

    ``diag0`` is the real diagonal of H0 from ``assemble_h0``.  The drive
    is evaluated at the midpoint t + dt/2, which keeps the scheme second
    order for the time-dependent Hamiltonian.
    """
    dt = cfg.dt if dt is None else dt
    amplitudes = psi.amplitudes.astype(np.complex128, copy=True)
    cp, dp = _scratch(len(amplitudes))
    d = cfg.drive
    t_new = cn_advance(amplitudes, diag0, cfg.grid.dx, dt, psi.t, 1,
                       d.a0, d.epsilon, d.omega_mod or 0.0, d.omega_carrier,
                       d.carrier_phase, cp, dp)
    if not np.isfinite(t_new):
        raise PropagationError(
            f"zero pivot in tridiagonal solve at t={psi.t} (dt={dt})")
    return WaveFunction(amplitudes=amplitudes, t=t_new)


def interval_probability(psi_sq: np.ndarray, grid, alpha: float, beta: float) -> float:
    """integral of |psi|^2 over [alpha, beta] by trapezoid with wall zeros.

    ``psi_sq`` holds |psi|^2 at the interior points; the walls contribute
    zero.  Partial cells at alpha and beta are handled by linear
    interpolation of |psi|^2, so the whole box integrates to exactly the
    discrete norm.
    """
    if beta < alpha:
        raise ValueError(f"interval reversed: alpha={alpha} > beta={beta}")
    if alpha < grid.x_min or beta > grid.x_max:
        raise ValueError(
            f"interval [{alpha}, {beta}] outside box [{grid.x_min}, {grid.x_max}]")
    x = np.concatenate(([grid.x_min], grid.points(), [grid.x_max]))
    y = np.concatenate(([0.0], psi_sq, [0.0]))
    if beta == alpha:
        return 0.0
    ya = np.interp(alpha, x, y)
    yb = np.interp(beta, x, y)
    inside = (x > alpha) & (x < beta)
    xs = np.concatenate(([alpha], x[inside], [beta]))
    ys = np.concatenate(([ya], y[inside], [yb]))
    return float(np.trapezoid(ys, xs))


def propagate(cfg: SimulationConfig, spectrum: Spectrum,
              observer: Optional[Callable[[ObservableSample], None]] = None,
              interval: Optional[tuple[float, float]] = None,
              snapshot_stride: Optional[int] = None,
              psi_sink: Optional[Callable[[float, np.ndarray], None]] = None) -> PropagationResult:
    """Run the configured propagation, streaming samples to ``observer``.

    The initial state is the configured bound state (default the ground
    state).  Every ``sample_stride`` steps the occupations
    N_k = |<k|psi>|^2 of all bound states and the norm are sampled; the
    t = 0 sample is always included, and the run covers t_total rounded
    down to a whole number of sampling intervals.  ``interval``
    additionally samples the probability inside [alpha, beta] (the
    dwell-time integrand); ``snapshot_stride`` (in samples) additionally
    records |psi|^2 rows and feeds ``psi_sink`` with (t, complex
    amplitudes) for wavefunction dumps.

    On solver breakdown the partial series is returned with
    ``failed=True`` rather than raising.
    """
    validate_config(cfg)
    from .spectrum import assemble_h0
    diag0, _ = assemble_h0(cfg.grid, cfg.well)

    if cfg.initial_state >= len(spectrum.states):
        raise ValueError(
            f"initial_state index {cfg.initial_state} out of range: spectrum "
            f"has {len(spectrum.states)} bound states")

    energies = spectrum.energies
    spread = float(energies.max() - energies.min())
    if cfg.dt * spread >= 0.1:
        warnings.warn(
            f"dt={cfg.dt} is coarse for the bound-state energy spread {spread:.3g}: "
            f"dt * spread = {cfg.dt * spread:.3g} >= 0.1", stacklevel=2)

    dx = cfg.grid.dx
    eig = spectrum.eigenvector_matrix()
    psi = spectrum.states[cfg.initial_state].amplitudes.astype(np.complex128)
    cp, dp = _scratch(len(psi))

    n_steps_total = int(round(cfg.t_total / cfg.dt))
    stride = cfg.sample_stride
    n_samples = n_steps_total // stride

    times = np.empty(n_samples + 1)
    occupations = np.empty((n_samples + 1, len(spectrum.states)))
    norms = np.empty(n_samples + 1)
    probs = np.empty(n_samples + 1) if interval is not None else None
    snap_times: list[float] = []
    snaps: list[np.ndarray] = []

    d = cfg.drive
    om_mod = d.omega_mod or 0.0
    t = 0.0
    failed = False
    failure_time = None
    emitted = 0
    for k in range(n_samples + 1):
        if k > 0:
            t = cn_advance(psi, diag0, dx, cfg.dt, t, stride,
                           d.a0, d.epsilon, om_mod, d.omega_carrier,
                           d.carrier_phase, cp, dp)
        norm = float(np.sum(np.abs(psi) ** 2) * dx)
        if not np.isfinite(norm) or not np.isfinite(t):
            failed = True
            failure_time = times[k - 1] if k > 0 else 0.0
            break
        times[k] = t
        occupations[k] = np.abs(eig @ psi * dx) ** 2
        norms[k] = norm
        if probs is not None:
            probs[k] = interval_probability(np.abs(psi) ** 2, cfg.grid,
                                            interval[0], interval[1])
        if snapshot_stride is not None and k % snapshot_stride == 0:
            snap_times.append(t)
            snaps.append(np.abs(psi) ** 2)
            if psi_sink is not None:
                psi_sink(t, psi.copy())
        if observer is not None:
            observer(ObservableSample(
                t=t, occupations=occupations[k].copy(), norm=norm,
                interval_probability=None if probs is None else float(probs[k])))
        emitted = k + 1

    return PropagationResult(
        times=times[:emitted].copy(),
        occupations=occupations[:emitted].copy(),
        norms=norms[:emitted].copy(),
        psi_final=WaveFunction(amplitudes=psi, t=t),
        dt_sample=cfg.dt * stride,
        failed=failed,
        failure_time=failure_time,
        interval_probabilities=None if probs is None else probs[:emitted].copy(),
        snapshot_times=np.array(snap_times) if snapshot_stride is not None else None,
        snapshots=np.stack(snaps) if snaps else None)


def dwell_time(snapshot_times: np.ndarray, snapshots: np.ndarray, grid,
               alpha: float, beta: float) -> float:
    """Finite-window dwell time: int_0^Tw dt int_alpha^beta |psi(x,t)|^2 dx.

    ``snapshots`` holds |psi|^2 rows over the window covered by
    ``snapshot_times``; both integrals are trapezoidal.  The infinite-time
    form diverges for bound dynamics in a box, hence the finite window.
    """
    if len(snapshot_times) < 2:
        raise ValueError("dwell_time needs at least two snapshots")
    inner = np.array([interval_probability(row, grid, alpha, beta)
                      for row in snapshots])
    return float(np.trapezoid(inner, snapshot_times))
