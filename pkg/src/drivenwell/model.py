"""Physical configuration: box grid, rectangular double well, laser drive.

All quantities are dimensionless (hbar = m = 1, charge absorbed into the
drive amplitude).  Types are frozen dataclasses; nothing mutates after
``validate_config`` has accepted a configuration.
"""

from __future__ import annotations

import configparser
from dataclasses import dataclass, replace
from typing import Union

import numpy as np

DEFAULT_MARGIN_FACTOR = 10.0
MIN_MARGIN_FACTOR = 5.0

GROUND = 0
FIRST_EXCITED = 1


class ConfigurationError(ValueError):
    """Configuration violates one or more invariants.

    ``violations`` lists every violated invariant, each naming the field
    and the offending value.
    """

    def __init__(self, violations: list[str]):
        self.violations = list(violations)
        super().__init__("; ".join(self.violations))


@dataclass(frozen=True)
class Grid:
    """Uniform mesh of interior points inside a hard-wall box.

    Wavefunction values at ``x_min`` and ``x_max`` are identically zero
    (Dirichlet walls); only the ``n_interior`` interior points are stored.
    """

    x_min: float
    x_max: float
    n_interior: int

    @property
    def dx(self) -> float:
        return (self.x_max - self.x_min) / (self.n_interior + 1)

    @property
    def length(self) -> float:
        return self.x_max - self.x_min

    def points(self) -> np.ndarray:
        """Interior mesh points, walls excluded."""
        return self.x_min + self.dx * np.arange(1, self.n_interior + 1)

    @staticmethod
    def from_spacing(x_min: float, x_max: float, dx_target: float) -> "Grid":
        """Grid whose spacing is as close as possible to ``dx_target``."""
        n = max(3, int(round((x_max - x_min) / dx_target)) - 1)
        return Grid(x_min, x_max, n)


@dataclass(frozen=True)
class DoubleWell:
    """Two rectangular shafts of unequal depth: -u_left on [a,b], -u_right on [c,d].

    Intervals are closed on both sides; an edge point belongs to its shaft
    (and a tie at b == c goes to the left shaft).
    """

    a: float
    b: float
    c: float
    d: float
    u_left: float
    u_right: float

    @property
    def width_left(self) -> float:
        return self.b - self.a

    @property
    def width_right(self) -> float:
        return self.d - self.c

    @property
    def gap(self) -> float:
        return self.c - self.b

    @property
    def extent(self) -> float:
        return self.d - self.a

    @staticmethod
    def from_geometry(width_left: float, gap: float, width_right: float,
                      u_left: float, u_right: float, center: float = 0.0) -> "DoubleWell":
        """Build a well from widths and gap, centered on ``center``."""
        extent = width_left + gap + width_right
        a = center - extent / 2.0
        b = a + width_left
        c = b + gap
        return DoubleWell(a, b, c, c + width_right, u_left, u_right)


@dataclass(frozen=True)
class Drive:
    """Modulated laser drive: V(t) = -A(t) sin(omega_carrier t + phase) p.

    ``A(t) = a0 (1 - epsilon sin(omega_mod t))``.  ``omega_carrier`` may be
    ``None`` while unresolved ("resonant" in config files); it must be a
    positive number before propagation.
    """

    a0: float
    epsilon: float
    omega_mod: Union[float, None]
    omega_carrier: Union[float, None]
    carrier_phase: float = 0.0


@dataclass(frozen=True)
class SimulationConfig:
    grid: Grid
    well: DoubleWell
    drive: Drive
    dt: float = 0.005
    t_total: float = 20000.0
    sample_stride: int = 200
    initial_state: int = GROUND
    margin_factor: float = DEFAULT_MARGIN_FACTOR


def evaluate_potential(well: DoubleWell, x):
    """Potential at position(s) x: -u_left on [a,b], -u_right on [c,d], 0 elsewhere.

    Closed intervals on both sides; when b == c the tie goes to the left shaft.
    Accepts scalars or arrays.
    """
    x = np.asarray(x, dtype=float)
    in_left = (x >= well.a) & (x <= well.b)
    in_right = (x >= well.c) & (x <= well.d) & ~in_left
    out = np.where(in_left, -well.u_left, np.where(in_right, -well.u_right, 0.0))
    return out if out.ndim else float(out)


def drive_amplitude(drive: Drive, t):
    """Vector-potential amplitude A(t) = a0 (1 - epsilon sin(omega_mod t))."""
    om = drive.omega_mod or 0.0
    return drive.a0 * (1.0 - drive.epsilon * np.sin(om * np.asarray(t, dtype=float)))


def collect_violations(cfg: SimulationConfig, require_resolved: bool = True) -> list[str]:
    """Every violated invariant of ``cfg``, as human-readable strings.

    ``require_resolved=False`` tolerates 'resonant' placeholders in the
    drive frequencies (they are resolved against the computed spectrum
    before any propagation).
    """
    v: list[str] = []
    g, w, dr = cfg.grid, cfg.well, cfg.drive

    if not g.x_min < g.x_max:
        v.append(f"grid: x_min must be < x_max, got x_min={g.x_min} x_max={g.x_max}")
    if g.n_interior < 3:
        v.append(f"grid: n_interior must be >= 3, got {g.n_interior}")

    if not (w.a < w.b <= w.c < w.d):
        v.append(f"well: edge ordering a < b <= c < d violated, got "
                 f"a={w.a} b={w.b} c={w.c} d={w.d}")
    if w.u_left <= 0:
        v.append(f"well: u_left must be > 0, got {w.u_left}")
    if w.u_right <= 0:
        v.append(f"well: u_right must be > 0, got {w.u_right}")
    if w.u_left == w.u_right:
        v.append(f"well: depths must differ (unsymmetrical well), both are {w.u_left}")

    if g.x_min < g.x_max:
        if not (g.x_min < w.a and w.d < g.x_max):
            v.append(f"well: edges [{w.a}, {w.d}] must lie strictly inside "
                     f"the box ({g.x_min}, {g.x_max})")
        if cfg.margin_factor < MIN_MARGIN_FACTOR:
            v.append(f"grid: margin_factor must be >= {MIN_MARGIN_FACTOR}, "
                     f"got {cfg.margin_factor}")
        elif w.a < w.b <= w.c < w.d and g.length < cfg.margin_factor * w.extent:
            v.append(f"grid: box length {g.length} is below margin_factor "
                     f"({cfg.margin_factor}) times the well extent {w.extent}")

    if dr.a0 < 0:
        v.append(f"drive: a0 must be >= 0, got {dr.a0}")
    if not 0.0 <= dr.epsilon < 1.0:
        v.append(f"drive: epsilon must lie in [0, 1), got {dr.epsilon}")
    if dr.omega_mod is not None and dr.omega_mod < 0:
        v.append(f"drive: omega_mod must be >= 0, got {dr.omega_mod}")
    if require_resolved:
        if dr.epsilon > 0 and dr.omega_mod is None:
            v.append("drive: omega_mod is unresolved ('resonant') but epsilon > 0")
        if dr.omega_carrier is None:
            v.append("drive: omega_carrier is unresolved ('resonant'); "
                     "resolve it against a computed spectrum first")
        elif dr.omega_carrier <= 0:
            v.append(f"drive: omega_carrier must be > 0, got {dr.omega_carrier}")

    if cfg.dt <= 0:
        v.append(f"run: dt must be > 0, got {cfg.dt}")
    if cfg.t_total < 0:
        v.append(f"run: t_total must be >= 0, got {cfg.t_total}")
    if cfg.sample_stride < 1:
        v.append(f"run: sample_stride must be >= 1, got {cfg.sample_stride}")
    if cfg.initial_state < 0:
        v.append(f"run: initial_state index must be >= 0, got {cfg.initial_state}")

    return v


def validate_config(cfg: SimulationConfig, require_resolved: bool = True) -> SimulationConfig:
    """Check every invariant; return the config or raise ConfigurationError.

    The returned object is the (already normalized) input: dx is derived,
    geometry-form wells were centered at load time.
    """
    violations = collect_violations(cfg, require_resolved=require_resolved)
    if violations:
        raise ConfigurationError(violations)
    return cfg


# --- config file format -----------------------------------------------------
#
# INI-style, sections [grid], [well], [drive], [run].  See README for the
# full key table.  Unknown sections or keys are errors.

_GRID_KEYS = {"x_min", "x_max", "n_interior", "dx", "margin_factor"}
_WELL_KEYS = {"a", "b", "c", "d", "width_left", "width_right", "gap",
              "center", "u_left", "u_right"}
_DRIVE_KEYS = {"a0", "epsilon", "omega_mod", "omega_carrier", "carrier_phase"}
_RUN_KEYS = {"dt", "t_total", "sample_stride", "initial_state"}

_RESONANT = "resonant"


def _section(parser: configparser.ConfigParser, name: str, allowed: set[str]) -> dict:
    if not parser.has_section(name):
        raise ConfigurationError([f"config: missing section [{name}]"])
    items = dict(parser.items(name))
    unknown = set(items) - allowed
    if unknown:
        raise ConfigurationError(
            [f"config: unknown key '{k}' in section [{name}]" for k in sorted(unknown)])
    return items


def _need(items: dict, section: str, key: str) -> str:
    if key not in items:
        raise ConfigurationError([f"config: missing key '{key}' in section [{section}]"])
    return items[key]


def load_config(path: str) -> SimulationConfig:
    """Parse a key = value config file into a SimulationConfig.

    ``omega_carrier`` and ``omega_mod`` accept the literal value
    ``resonant``; the CLI resolves those against the computed spectrum
    (carrier -> E1 - E0, modulation -> A0 * kappa).
    """
    parser = configparser.ConfigParser(inline_comment_prefixes=("#", ";"))
    read = parser.read(path)
    if not read:
        raise ConfigurationError([f"config: cannot read file '{path}'"])
    extra = set(parser.sections()) - {"grid", "well", "drive", "run"}
    if extra:
        raise ConfigurationError(
            [f"config: unknown section [{s}]" for s in sorted(extra)])

    try:
        gs = _section(parser, "grid", _GRID_KEYS)
        x_min = float(_need(gs, "grid", "x_min"))
        x_max = float(_need(gs, "grid", "x_max"))
        if "n_interior" in gs:
            grid = Grid(x_min, x_max, int(gs["n_interior"]))
        elif "dx" in gs:
            grid = Grid.from_spacing(x_min, x_max, float(gs["dx"]))
        else:
            raise ConfigurationError(
                ["config: section [grid] needs either n_interior or dx"])
        margin = float(gs.get("margin_factor", DEFAULT_MARGIN_FACTOR))

        ws = _section(parser, "well", _WELL_KEYS)
        u_left = float(_need(ws, "well", "u_left"))
        u_right = float(_need(ws, "well", "u_right"))
        if {"a", "b", "c", "d"} <= set(ws):
            well = DoubleWell(float(ws["a"]), float(ws["b"]),
                              float(ws["c"]), float(ws["d"]), u_left, u_right)
        elif {"width_left", "width_right", "gap"} <= set(ws):
            center = float(ws.get("center", (x_min + x_max) / 2.0))
            well = DoubleWell.from_geometry(
                float(ws["width_left"]), float(ws["gap"]), float(ws["width_right"]),
                u_left, u_right, center=center)
        else:
            raise ConfigurationError(
                ["config: section [well] needs either a,b,c,d or "
                 "width_left,gap,width_right"])

        ds = _section(parser, "drive", _DRIVE_KEYS)

        def _freq(key: str, default=None):
            raw = ds.get(key, default)
            if raw is None:
                raise ConfigurationError(
                    [f"config: missing key '{key}' in section [drive]"])
            if isinstance(raw, str) and raw.strip().lower() == _RESONANT:
                return None
            return float(raw)

        drive = Drive(a0=float(_need(ds, "drive", "a0")),
                      epsilon=float(_need(ds, "drive", "epsilon")),
                      omega_mod=_freq("omega_mod"),
                      omega_carrier=_freq("omega_carrier"),
                      carrier_phase=float(ds.get("carrier_phase", 0.0)))

        rs = _section(parser, "run", _RUN_KEYS)
        initial = rs.get("initial_state", "ground").strip().lower()
        if initial == "ground":
            state = GROUND
        elif initial == "first_excited":
            state = FIRST_EXCITED
        else:
            state = int(initial)

        return SimulationConfig(
            grid=grid, well=well, drive=drive,
            dt=float(rs.get("dt", 0.005)),
            t_total=float(rs.get("t_total", 20000.0)),
            sample_stride=int(rs.get("sample_stride", 200)),
            initial_state=state,
            margin_factor=margin)
    except ConfigurationError:
        raise
    except ValueError as exc:
        raise ConfigurationError([f"config: {exc}"]) from exc


def config_as_dict(cfg: SimulationConfig) -> dict:
    """Flatten a config into the section/key layout of the file format."""
    carrier = cfg.drive.omega_carrier
    om_mod = cfg.drive.omega_mod
    return {
        "grid": {"x_min": cfg.grid.x_min, "x_max": cfg.grid.x_max,
                 "n_interior": cfg.grid.n_interior,
                 "margin_factor": cfg.margin_factor},
        "well": {"a": cfg.well.a, "b": cfg.well.b, "c": cfg.well.c,
                 "d": cfg.well.d, "u_left": cfg.well.u_left,
                 "u_right": cfg.well.u_right},
        "drive": {"a0": cfg.drive.a0, "epsilon": cfg.drive.epsilon,
                  "omega_mod": _RESONANT if om_mod is None else om_mod,
                  "omega_carrier": _RESONANT if carrier is None else carrier,
                  "carrier_phase": cfg.drive.carrier_phase},
        "run": {"dt": cfg.dt, "t_total": cfg.t_total,
                "sample_stride": cfg.sample_stride,
                "initial_state": cfg.initial_state},
    }


def with_resolved_drive(cfg: SimulationConfig, omega_carrier: float,
                        omega_mod: Union[float, None] = None) -> SimulationConfig:
    """Fill in 'resonant' placeholders with computed frequencies."""
    drive = cfg.drive
    carrier = drive.omega_carrier if drive.omega_carrier is not None else omega_carrier
    mod = drive.omega_mod
    if mod is None:
        if omega_mod is None:
            raise ConfigurationError(
                ["drive: omega_mod is 'resonant' but no resolved value was supplied"])
        mod = omega_mod
    return replace(cfg, drive=replace(drive, omega_carrier=carrier, omega_mod=mod))
