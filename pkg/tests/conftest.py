"""Shared fixtures: the figure-caption configuration at production and
fine resolutions, plus the two reference runs (unmodulated baseline and
resonantly modulated) that several diagnostics tests and acceptance
criteria share."""

import numpy as np
import pytest

from drivenwell import (
    DoubleWell, Drive, Grid, SimulationConfig, assemble_h0, propagate,
    solve_bound_states,
)

WIDTH_LEFT = 2.337
GAP = 0.876
WIDTH_RIGHT = 2.045
DEPTH_LEFT = 13.82
DEPTH_RIGHT = 11.91
A0 = 0.3
EPSILON = 0.1


def reference_well() -> DoubleWell:
    return DoubleWell.from_geometry(WIDTH_LEFT, GAP,
                                    WIDTH_RIGHT,
                                    DEPTH_LEFT, DEPTH_RIGHT)


def reference_grid(dx: float = 0.05, box: float = 60.0) -> Grid:
    return Grid.from_spacing(-box / 2.0, box / 2.0, dx)


def reference_config(spectrum, grid=None, epsilon=0.0, omega_mod=0.0,
                 dt=0.005, t_total=2000.0, sample_stride=None,
                 a0=A0) -> SimulationConfig:
    grid = grid or reference_grid()
    stride = sample_stride or max(1, int(round(1.0 / dt)))
    drive = Drive(a0=a0, epsilon=epsilon, omega_mod=omega_mod,
                  omega_carrier=spectrum.omega_carrier)
    return SimulationConfig(grid=grid, well=reference_well(), drive=drive,
                            dt=dt, t_total=t_total, sample_stride=stride)


@pytest.fixture(scope="session")
def coarse_grid():
    return reference_grid(0.05)


@pytest.fixture(scope="session")
def coarse_spectrum(coarse_grid):
    return solve_bound_states(assemble_h0(coarse_grid, reference_well()), coarse_grid)


@pytest.fixture(scope="session")
def fine_grid():
    return reference_grid(0.005)


@pytest.fixture(scope="session")
def fine_spectrum(fine_grid):
    return solve_bound_states(assemble_h0(fine_grid, reference_well()), fine_grid)


@pytest.fixture(scope="session")
def baseline_run(coarse_grid, coarse_spectrum):
    """Unmodulated resonant run (epsilon = 0), 4000 time units: the
    regular-tunneling reference for densities and embeddings."""
    cfg = reference_config(coarse_spectrum, coarse_grid, epsilon=0.0,
                       t_total=4000.0)
    result = propagate(cfg, coarse_spectrum)
    assert not result.failed
    return result


@pytest.fixture(scope="session")
def resonant_run(coarse_grid, coarse_spectrum):
    """Modulated at the rotating-wave parametric frequency A0 * kappa:
    the breakdown reference."""
    cfg = reference_config(coarse_spectrum, coarse_grid, epsilon=EPSILON,
                       omega_mod=A0 * coarse_spectrum.kappa, t_total=4000.0)
    result = propagate(cfg, coarse_spectrum)
    assert not result.failed
    return result
