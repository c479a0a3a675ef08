"""Stationary eigenproblem of H0 = p^2/2 + U(x) on the box grid.

The kinetic term is the standard 3-point stencil with Dirichlet walls, so
H0 is real symmetric tridiagonal.  Eigenpairs below the outer potential
level (energy < 0) are the bound states; they are found by
bisection/Sturm-sequence counting plus inverse iteration (LAPACK's
``stebz``/``stein`` via ``scipy.linalg.eigh_tridiagonal``), never by dense
diagonalization.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.linalg import eigh_tridiagonal

from .model import DoubleWell, Grid

__all__ = [
    "BoundState", "Spectrum", "SpectrumError", "assemble_h0",
    "sampled_potential", "solve_bound_states", "momentum_matrix_element",
    "localization_fractions",
]


class SpectrumError(RuntimeError):
    """The requested bound states do not exist on this configuration."""


@dataclass(frozen=True)
class BoundState:
    """One normalized bound eigenstate on the interior grid.

    ``sum(amplitudes**2) * dx == 1`` and the amplitude of largest magnitude
    is positive, which makes overlaps reproducible across eigensolvers.
    """

    index: int
    energy: float
    amplitudes: np.ndarray


@dataclass(frozen=True)
class Spectrum:
    """All bound states plus the derived drive parameters.

    ``omega_carrier`` is the resonance frequency E1 - E0 of the two lowest
    states and ``kappa`` their momentum matrix element |<0|p|1>|.
    """

    states: tuple[BoundState, ...]
    omega_carrier: float
    kappa: float

    @property
    def energies(self) -> np.ndarray:
        return np.array([s.energy for s in self.states])

    def eigenvector_matrix(self) -> np.ndarray:
        """Bound-state amplitudes stacked as rows (n_states, n_interior)."""
        return np.stack([s.amplitudes for s in self.states])


def sampled_potential(grid: Grid, well: DoubleWell) -> np.ndarray:
    """Cell-averaged potential at the interior points.

    Each mesh point represents the cell [x - dx/2, x + dx/2]; averaging the
    rectangular well over the cell keeps the discrete eigenvalues second
    order in dx even though the shaft edges fall between mesh points.
    Away from the four edge cells this equals ``evaluate_potential``.
    """
    x = grid.points()
    dx = grid.dx
    lo = x - dx / 2.0
    hi = x + dx / 2.0

    def overlap(u: float, v: float) -> np.ndarray:
        return np.clip(np.minimum(hi, v) - np.maximum(lo, u), 0.0, None) / dx

    return -well.u_left * overlap(well.a, well.b) \
        - well.u_right * overlap(well.c, well.d)


def assemble_h0(grid: Grid, well: DoubleWell) -> tuple[np.ndarray, np.ndarray]:
    """Tridiagonal H0: diagonal 1/dx^2 + U(x_i), off-diagonal -1/(2 dx^2).

    Returns ``(diagonal, off_diagonal)`` vectors of lengths n and n-1.
    Dirichlet walls: no wraparound terms.
    """
    dx = grid.dx
    diagonal = 1.0 / dx**2 + sampled_potential(grid, well)
    off_diagonal = np.full(grid.n_interior - 1, -0.5 / dx**2)
    return diagonal, off_diagonal


def momentum_matrix_element(s0: BoundState, s1: BoundState, grid: Grid) -> float:
    """kappa = |<s0| p |s1>| with p = -i d/dx by central differences.

    Both states must be normalized on ``grid``; neighbors beyond the walls
    are zero.  For real stationary states the element is purely imaginary,
    so only its magnitude is meaningful.
    """
    dx = grid.dx
    psi0 = s0.amplitudes
    psi1 = s1.amplitudes
    dpsi1 = np.empty_like(psi1)
    dpsi1[1:-1] = (psi1[2:] - psi1[:-2]) / (2.0 * dx)
    dpsi1[0] = psi1[1] / (2.0 * dx)
    dpsi1[-1] = -psi1[-2] / (2.0 * dx)
    return abs(float(np.sum(psi0 * dpsi1) * dx))


def solve_bound_states(h0: tuple[np.ndarray, np.ndarray], grid: Grid,
                       max_states: int | None = None) -> Spectrum:
    """All eigenpairs with energy < 0, in increasing energy order.

    Eigenvectors are normalized to the discrete L2 norm (sum psi^2 dx = 1)
    and sign-fixed so the amplitude of largest magnitude is positive.
    Raises SpectrumError when fewer than two bound states exist.
    """
    diagonal, off_diagonal = h0
    # Kinetic part is positive definite, so no eigenvalue lies below min(U).
    lower = float(np.min(diagonal - 1.0 / grid.dx**2)) - 1.0
    energies, vectors = eigh_tridiagonal(
        diagonal, off_diagonal, select="v", select_range=(lower, 0.0))
    if max_states is not None:
        energies = energies[:max_states]
        vectors = vectors[:, :max_states]
    if len(energies) < 2:
        raise SpectrumError(
            f"need at least 2 bound states (energy < 0), found {len(energies)}; "
            "no tunneling doublet on this configuration")

    vectors = vectors / np.sqrt(grid.dx)
    states = []
    for k in range(len(energies)):
        vec = vectors[:, k]
        if vec[np.argmax(np.abs(vec))] < 0:
            vec = -vec
        states.append(BoundState(index=k, energy=float(energies[k]),
                                 amplitudes=vec))

    kappa = momentum_matrix_element(states[0], states[1], grid)
    return Spectrum(states=tuple(states),
                    omega_carrier=float(energies[1] - energies[0]),
                    kappa=kappa)


def localization_fractions(state: BoundState, grid: Grid, well: DoubleWell,
                           margin: float = 0.5) -> tuple[float, float]:
    """Probability mass inside each shaft widened by ``margin`` on both sides.

    Returns ``(left_fraction, right_fraction)``.  The two regions may
    overlap when the gap is narrower than 2 * margin; each fraction is
    computed independently.
    """
    x = grid.points()
    prob = state.amplitudes**2 * grid.dx
    left = float(np.sum(prob[(x >= well.a - margin) & (x <= well.b + margin)]))
    right = float(np.sum(prob[(x >= well.c - margin) & (x <= well.d + margin)]))
    return left, right
