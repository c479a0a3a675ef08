"""JIT-compiled inner loop of the Crank-Nicolson propagator.

A production-scale run takes millions of complex tridiagonal solves, so the
step loop is fused into a single numba kernel: right-hand side assembly,
the Thomas forward sweep and the back substitution share one pass over
the grid per direction.
"""

import numba
import numpy as np


@numba.njit(cache=True)
def cn_advance(psi, diag0, dx, dt, t, n_steps,
               a0, epsilon, omega_mod, omega_carrier, carrier_phase,
               cp, dp):
    """Advance ``psi`` in place by ``n_steps`` Crank-Nicolson steps.

    Solves (I + i dt/2 H(t_mid)) psi_new = (I - i dt/2 H(t_mid)) psi_old
    with H evaluated at the step midpoint.  H has real diagonal ``diag0``
    (kinetic + potential) and off-diagonals -1/(2 dx^2) -/+ i g/(2 dx)
    where g(t) = -A(t) sin(omega_carrier t + phase): Hermitian, not
    symmetric.  ``cp`` and ``dp`` are caller-provided complex scratch
    arrays of the same length as ``psi``.

    Returns the final time, or NaN on a zero pivot in the Thomas sweep
    (never expected for validated configurations).
    """
    n = psi.shape[0]
    ok = -0.5 / (dx * dx)
    beta = 0.5 * dt
    for _ in range(n_steps):
        t_mid = t + 0.5 * dt
        amp = a0 * (1.0 - epsilon * np.sin(omega_mod * t_mid))
        g = -amp * np.sin(omega_carrier * t_mid + carrier_phase)
        q = g / (2.0 * dx)

        # A = I + i beta H: super/sub diagonals are constants per step.
        a_sup = beta * q + 1j * beta * ok
        a_sub = -beta * q + 1j * beta * ok

        # Fused rhs evaluation (B psi, with B = I - i beta H) and forward
        # elimination; psi stays intact until the backward pass.
        b0 = 1.0 + 1j * beta * diag0[0]
        if b0 == 0.0:
            psi[0] = np.nan
            return np.nan
        rhs = (1.0 - 1j * beta * diag0[0]) * psi[0] - a_sup * psi[1]
        inv = 1.0 / b0
        cp[0] = a_sup * inv
        dp[0] = rhs * inv
        for i in range(1, n - 1):
            rhs = (1.0 - 1j * beta * diag0[i]) * psi[i] \
                - a_sup * psi[i + 1] - a_sub * psi[i - 1]
            m = (1.0 + 1j * beta * diag0[i]) - a_sub * cp[i - 1]
            if m == 0.0:
                psi[0] = np.nan
                return np.nan
            inv = 1.0 / m
            cp[i] = a_sup * inv
            dp[i] = (rhs - a_sub * dp[i - 1]) * inv
        rhs = (1.0 - 1j * beta * diag0[n - 1]) * psi[n - 1] - a_sub * psi[n - 2]
        m = (1.0 + 1j * beta * diag0[n - 1]) - a_sub * cp[n - 2]
        if m == 0.0:
            psi[0] = np.nan
            return np.nan
        dp[n - 1] = (rhs - a_sub * dp[n - 2]) / m

        psi[n - 1] = dp[n - 1]
        for i in range(n - 2, -1, -1):
            psi[i] = dp[i] - cp[i] * psi[i + 1]
        t += dt
    return t


@numba.njit(cache=True)
def pair_correlation_counts(points, radii_sq):
    """Number of point pairs closer than each radius (Euclidean, 3D)."""
    m = points.shape[0]
    counts = np.zeros(radii_sq.shape[0], dtype=np.int64)
    for i in range(m):
        xi = points[i, 0]
        yi = points[i, 1]
        zi = points[i, 2]
        for j in range(i + 1, m):
            ddx = points[j, 0] - xi
            ddy = points[j, 1] - yi
            ddz = points[j, 2] - zi
            d2 = ddx * ddx + ddy * ddy + ddz * ddz
            for k in range(radii_sq.shape[0]):
                if d2 < radii_sq[k]:
                    counts[k] += 1
    return counts
