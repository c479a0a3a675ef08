"""Driven tunneling of a charged particle in a 1D rectangular double well.

Crank-Nicolson propagation of the time-dependent Schroedinger equation in
a hard-wall box, plus the diagnostics used to detect parametric-resonance
breakdown of quasi-periodic tunneling: occupation-probability series,
delay embedding, and visiting-frequency densities.
"""

from .model import (
    ConfigurationError, DoubleWell, Drive, Grid, SimulationConfig,
    drive_amplitude, evaluate_potential, load_config, validate_config,
    with_resolved_drive,
)
from .spectrum import (
    BoundState, Spectrum, SpectrumError, assemble_h0, localization_fractions,
    momentum_matrix_element, sampled_potential, solve_bound_states,
)
from .propagator import (
    ObservableSample, PropagationError, PropagationResult, WaveFunction,
    crank_nicolson_step, drive_operator_coefficient, dwell_time,
    interval_probability, propagate,
)
from .analysis import (
    AnalysisError, EmbeddedPath, OccupationSeries, ScanResult, SpectralLine,
    VisitingDensity, correlation_dimension_estimate, delay_embed,
    resonance_scan, triplet_spectrum, twin_peak_breakdown, visiting_density,
)

__version__ = "0.1.0"
