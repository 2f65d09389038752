"""Classical phase-sensitive chaotic light vs entangled photon pairs under dispersion.

Mode-sum and Markov chaotic field generators, quadratic spectral-phase
media, intensity correlation estimators with Monte Carlo error bars, and
the single-sum pair coincidence profile.
"""

from .correlation import (
    CorrelationEstimate,
    QuadraticFit,
    SweepTable,
    auto_correlation,
    cross_correlation,
    dispersion_sweep,
    fit_quadratic_surface,
    lag_grid,
    per_realization_intensity_gap,
    simulate_correlations,
)
from .dispersion import (
    IDENTITY,
    DispersiveMedium,
    apply_dispersion_modes,
    apply_dispersion_series,
    cross_term,
)
from .errors import ConfigError, NumericalGuardError
from .mode_field import (
    ComplexFieldSeries,
    RealSeries,
    SpectralEnvelope,
    SpectralModes,
    TimeGrid,
    conjugate_partner_modes,
    intensity,
    markov_chaotic_field,
    pulse_modes,
    rms_width,
    sample_chaotic_modes,
    synthesize_field,
)
from .quantum_biphoton import (
    BiphotonSpectrum,
    classical_vs_quantum_report,
    coincidence_amplitude,
    coincidence_profile,
    gaussian_gvd_rms_width,
)

__version__ = "0.1.0"
