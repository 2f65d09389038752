"""
Short pulses are still broadened
================================

A chaotic pulse pair with anti-correlated spectra passes through media of
opposite dispersion. Each classical pulse broadens by the usual GVD factor,
while the pair coincidence profile built on the same spectrum is untouched.
"""

import numpy as np

from dispcancel import (
    IDENTITY,
    BiphotonSpectrum,
    DispersiveMedium,
    SpectralEnvelope,
    TimeGrid,
    apply_dispersion_modes,
    coincidence_profile,
    conjugate_partner_modes,
    gaussian_gvd_rms_width,
    intensity,
    pulse_modes,
    rms_width,
    synthesize_field,
)

b = 0.5  # pulse spectral RMS width
m1 = pulse_modes(SpectralEnvelope(), 256, b)
m2 = conjugate_partner_modes(m1)
grid = TimeGrid.centered(160.0, 0.05)
t = grid.times
lags = np.arange(-1500, 1501) * 0.05
pair = BiphotonSpectrum.from_modes(m1)
q0 = coincidence_profile(pair, lags, IDENTITY, IDENTITY)

for D in (0.0, 2.0, 5.0):
    med1, med2 = DispersiveMedium.reduced(D), DispersiveMedium.reduced(-D)
    w1 = rms_width(t, intensity(synthesize_field(apply_dispersion_modes(m1, med1), grid)).values)
    w2 = rms_width(t, intensity(synthesize_field(apply_dispersion_modes(m2, med2), grid)).values)
    q = coincidence_profile(pair, lags, med1, med2)
    print(
        f"D={D:3.1f}: classical widths {w1:7.4f} {w2:7.4f} (oracle {gaussian_gvd_rms_width(b, D):7.4f}); "
        f"coincidence profile unchanged: {np.array_equal(q.g2, q0.g2)}"
    )
