"""Quadratic spectral phase from a dispersive medium.

A medium of length ``L`` imposes the phase ``(alpha * dw + beta * dw**2) * L``
on the component at baseband offset ``dw``. The constant ``k0 * L`` term
is a global phase and is dropped. The filter can be applied on the mode
list directly or on a sampled field through the discrete Fourier
transform; both use the same baseband sign convention so the two routes
agree term by term.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .mode_field import ComplexFieldSeries, SpectralModes


@dataclass(frozen=True)
class DispersiveMedium:
    """Group-delay coefficient ``alpha``, dispersion ``beta`` and length ``L``.

    With ``rms_width = 1`` (the reduced units used throughout) the
    dimensionless dispersion is ``D = beta * L``.
    """

    group_delay_coeff: float = 0.0
    dispersion_coeff: float = 0.0
    length: float = 1.0

    def __post_init__(self):
        if not (np.isfinite(self.group_delay_coeff) and np.isfinite(self.dispersion_coeff)):
            raise ValueError("medium coefficients must be finite")
        if not np.isfinite(self.length) or self.length < 0:
            raise ValueError(f"length must be finite and >= 0, got {self.length!r}")

    @classmethod
    def reduced(cls, d: float, rms_width: float = 1.0, group_delay: float = 0.0) -> "DispersiveMedium":
        """Unit-length medium with dimensionless dispersion ``d = beta L sigma^2``."""
        return cls(group_delay_coeff=group_delay, dispersion_coeff=d / rms_width**2, length=1.0)

    @property
    def is_identity(self) -> bool:
        return self.length == 0 or (self.group_delay_coeff == 0 and self.dispersion_coeff == 0)

    def spectral_phase(self, offsets) -> np.ndarray:
        x = np.asarray(offsets, dtype=float)
        return (self.group_delay_coeff * x + self.dispersion_coeff * x**2) * self.length


IDENTITY = DispersiveMedium(0.0, 0.0, 0.0)


def apply_dispersion_modes(m: SpectralModes, med: DispersiveMedium) -> SpectralModes:
    """Advance every mode phase by the medium's spectral phase."""
    return SpectralModes(m.offsets, m.amplitudes, m.phases + med.spectral_phase(m.offsets), m.carrier)


def dft_offsets(count: int, step: float) -> np.ndarray:
    """Baseband offset of each ``np.fft.fft`` bin.

    A component ``exp(-i dw t)`` lands in the bin whose ordinary frequency
    is ``-dw / 2 pi``.
    """
    return -2 * np.pi * np.fft.fftfreq(count, d=step)


def apply_dispersion_series(f: ComplexFieldSeries, med: DispersiveMedium) -> ComplexFieldSeries:
    """Phase-filter a sampled field in the Fourier domain.

    The field is treated as periodic over the grid; exact agreement with
    the mode route requires a grid that spans whole periods of the mode sum
    (see ``TimeGrid.periodic``). Energy is conserved to round-off.
    """
    if med.is_identity:
        return f
    grid = f.grid
    phase = med.spectral_phase(dft_offsets(grid.count, grid.step))
    out = np.fft.ifft(np.fft.fft(f.samples) * np.exp(1j * phase))
    return ComplexFieldSeries(grid, out, f.carrier)


def cross_term(
    m1: SpectralModes,
    m2: SpectralModes,
    n: int,
    n2: int,
    med1: DispersiveMedium,
    med2: DispersiveMedium,
    t: float,
    t2: float,
) -> complex:
    """One term ``(n, n2)`` of the product ``E1'(t) E2'(t2)``.

    Each beam contributes its own mode ``c exp(i phi) exp(-i dw t)`` times
    its medium phase. With ``m2`` the conjugate partner of ``m1`` and
    ``n2`` the partner index of mode ``n'`` of beam 1 (``len(m1) - 1 - n'``),
    the offsets and phases of beam 2 enter with flipped signs and the
    result is the classical double-sum cross term with residual dispersion
    phase ``beta1 dw_n^2 L + beta2 dw_n'^2 L``.
    """
    for idx, m in ((n, m1), (n2, m2)):
        if not 0 <= idx < len(m):
            raise IndexError(f"mode index {idx} out of range for {len(m)} modes")
    a = m1.amplitudes[n] * m2.amplitudes[n2]
    w1, w2 = m1.offsets[n], m2.offsets[n2]
    phase = (
        m1.phases[n]
        + m2.phases[n2]
        - (w1 * t + w2 * t2)
        + med1.spectral_phase(w1)
        + med2.spectral_phase(w2)
    )
    return complex(a * np.exp(1j * phase))
