"""Classical chaotic fields built from discrete spectral modes.

Fields are kept in baseband: the carrier factor ``exp(-i w0 t)`` is dropped
and ``w0`` is carried along as metadata only. With that convention the
anti-correlated partner of a beam is exactly its pointwise complex
conjugate, and every intensity is carrier independent.

Two generators are provided:

* a mode sum ``E(t) = sum_n c_n exp(i phi_n) exp(-i dw_n t)`` with Rayleigh
  ``c_n`` and uniform ``phi_n`` (circular complex Gaussian mode amplitudes,
  hence a Gaussian field), and
* a complex first-order autoregressive (Ornstein-Uhlenbeck) process whose
  field autocorrelation decays as ``exp(-|tau| / tau_c)``.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence, Union

import numpy as np
from scipy.signal import lfilter

from .errors import NumericalGuardError

Seed = Union[int, Sequence[int]]


def make_rng(seed: Seed, *substream: int) -> np.random.Generator:
    """Generator for the substream ``(seed, *substream)``.

    Substreams are derived through ``SeedSequence`` entropy, so realization
    ``r`` of an ensemble draws the same numbers no matter which worker or
    chunk produces it.
    """
    if isinstance(seed, (int, np.integer)):
        key = [int(seed)]
    else:
        key = [int(s) for s in seed]
    key.extend(int(s) for s in substream)
    if any(k < 0 for k in key):
        raise ValueError(f"seed entries must be non-negative, got {key}")
    return np.random.default_rng(np.random.SeedSequence(key))


def _frozen(a, dtype=float):
    a = np.array(a, dtype=dtype)
    a.setflags(write=False)
    return a


@dataclass(frozen=True)
class SpectralEnvelope:
    """Gaussian power envelope of a chaotic beam.

    ``rms_width`` is the RMS width of the power spectrum (rad per unit time)
    and ``mean_intensity`` the target ensemble mean of ``|E|^2``.
    """

    rms_width: float = 1.0
    mean_intensity: float = 1.0
    shape: str = "gaussian"

    def __post_init__(self):
        for name in ("rms_width", "mean_intensity"):
            v = getattr(self, name)
            if not np.isfinite(v) or v <= 0:
                raise ValueError(f"{name} must be finite and positive, got {v!r}")
        if self.shape != "gaussian":
            raise ValueError(f"unsupported envelope shape {self.shape!r}")

    def offsets(self, n_modes: int, half_span: float = 4.0) -> np.ndarray:
        """Uniform symmetric mode grid on ``[-half_span, half_span] * rms_width``."""
        if int(n_modes) != n_modes or n_modes < 1:
            raise ValueError(f"n_modes must be a positive integer, got {n_modes!r}")
        if not np.isfinite(half_span) or half_span <= 0:
            raise ValueError(f"half_span must be finite and positive, got {half_span!r}")
        if n_modes == 1:
            return np.zeros(1)
        edge = half_span * self.rms_width
        return np.linspace(-edge, edge, int(n_modes))

    def mode_powers(self, offsets) -> np.ndarray:
        """Expected ``c_n^2`` per mode; sums to ``mean_intensity``."""
        x = np.asarray(offsets, dtype=float)
        w = np.exp(-(x**2) / (2.0 * self.rms_width**2))
        return self.mean_intensity * w / w.sum()


@dataclass(frozen=True)
class SpectralModes:
    """Discrete mode decomposition of one beam (offsets, amplitudes, phases)."""

    offsets: np.ndarray
    amplitudes: np.ndarray
    phases: np.ndarray
    carrier: float = 0.0

    def __post_init__(self):
        off = _frozen(self.offsets)
        amp = _frozen(self.amplitudes)
        ph = _frozen(self.phases)
        if off.ndim != 1 or off.size < 1:
            raise ValueError("offsets must be a non-empty 1-d sequence")
        if amp.shape != off.shape or ph.shape != off.shape:
            raise ValueError(
                f"offsets, amplitudes and phases must have equal length "
                f"({off.size}, {amp.size}, {ph.size})"
            )
        if not (np.all(np.isfinite(off)) and np.all(np.isfinite(amp)) and np.all(np.isfinite(ph))):
            raise ValueError("mode parameters must be finite")
        if np.any(amp < 0):
            raise ValueError("amplitudes must be non-negative")
        if off.size > 1 and np.any(np.diff(off) <= 0):
            raise ValueError("offsets must be strictly increasing")
        object.__setattr__(self, "offsets", off)
        object.__setattr__(self, "amplitudes", amp)
        object.__setattr__(self, "phases", ph)

    def __len__(self):
        return self.offsets.size

    @property
    def complex_amplitudes(self) -> np.ndarray:
        return self.amplitudes * np.exp(1j * self.phases)

    @property
    def spacing(self) -> float:
        """Mode spacing for uniform grids (inf for a single mode)."""
        if len(self) == 1:
            return np.inf
        return float(np.mean(np.diff(self.offsets)))


@dataclass(frozen=True)
class TimeGrid:
    """Uniform time grid ``t_k = start + k * step`` for ``k < count``."""

    start: float
    step: float
    count: int

    def __post_init__(self):
        if not np.isfinite(self.step) or self.step <= 0:
            raise ValueError(f"step must be positive, got {self.step!r}")
        if int(self.count) != self.count or self.count < 2:
            raise ValueError(f"count must be an integer >= 2, got {self.count!r}")
        if not np.isfinite(self.start):
            raise ValueError("start must be finite")
        object.__setattr__(self, "count", int(self.count))

    @classmethod
    def centered(cls, window: float, step: float) -> "TimeGrid":
        """Grid of about ``window`` duration with ``t = 0`` on a sample."""
        count = int(round(window / step))
        if count < 2:
            raise ValueError(f"window {window} too short for step {step}")
        return cls(start=-(count // 2) * step, step=step, count=count)

    @classmethod
    def from_times(cls, times) -> "TimeGrid":
        t = np.asarray(times, dtype=float)
        if t.ndim != 1 or t.size < 2:
            raise ValueError("need at least two sample times")
        d = np.diff(t)
        if np.any(d <= 0) or np.ptp(d) > 1e-9 * abs(d.mean()):
            raise ValueError("time samples are not uniformly spaced")
        return cls(start=float(t[0]), step=float(d.mean()), count=t.size)

    @classmethod
    def periodic(cls, modes: SpectralModes, count: int) -> "TimeGrid":
        """Grid spanning exactly one repetition period of a uniform mode sum.

        On this grid the discrete Fourier frequencies contain every mode
        offset, so the spectral-transform route is exact. Symmetric grids
        with an even mode count sit on half-integer multiples of the
        spacing and repeat (up to sign) after ``2 pi / spacing``; the full
        period is twice that.
        """
        dw = modes.spacing
        if not np.isfinite(dw):
            raise ValueError("a single mode has no finite period")
        frac = modes.offsets[0] / dw - np.round(modes.offsets[0] / dw)
        period = 2 * np.pi / dw
        if abs(abs(frac) - 0.5) < 1e-9:
            period *= 2
        elif abs(frac) > 1e-9:
            raise ValueError("offsets are not on a (half-)integer multiple of the spacing")
        return cls(start=0.0, step=period / count, count=count)

    @property
    def times(self) -> np.ndarray:
        return self.start + self.step * np.arange(self.count)

    @property
    def duration(self) -> float:
        return self.step * self.count

    def check_nyquist(self, max_offset: float):
        if self.step * max_offset >= np.pi:
            raise NumericalGuardError(
                f"step {self.step} aliases offsets up to {max_offset} "
                f"(need step * max|dw| < pi)"
            )


@dataclass(frozen=True)
class ComplexFieldSeries:
    """Baseband analytic signal sampled on a ``TimeGrid``."""

    grid: TimeGrid
    samples: np.ndarray
    carrier: float = 0.0

    def __post_init__(self):
        s = _frozen(self.samples, complex)
        if s.shape != (self.grid.count,):
            raise ValueError(f"expected {self.grid.count} samples, got shape {s.shape}")
        if not np.all(np.isfinite(s)):
            raise ValueError("field samples must be finite")
        object.__setattr__(self, "samples", s)

    def conjugate(self) -> "ComplexFieldSeries":
        return ComplexFieldSeries(self.grid, np.conj(self.samples), self.carrier)


@dataclass(frozen=True)
class RealSeries:
    """Non-negative intensity trace on a ``TimeGrid``."""

    grid: TimeGrid
    values: np.ndarray = field(repr=False)

    def __post_init__(self):
        v = _frozen(self.values)
        if v.shape != (self.grid.count,):
            raise ValueError(f"expected {self.grid.count} values, got shape {v.shape}")
        if not np.all(np.isfinite(v)) or np.any(v < 0):
            raise ValueError("intensity values must be finite and non-negative")
        object.__setattr__(self, "values", v)


def _draw_chaotic(rng, powers):
    amps = rng.rayleigh(np.sqrt(powers / 2.0))
    phases = rng.uniform(0.0, 2 * np.pi, size=powers.size)
    return amps, phases


def sample_chaotic_modes(
    env: SpectralEnvelope,
    n_modes: int = 256,
    half_span: float = 4.0,
    seed: Seed = 0,
    carrier: float = 0.0,
) -> SpectralModes:
    """Draw one realization of a chaotic beam.

    Amplitudes are Rayleigh with ``<c_n^2>`` following the Gaussian
    envelope (normalized so the expected total power is
    ``env.mean_intensity``) and phases are uniform on ``[0, 2 pi)``.
    """
    offsets = env.offsets(n_modes, half_span)
    amps, phases = _draw_chaotic(make_rng(seed), env.mode_powers(offsets))
    return SpectralModes(offsets, amps, phases, carrier)


def chaotic_ensemble(
    env: SpectralEnvelope,
    n_modes: int,
    half_span: float,
    seed: int,
    realizations,
) -> tuple[np.ndarray, np.ndarray]:
    """Complex mode amplitudes for a block of realizations.

    Row ``i`` equals ``sample_chaotic_modes(..., seed=(seed, r_i))
    .complex_amplitudes`` where ``r_i = realizations[i]``; blocks can be
    produced in any order or split across workers.

    Returns ``(offsets, coeffs)`` with ``coeffs`` of shape ``(R, n_modes)``.
    """
    offsets = env.offsets(n_modes, half_span)
    powers = env.mode_powers(offsets)
    rows = np.empty((len(realizations), offsets.size), dtype=complex)
    for i, r in enumerate(realizations):
        amps, phases = _draw_chaotic(make_rng(seed, r), powers)
        rows[i] = amps * np.exp(1j * phases)
    return offsets, rows


def conjugate_partner_modes(m: SpectralModes) -> SpectralModes:
    """Partner beam with anti-correlated frequencies and phases."""
    return SpectralModes(-m.offsets[::-1], m.amplitudes[::-1], -m.phases[::-1], m.carrier)


def propagator(offsets, grid: TimeGrid) -> np.ndarray:
    """Matrix ``exp(-i dw_n t_k)`` of shape ``(n_modes, grid.count)``."""
    offsets = np.asarray(offsets, dtype=float)
    grid.check_nyquist(np.max(np.abs(offsets)))
    return np.exp(-1j * np.outer(offsets, grid.times))


def synthesize_ensemble(offsets, coeffs, grid: TimeGrid) -> np.ndarray:
    """Mode sums for every row of ``coeffs``; shape ``(R, grid.count)``."""
    return np.asarray(coeffs) @ propagator(offsets, grid)


def synthesize_field(m: SpectralModes, grid: TimeGrid) -> ComplexFieldSeries:
    """Evaluate ``sum_n c_n exp(i phi_n) exp(-i dw_n t)`` on the grid."""
    samples = m.complex_amplitudes @ propagator(m.offsets, grid)
    return ComplexFieldSeries(grid, samples, m.carrier)


def intensity_values(samples) -> np.ndarray:
    # re^2 + im^2 is symmetric under conjugation bit for bit
    s = np.asarray(samples)
    return s.real**2 + s.imag**2


def intensity(f: ComplexFieldSeries) -> RealSeries:
    return RealSeries(f.grid, intensity_values(f.samples))


def markov_chaotic_field(
    grid: TimeGrid,
    coherence_time: float,
    mean_intensity: float = 1.0,
    seed: Seed = 0,
    carrier: float = 0.0,
) -> ComplexFieldSeries:
    """Stationary complex AR(1) field with ``g1(tau) = exp(-|tau| / tau_c)``.

    The first sample is drawn from the stationary circular Gaussian law, so
    the path is stationary from ``t_0`` on. The partner beam is the
    pointwise conjugate of the returned series.
    """
    if not np.isfinite(coherence_time) or coherence_time <= 0:
        raise ValueError(f"coherence_time must be positive, got {coherence_time!r}")
    if not np.isfinite(mean_intensity) or mean_intensity <= 0:
        raise ValueError(f"mean_intensity must be positive, got {mean_intensity!r}")
    if grid.step >= coherence_time / 5:
        raise NumericalGuardError(
            f"step {grid.step} too coarse for coherence time {coherence_time} "
            f"(need step < coherence_time / 5)"
        )
    rng = make_rng(seed)
    rho = np.exp(-grid.step / coherence_time)
    w = rng.standard_normal((grid.count, 2)) @ np.array([1.0, 1j])
    w *= np.sqrt(mean_intensity / 2.0)
    w[1:] *= np.sqrt(1.0 - rho**2)
    samples = lfilter([1.0], [1.0, -rho], w)
    return ComplexFieldSeries(grid, samples, carrier)


def pulse_modes(
    env: SpectralEnvelope,
    n_modes: int,
    pulse_bandwidth: float,
    seed: Seed = 0,
    jitter: float = 0.0,
    half_span: float = 4.0,
    carrier: float = 0.0,
) -> SpectralModes:
    """Mode set whose synthesized intensity is a short pulse at ``t = 0``.

    Amplitudes follow ``exp(-dw^2 / (4 b^2))`` with ``b = pulse_bandwidth``,
    giving an intensity of RMS duration ``1 / (2 b)`` when all phases are
    zero. ``jitter`` in ``[0, 1]`` scales uniform random phases drawn from
    ``seed``; ``jitter=1`` is a fully chaotic phase set.

    Energy over one repetition period of the mode sum is normalized to 1.
    """
    if not np.isfinite(pulse_bandwidth) or pulse_bandwidth <= 0:
        raise ValueError(f"pulse_bandwidth must be positive, got {pulse_bandwidth!r}")
    if not 0.0 <= jitter <= 1.0:
        raise ValueError(f"jitter must lie in [0, 1], got {jitter!r}")
    offsets = env.offsets(n_modes, half_span)
    amps = np.exp(-(offsets**2) / (4.0 * pulse_bandwidth**2))
    if offsets.size > 1:
        spacing = offsets[1] - offsets[0]
        amps *= np.sqrt(spacing / (2 * np.pi) / np.sum(amps**2))
    else:
        amps[:] = 1.0
    phases = jitter * make_rng(seed).uniform(0.0, 2 * np.pi, size=offsets.size)
    return SpectralModes(offsets, amps, phases, carrier)


def rms_width(t, weights) -> float:
    """RMS spread of ``t`` weighted by ``weights`` about their centroid."""
    t = np.asarray(t, dtype=float)
    w = np.asarray(weights, dtype=float)
    total = w.sum()
    if total <= 0:
        return float("nan")
    mu = np.sum(t * w) / total
    return float(np.sqrt(np.sum((t - mu) ** 2 * w) / total))
