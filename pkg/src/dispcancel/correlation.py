"""Intensity correlation estimators, dispersion sweeps and surface fits.

The estimator of ``g2(tau) = <I1(t) I2(t + tau)> / (<I1> <I2>)`` averages
over time within each realization and then over realizations. Each
realization is treated as one batch, so its internal autocorrelation is
absorbed in the realization-to-realization scatter; standard errors of the
ratio come from the delta method on the per-realization moments.
"""

from __future__ import annotations

from dataclasses import dataclass, field
import warnings

import numpy as np
from scipy.fft import irfft, next_fast_len, rfft

from .dispersion import IDENTITY, DispersiveMedium
from .mode_field import (
    ComplexFieldSeries,
    RealSeries,
    SpectralEnvelope,
    TimeGrid,
    chaotic_ensemble,
    intensity_values,
    propagator,
    rms_width,
)

# lags with |tau| beyond this many coherence times define the background
BACKGROUND_LAGS = 10.0


@dataclass(frozen=True)
class CorrelationEstimate:
    """Normalized intensity correlation curve with error bars and peak metrics."""

    lags: np.ndarray
    g2: np.ndarray
    stderr: np.ndarray
    n_realizations: int
    background: float
    peak_height: float
    peak_fwhm: float
    mean_intensity1: float = float("nan")
    mean_intensity2: float = float("nan")

    def __post_init__(self):
        lags = np.asarray(self.lags, dtype=float)
        if lags.size > 1 and np.any(np.diff(lags) <= 0):
            raise ValueError("lags must be strictly increasing")
        if np.any(np.asarray(self.stderr) < 0):
            raise ValueError("stderr must be non-negative")

    @property
    def raw(self) -> np.ndarray:
        """Unnormalized ``<I1(t) I2(t + tau)>``."""
        return self.g2 * self.mean_intensity1 * self.mean_intensity2

    @property
    def peak_to_background(self) -> float:
        return self.peak_height / self.background

    def rms_width(self) -> float:
        """RMS width of ``g2 - background`` about its centroid.

        Only the central lobe counts: the excess is cut where it first
        drops to zero on either side of the peak, so background noise at
        large lags does not dominate the second moment.
        """
        excess = self.g2 - self.background
        zero = np.flatnonzero(np.abs(self.lags) < 1e-12)
        k = int(zero[0]) if zero.size else int(np.argmax(excess))
        lo, hi = k, k
        while lo > 0 and excess[lo - 1] > 0:
            lo -= 1
        while hi < excess.size - 1 and excess[hi + 1] > 0:
            hi += 1
        return rms_width(self.lags[lo : hi + 1], excess[lo : hi + 1])


def lag_grid(lag_max: float, step: float) -> np.ndarray:
    """Symmetric lags ``k * step`` for ``|k * step| <= lag_max``."""
    n = int(np.floor(lag_max / step + 1e-9))
    return step * np.arange(-n, n + 1)


def lag_indices(grid: TimeGrid, lags) -> np.ndarray:
    lags = np.asarray(lags, dtype=float)
    if lags.ndim != 1 or lags.size == 0:
        raise ValueError("lags must be a non-empty 1-d sequence")
    if lags.size > 1 and np.any(np.diff(lags) <= 0):
        raise ValueError("lags must be strictly increasing")
    k = lags / grid.step
    j = np.rint(k)
    if np.any(np.abs(k - j) > 1e-6):
        raise ValueError("lags are not multiples of the grid step")
    if np.any(np.abs(j) >= grid.count):
        raise ValueError(f"lags beyond the {grid.duration} time window")
    return j.astype(int)


def lagged_means(i1: np.ndarray, i2: np.ndarray, idx: np.ndarray) -> np.ndarray:
    """Per-row time average of ``i1[k] * i2[k + j]`` over the overlap, for each ``j``."""
    i1 = np.atleast_2d(i1)
    i2 = np.atleast_2d(i2)
    K = i1.shape[-1]
    nfft = next_fast_len(2 * K - 1, real=True)
    c = irfft(np.conj(rfft(i1, nfft)) * rfft(i2, nfft), nfft)
    return c[:, idx % nfft] / (K - np.abs(idx))


def ratio_influence(num, a, b):
    """Ratio estimate ``mean(num) / (mean(a) mean(b))`` and its influence terms.

    Returns ``(g, psi)`` with ``psi`` of shape ``num.shape``; the standard
    error is ``std(psi) / sqrt(R)``, and differences of ``psi`` between
    estimates on common realizations give paired standard errors.
    """
    ma, mb = a.mean(), b.mean()
    mn = num.mean(axis=0)
    g = mn / (ma * mb)
    psi = (num - mn) / (ma * mb) - g * ((a - ma) / ma + (b - mb) / mb)[:, None]
    return g, psi


def _stderr(psi):
    return psi.std(axis=0, ddof=1) / np.sqrt(psi.shape[0])


def half_max_width(lags, y, peak: int) -> float:
    """Full width at half of ``y[peak]``, linearly interpolated."""
    y = np.asarray(y, dtype=float)
    half = y[peak] / 2.0
    if not half > 0:
        return float("nan")

    def crossing(order):
        for k in order:
            if y[k] <= half:
                prev = k - 1 if order.step > 0 else k + 1
                frac = (y[prev] - half) / (y[prev] - y[k])
                return lags[prev] + frac * (lags[k] - lags[prev])
        return None

    right = crossing(range(peak + 1, len(y), 1))
    left = crossing(range(peak - 1, -1, -1))
    if right is None or left is None:
        return float("nan")
    return float(right - left)


def _background(lags, g2, threshold):
    far = np.abs(lags) > threshold
    if not far.any():
        warnings.warn(
            f"no lags beyond {threshold:g}; background taken from the outermost lags",
            stacklevel=3,
        )
        far = np.abs(lags) >= 0.9 * np.abs(lags).max()
    return float(g2[far].mean())


def estimate_from_moments(lags, num, a, b, coherence_time: float = 1.0) -> CorrelationEstimate:
    """Assemble a ``CorrelationEstimate`` from per-realization moments."""
    lags = np.asarray(lags, dtype=float)
    if num.shape[0] < 2:
        raise ValueError("need at least two realizations")
    g, psi = ratio_influence(num, a, b)
    background = _background(lags, g, BACKGROUND_LAGS * coherence_time)
    zero = np.flatnonzero(np.abs(lags) < 1e-12)
    if zero.size:
        peak = float(g[zero[0]])
        fwhm = half_max_width(lags, g - background, zero[0])
    else:
        peak = fwhm = float("nan")
    return CorrelationEstimate(
        lags=lags,
        g2=g,
        stderr=_stderr(psi),
        n_realizations=num.shape[0],
        background=background,
        peak_height=peak,
        peak_fwhm=fwhm,
        mean_intensity1=float(a.mean()),
        mean_intensity2=float(b.mean()),
    )


@dataclass
class CorrelationAccumulator:
    """Per-realization moments gathered block by block.

    ``merge`` concatenates blocks, so partial accumulators from different
    workers combine in any order; only the final reductions see the order.
    """

    grid: TimeGrid
    lags: np.ndarray
    num: list = field(default_factory=list)
    a: list = field(default_factory=list)
    b: list = field(default_factory=list)

    def __post_init__(self):
        self.lags = np.asarray(self.lags, dtype=float)
        self._idx = lag_indices(self.grid, self.lags)

    def add(self, i1, i2):
        i1 = np.atleast_2d(i1)
        i2 = np.atleast_2d(i2)
        if i1.shape != i2.shape or i1.shape[-1] != self.grid.count:
            raise ValueError(f"intensity blocks {i1.shape} and {i2.shape} do not match the grid")
        self.num.append(lagged_means(i1, i2, self._idx))
        self.a.append(i1.mean(axis=1))
        self.b.append(i2.mean(axis=1))

    def merge(self, other: "CorrelationAccumulator") -> "CorrelationAccumulator":
        if other.grid != self.grid or not np.array_equal(other.lags, self.lags):
            raise ValueError("cannot merge accumulators on different grids or lags")
        return CorrelationAccumulator(
            self.grid, self.lags, self.num + other.num, self.a + other.a, self.b + other.b
        )

    def moments(self):
        return np.concatenate(self.num), np.concatenate(self.a), np.concatenate(self.b)

    def estimate(self, coherence_time: float = 1.0) -> CorrelationEstimate:
        return estimate_from_moments(self.lags, *self.moments(), coherence_time=coherence_time)


def _stack(ensemble) -> tuple[TimeGrid, np.ndarray]:
    ensemble = list(ensemble)
    if not ensemble:
        raise ValueError("empty ensemble")
    grid = ensemble[0].grid
    for s in ensemble:
        if s.grid != grid:
            raise ValueError("ensemble members are on different time grids")
    return grid, np.stack([s.values for s in ensemble])


def cross_correlation(ensemble1, ensemble2, lags, coherence_time: float = 1.0) -> CorrelationEstimate:
    """Estimate ``<I1(t) I2(t + tau)> / (<I1> <I2>)`` from paired realizations.

    Parameters
    ----------
    ensemble1, ensemble2 : sequence of RealSeries
        Realization ``r`` of beam 1 pairs with realization ``r`` of beam 2.
    lags : array_like
        Strictly increasing lags, each a multiple of the grid step.
    coherence_time : float
        Sets the background region ``|tau| > 10 * coherence_time``.
    """
    g1, i1 = _stack(ensemble1)
    g2, i2 = _stack(ensemble2)
    if g1 != g2:
        raise ValueError("beams are sampled on different time grids")
    if i1.shape[0] != i2.shape[0]:
        raise ValueError(f"ensemble sizes differ ({i1.shape[0]} vs {i2.shape[0]})")
    if i1.shape[0] < 2:
        raise ValueError("need at least two realizations")
    acc = CorrelationAccumulator(g1, lags)
    acc.add(i1, i2)
    return acc.estimate(coherence_time)


def auto_correlation(ensemble, lags, coherence_time: float = 1.0) -> CorrelationEstimate:
    return cross_correlation(ensemble, ensemble, lags, coherence_time)


def per_realization_intensity_gap(f1: ComplexFieldSeries, f2: ComplexFieldSeries) -> float:
    """Largest pointwise intensity difference relative to the mean intensity of beam 1."""
    if f1.grid != f2.grid:
        raise ValueError("fields are sampled on different time grids")
    i1 = intensity_values(f1.samples)
    i2 = intensity_values(f2.samples)
    return float(np.max(np.abs(i1 - i2)) / max(i1.mean(), np.finfo(float).tiny))


# -- ensemble simulation ---------------------------------------------------


PARTNERS = ("conjugate", "identical")


class _FieldCache:
    """Dispersed fields of one block of realizations, keyed by medium."""

    def __init__(self, offsets, coeffs, prop, partner):
        if partner not in PARTNERS:
            raise ValueError(f"partner must be one of {PARTNERS}, got {partner!r}")
        self.offsets, self.coeffs, self.prop, self.partner = offsets, coeffs, prop, partner
        self._cache = {}

    def _dispersed(self, phase):
        key = phase.tobytes()
        if key not in self._cache:
            self._cache[key] = (self.coeffs * np.exp(1j * phase)) @ self.prop
        return self._cache[key]

    def beam1(self, med: DispersiveMedium):
        return self._dispersed(med.spectral_phase(self.offsets))

    def beam2(self, med: DispersiveMedium):
        if self.partner == "identical":
            return self._dispersed(med.spectral_phase(self.offsets))
        # partner modes sit at -dw with conjugate amplitudes; the dispersed
        # partner is the conjugate of beam 1 dispersed by the negated phase
        return np.conj(self._dispersed(-med.spectral_phase(-self.offsets)))


def _blocks(n, chunk):
    for start in range(0, n, chunk):
        yield range(start, min(n, start + chunk))


def simulate_correlations(
    media_pairs,
    *,
    grid: TimeGrid,
    lags,
    n_realizations: int,
    seed: int = 0,
    env: SpectralEnvelope = SpectralEnvelope(),
    n_modes: int = 256,
    half_span: float = 4.0,
    partner: str = "conjugate",
    coherence_time: float | None = None,
    chunk: int = 500,
) -> list[CorrelationEstimate]:
    """Cross-correlation curves for several media pairs on common realizations.

    Realization ``r`` draws its modes from substream ``(seed, r)``, and the
    same mode sets feed every pair. ``partner`` selects the beam-2 model:
    the conjugate ("phase-sensitive") partner, or an identical copy.
    """
    if n_realizations < 2:
        raise ValueError("need at least two realizations")
    if coherence_time is None:
        coherence_time = 1.0 / env.rms_width
    pairs = list(media_pairs)
    offsets = env.offsets(n_modes, half_span)
    prop = propagator(offsets, grid)
    accs = [CorrelationAccumulator(grid, lags) for _ in pairs]
    for block in _blocks(n_realizations, chunk):
        _, coeffs = chaotic_ensemble(env, n_modes, half_span, seed, block)
        fields = _FieldCache(offsets, coeffs, prop, partner)
        for acc, (m1, m2) in zip(accs, pairs):
            acc.add(intensity_values(fields.beam1(m1)), intensity_values(fields.beam2(m2)))
    return [acc.estimate(coherence_time) for acc in accs]


@dataclass(frozen=True)
class SweepTable:
    """Zero-lag correlation deficit over a grid of dispersion pairs.

    ``deficit`` is ``g2(0)`` without media minus ``g2(0)`` with media and
    ``stderr`` its paired standard error; ``raw_deficit`` is the same
    difference for the unnormalized ``<I1 I2>``. ``covariance`` holds the
    Monte Carlo covariance between grid points, which share realizations.
    """

    beta1: np.ndarray
    beta2: np.ndarray
    deficit: np.ndarray
    stderr: np.ndarray
    raw_deficit: np.ndarray
    n_realizations: int
    covariance: np.ndarray | None = None

    def rows(self):
        return list(zip(self.beta1, self.beta2, self.deficit, self.stderr, self.raw_deficit))

    def fit(self) -> "QuadraticFit":
        return fit_quadratic_surface(self)


def dispersion_sweep(
    beta_grid,
    *,
    grid: TimeGrid,
    n_realizations: int,
    seed: int = 0,
    env: SpectralEnvelope = SpectralEnvelope(),
    n_modes: int = 256,
    half_span: float = 4.0,
    length: float = 1.0,
    partner: str = "conjugate",
    chunk: int = 500,
) -> SweepTable:
    """Zero-lag deficit for each ``(beta1, beta2)`` with common random numbers.

    Every grid point is evaluated on the same realizations as the
    dispersion-free reference, so the deficits are differences of
    correlated estimates and the Monte Carlo noise largely cancels.
    """
    pts = np.asarray(beta_grid, dtype=float).reshape(-1, 2)
    if pts.shape[0] == 0:
        raise ValueError("beta_grid is empty")
    if n_realizations < 2:
        raise ValueError("need at least two realizations")
    meds1 = [DispersiveMedium(0.0, b, length) for b in pts[:, 0]]
    meds2 = [DispersiveMedium(0.0, b, length) for b in pts[:, 1]]
    offsets = env.offsets(n_modes, half_span)
    prop = propagator(offsets, grid)
    n_pts = pts.shape[0]
    num = np.empty((n_realizations, n_pts + 1))
    a = np.empty((n_realizations, n_pts + 1))
    b = np.empty((n_realizations, n_pts + 1))
    for block in _blocks(n_realizations, chunk):
        _, coeffs = chaotic_ensemble(env, n_modes, half_span, seed, block)
        fields = _FieldCache(offsets, coeffs, prop, partner)
        sl = slice(block.start, block.stop)
        for p, (m1, m2) in enumerate([(IDENTITY, IDENTITY)] + list(zip(meds1, meds2))):
            i1 = intensity_values(fields.beam1(m1))
            i2 = intensity_values(fields.beam2(m2))
            num[sl, p] = np.mean(i1 * i2, axis=1)
            a[sl, p] = i1.mean(axis=1)
            b[sl, p] = i2.mean(axis=1)
    g_ref, psi_ref = ratio_influence(num[:, :1], a[:, 0], b[:, 0])
    deficit = np.empty(n_pts)
    psi_diff = np.empty((n_realizations, n_pts))
    for p in range(n_pts):
        g, psi = ratio_influence(num[:, p + 1 : p + 2], a[:, p + 1], b[:, p + 1])
        deficit[p] = g_ref[0] - g[0]
        psi_diff[:, p] = psi_ref[:, 0] - psi[:, 0]
    raw = num[:, 0].mean() - num[:, 1:].mean(axis=0)
    centred = psi_diff - psi_diff.mean(axis=0)
    cov = centred.T @ centred / ((n_realizations - 1) * n_realizations)
    return SweepTable(
        beta1=pts[:, 0],
        beta2=pts[:, 1],
        deficit=deficit,
        stderr=_stderr(psi_diff),
        raw_deficit=raw,
        n_realizations=n_realizations,
        covariance=cov,
    )


# -- quadratic surface -----------------------------------------------------


@dataclass(frozen=True)
class QuadraticFit:
    """``a + b1 x + b2 y + c1 x^2 + c2 y^2 + d x y`` fitted by least squares."""

    a: float
    b1: float
    b2: float
    c1: float
    c2: float
    d: float
    residual_rms: float
    coef_stderr: dict | None = None

    def __call__(self, beta1, beta2):
        x = np.asarray(beta1, dtype=float)
        y = np.asarray(beta2, dtype=float)
        return self.a + self.b1 * x + self.b2 * y + self.c1 * x**2 + self.c2 * y**2 + self.d * x * y

    def to_dict(self) -> dict:
        out = {k: float(getattr(self, k)) for k in ("a", "b1", "b2", "c1", "c2", "d", "residual_rms")}
        if self.coef_stderr is not None:
            out["stderr"] = dict(self.coef_stderr)
        return out


def _design(x, y):
    return np.column_stack([np.ones_like(x), x, y, x**2, y**2, x * y])


def check_surface_grid(beta1, beta2):
    """Raise ``ValueError`` if the points cannot determine all six coefficients."""
    X = _design(np.asarray(beta1, dtype=float), np.asarray(beta2, dtype=float))
    if X.shape[0] < 6 or np.linalg.matrix_rank(X) < 6:
        raise ValueError(
            f"rank-deficient grid: {X.shape[0]} points span "
            f"{np.linalg.matrix_rank(X)} of 6 quadratic coefficients"
        )


def fit_quadratic_surface(table, beta2=None, values=None) -> QuadraticFit:
    """Least-squares quadratic surface in ``(beta1, beta2)``.

    Accepts a ``SweepTable`` or three arrays ``(beta1, beta2, values)``.
    When the table carries a covariance, coefficient standard errors are
    propagated through the (linear) least-squares map.
    """
    cov = None
    if beta2 is None:
        x, y, z = table.beta1, table.beta2, table.deficit
        cov = table.covariance
    else:
        x, y, z = table, beta2, values
    x, y, z = (np.asarray(v, dtype=float) for v in (x, y, z))
    check_surface_grid(x, y)
    X = _design(x, y)
    coef, *_ = np.linalg.lstsq(X, z, rcond=None)
    resid = z - X @ coef
    coef_se = None
    if cov is not None:
        P = np.linalg.pinv(X)
        se = np.sqrt(np.clip(np.diag(P @ cov @ P.T), 0.0, None))
        coef_se = dict(zip(("a", "b1", "b2", "c1", "c2", "d"), map(float, se)))
    return QuadraticFit(
        *map(float, coef), residual_rms=float(np.sqrt(np.mean(resid**2))), coef_stderr=coef_se
    )
