import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy import integrate, stats

from dispcancel.errors import NumericalGuardError
from dispcancel.mode_field import (
    ComplexFieldSeries,
    RealSeries,
    SpectralEnvelope,
    SpectralModes,
    TimeGrid,
    chaotic_ensemble,
    conjugate_partner_modes,
    intensity,
    markov_chaotic_field,
    pulse_modes,
    rms_width,
    sample_chaotic_modes,
    synthesize_ensemble,
    synthesize_field,
)

ENV = SpectralEnvelope()
GRID = TimeGrid.centered(40.0, 0.05)


def _batch_stderr(x, n_batches=100):
    b = np.array_split(np.asarray(x), n_batches)
    means = np.array([v.mean() for v in b])
    return means.std(ddof=1) / np.sqrt(n_batches)


# -- types --


def test_envelope_rejects_bad_parameters():
    with pytest.raises(ValueError):
        SpectralEnvelope(rms_width=0.0)
    with pytest.raises(ValueError):
        SpectralEnvelope(mean_intensity=np.nan)
    with pytest.raises(ValueError):
        SpectralEnvelope(shape="lorentzian")


def test_modes_validation():
    with pytest.raises(ValueError):
        SpectralModes([0.0, 1.0], [1.0], [0.0, 0.0])
    with pytest.raises(ValueError):
        SpectralModes([1.0, 0.0], [1.0, 1.0], [0.0, 0.0])
    with pytest.raises(ValueError):
        SpectralModes([0.0], [-1.0], [0.0])
    with pytest.raises(ValueError):
        SpectralModes([0.0], [1.0], [np.inf])


def test_time_grid_validation_and_uniformity():
    with pytest.raises(ValueError):
        TimeGrid(0.0, 0.0, 10)
    with pytest.raises(ValueError):
        TimeGrid(0.0, 0.1, 1)
    with pytest.raises(ValueError):
        TimeGrid.from_times([0.0, 0.1, 0.3])
    g = TimeGrid.from_times(np.arange(5) * 0.25)
    assert g.step == 0.25 and g.count == 5


def test_centered_grid_has_zero_sample():
    assert np.any(GRID.times == 0.0)
    assert GRID.count == 800


def test_series_validation():
    with pytest.raises(ValueError):
        RealSeries(GRID, -np.ones(GRID.count))
    with pytest.raises(ValueError):
        ComplexFieldSeries(GRID, np.ones(3))


# -- sample_chaotic_modes --


def test_mode_grid_is_symmetric_and_spans_half_span():
    m = sample_chaotic_modes(ENV, 256, 4.0, seed=3)
    assert m.offsets[0] == -4.0 and m.offsets[-1] == 4.0
    np.testing.assert_allclose(m.offsets, -m.offsets[::-1], atol=1e-15)
    np.testing.assert_allclose(np.diff(m.offsets), 8.0 / 255)


def test_single_mode_gives_constant_intensity():
    m = sample_chaotic_modes(ENV, 1, seed=5)
    i = intensity(synthesize_field(m, GRID)).values
    np.testing.assert_allclose(i, m.amplitudes[0] ** 2, rtol=1e-14)


def test_rejects_zero_modes():
    with pytest.raises(ValueError):
        sample_chaotic_modes(ENV, 0)


def test_seeded_draws_are_deterministic():
    a = sample_chaotic_modes(ENV, 64, seed=11)
    b = sample_chaotic_modes(ENV, 64, seed=11)
    c = sample_chaotic_modes(ENV, 64, seed=12)
    assert np.array_equal(a.amplitudes, b.amplitudes) and np.array_equal(a.phases, b.phases)
    assert not np.array_equal(a.amplitudes, c.amplitudes)


def test_ensemble_rows_match_individual_substreams():
    _, rows = chaotic_ensemble(ENV, 32, 4.0, 7, [5, 0, 3])
    for row, r in zip(rows, [5, 0, 3]):
        m = sample_chaotic_modes(ENV, 32, 4.0, seed=(7, r))
        assert np.array_equal(row, m.complex_amplitudes)


def test_total_power_matches_envelope_normalization():
    env = SpectralEnvelope(mean_intensity=2.5)
    _, rows = chaotic_ensemble(env, 16, 4.0, 1, range(10_000))
    total = np.sum(np.abs(rows) ** 2, axis=1)
    se = total.std(ddof=1) / np.sqrt(total.size)
    assert abs(total.mean() - 2.5) < 3 * se


def test_rayleigh_fourth_moment_identity():
    # oracle: <c^4>/<c^2>^2 of the Rayleigh density by quadrature
    pdf = lambda c: c * np.exp(-c * c / 2)
    m2 = integrate.quad(lambda c: c**2 * pdf(c), 0, np.inf)[0]
    m4 = integrate.quad(lambda c: c**4 * pdf(c), 0, np.inf)[0]
    assert m4 / m2**2 == pytest.approx(2.0, rel=1e-10)

    _, rows = chaotic_ensemble(ENV, 1, 4.0, 2, range(100_000))
    c2 = np.abs(rows[:, 0]) ** 2
    assert np.mean(c2**2) / np.mean(c2) ** 2 == pytest.approx(2.0, rel=0.02)


def test_field_quadratures_are_gaussian():
    _, rows = chaotic_ensemble(ENV, 128, 4.0, 4, range(200))
    e = synthesize_ensemble(ENV.offsets(128), rows, GRID)
    pooled = np.concatenate([e.real.ravel(), e.imag.ravel()])
    assert pooled.size >= 100_000
    assert stats.kurtosis(pooled, fisher=False) == pytest.approx(3.0, abs=0.1)


def test_mean_intensity_is_stationary():
    _, rows = chaotic_ensemble(ENV, 256, 4.0, 9, range(4000))
    i = np.abs(synthesize_ensemble(ENV.offsets(256), rows, GRID)) ** 2
    for k in range(0, GRID.count, 100):
        col = i[:, k]
        assert abs(col.mean() - 1.0) < 3 * col.std(ddof=1) / np.sqrt(col.size)


# -- conjugate partner and synthesis --


def test_self_conjugate_mode():
    m = SpectralModes([0.0], [1.0], [0.0])
    p = conjugate_partner_modes(m)
    assert p.offsets[0] == 0 and p.amplitudes[0] == 1 and p.phases[0] == 0


def test_partner_of_single_mode():
    p = conjugate_partner_modes(SpectralModes([2.0], [0.5], [0.3]))
    assert (p.offsets[0], p.amplitudes[0], p.phases[0]) == (-2.0, 0.5, -0.3)


def test_partner_reverses_order_and_keeps_carrier():
    m = SpectralModes([-1.0, 0.5, 2.0], [1.0, 2.0, 3.0], [0.1, 0.2, 0.3], carrier=7.0)
    p = conjugate_partner_modes(m)
    np.testing.assert_array_equal(p.offsets, [-2.0, -0.5, 1.0])
    np.testing.assert_array_equal(p.amplitudes, [3.0, 2.0, 1.0])
    np.testing.assert_array_equal(p.phases, [-0.3, -0.2, -0.1])
    assert p.carrier == 7.0


@settings(max_examples=25, deadline=None)
@given(seed=st.integers(0, 2**31), n=st.integers(1, 300))
def test_partner_field_is_pointwise_conjugate(seed, n):
    m = sample_chaotic_modes(ENV, n, seed=seed)
    e1 = synthesize_field(m, GRID).samples
    e2 = synthesize_field(conjugate_partner_modes(m), GRID).samples
    scale = np.max(np.abs(e1))
    assert np.max(np.abs(e2 - np.conj(e1))) <= 1e-12 * scale
    i1, i2 = np.abs(e1) ** 2, np.abs(e2) ** 2
    assert np.max(np.abs(i1 - i2)) <= 1e-12 * scale**2


def test_single_zero_mode_is_constant_field():
    e = synthesize_field(SpectralModes([0.0], [1.0], [0.0]), GRID)
    np.testing.assert_array_equal(e.samples, np.ones(GRID.count))


def test_two_mode_beat_note():
    # |exp(-i t) + exp(i t)|^2 = 2 + 2 cos(2t)
    m = SpectralModes([-1.0, 1.0], [1.0, 1.0], [0.0, 0.0])
    i = intensity(synthesize_field(m, GRID)).values
    np.testing.assert_allclose(i, 2 + 2 * np.cos(2 * GRID.times), atol=1e-12)


def test_nyquist_violation_is_rejected():
    m = SpectralModes([-80.0, 80.0], [1.0, 1.0], [0.0, 0.0])
    with pytest.raises(NumericalGuardError):
        synthesize_field(m, GRID)


def test_intensity_examples():
    assert np.all(intensity(ComplexFieldSeries(GRID, np.ones(GRID.count))).values == 1.0)
    assert np.all(intensity(ComplexFieldSeries(GRID, np.full(GRID.count, 1 + 1j))).values == 2.0)


def test_intensity_of_conjugate_is_bit_identical():
    rng = np.random.default_rng(0)
    z = rng.normal(size=GRID.count) + 1j * rng.normal(size=GRID.count)
    f = ComplexFieldSeries(GRID, z)
    assert np.array_equal(intensity(f).values, intensity(f.conjugate()).values)


# -- Markov backend --


MARKOV_GRID = TimeGrid(0.0, 0.05, 1_000_000)


@pytest.fixture(scope="module")
def markov_path():
    return markov_chaotic_field(MARKOV_GRID, coherence_time=1.0, mean_intensity=1.5, seed=21)


def test_markov_mean_intensity(markov_path):
    i = np.abs(markov_path.samples) ** 2
    assert abs(i.mean() - 1.5) < 3 * _batch_stderr(i)
    assert abs(markov_path.samples.mean()) < 0.05


def test_markov_field_autocorrelation_at_coherence_time(markov_path):
    e = markov_path.samples
    lag = 20  # one coherence time
    g1 = np.mean(np.conj(e[:-lag]) * e[lag:]) / np.mean(np.abs(e) ** 2)
    assert g1.real == pytest.approx(np.exp(-1), rel=0.05)
    assert abs(g1.imag) < 0.02


def test_markov_hbt_ratio(markov_path):
    i = np.abs(markov_path.samples) ** 2
    g0 = np.mean(i * i)
    far = [np.mean(i[:-k] * i[k:]) for k in range(220, 400, 20)]
    assert g0 / np.mean(far) == pytest.approx(2.0, rel=0.05)


def test_markov_is_deterministic_and_guards_step():
    g = TimeGrid(0.0, 0.05, 1000)
    a = markov_chaotic_field(g, 1.0, seed=3)
    b = markov_chaotic_field(g, 1.0, seed=3)
    assert np.array_equal(a.samples, b.samples)
    with pytest.raises(NumericalGuardError):
        markov_chaotic_field(g, coherence_time=0.2)


# -- pulses --


def test_unjittered_pulse_duration():
    b = 0.5
    m = pulse_modes(ENV, 512, b, half_span=4.0)
    g = TimeGrid.centered(80.0, 0.05)
    i = intensity(synthesize_field(m, g)).values
    assert np.argmax(i) == np.flatnonzero(g.times == 0.0)[0]
    assert rms_width(g.times, i) == pytest.approx(1 / (2 * b), rel=0.05)


def test_pulse_partner_intensity_is_identical():
    m = pulse_modes(ENV, 256, 0.5, seed=4, jitter=0.3)
    g = TimeGrid.centered(80.0, 0.05)
    i1 = intensity(synthesize_field(m, g)).values
    i2 = intensity(synthesize_field(conjugate_partner_modes(m), g)).values
    np.testing.assert_allclose(i1, i2, rtol=0, atol=1e-12 * i1.max())


def test_single_mode_pulse_is_flat():
    m = pulse_modes(ENV, 1, 0.5)
    i = intensity(synthesize_field(m, GRID)).values
    np.testing.assert_allclose(i, i[0], rtol=1e-14)


def test_pulse_jitter_bounds():
    with pytest.raises(ValueError):
        pulse_modes(ENV, 8, 0.5, jitter=1.5)
    with pytest.raises(ValueError):
        pulse_modes(ENV, 8, 0.0)
