import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from rootcma.array_model import (
    QPSK,
    ArrayGeometry,
    Scenario,
    SourceConfig,
    angular_frequency,
    generate_cm_signals,
    spatial_frequency,
    steering_matrix,
    steering_vector,
    synthesize,
)
from rootcma.errors import DomainError, InvalidScenarioError

from conftest import SPACED_ANGLES, three_source_scenario


def test_broadside_steering_vector_is_all_ones():
    np.testing.assert_array_equal(steering_vector(8, 0.0), np.ones(8))


def test_spatial_frequency_endfire_half_wavelength():
    geo = ArrayGeometry(4, 0.5)
    assert spatial_frequency(geo, 30.0) == pytest.approx(0.25)
    assert angular_frequency(geo, 30.0) == pytest.approx(np.pi / 2)


@pytest.mark.parametrize("angle", [90.0, -90.0, 95.0])
def test_angle_outside_visible_region_rejected(angle):
    with pytest.raises(DomainError):
        spatial_frequency(ArrayGeometry(4), angle)


@given(st.integers(1, 16), st.floats(-10, 10), st.integers(-3, 3))
def test_steering_vector_is_2pi_periodic_and_unimodular(M, mu, k):
    a = steering_vector(M, mu)
    np.testing.assert_allclose(np.abs(a), 1.0, atol=1e-14)
    np.testing.assert_allclose(steering_vector(M, mu + 2 * np.pi * k), a, atol=1e-12)


@given(st.integers(2, 12), st.floats(-1.2, 1.2), st.floats(-1.2, 1.2))
def test_steering_vector_is_vandermonde(M, mu1, mu2):
    a, b = steering_vector(M, mu1), steering_vector(M, mu2)
    np.testing.assert_allclose(a * b, steering_vector(M, mu1 + mu2), atol=1e-12)


def test_steering_matrix_columns_and_duplicates(geo8):
    A = steering_matrix(geo8, SPACED_ANGLES)
    assert A.shape == (8, 3)
    for d, ang in enumerate(SPACED_ANGLES):
        np.testing.assert_allclose(A[:, d], steering_vector(geo8, angular_frequency(geo8, ang)))
    with pytest.raises(InvalidScenarioError):
        steering_matrix(geo8, [10.0, 10.0])


def test_cm_signals_are_qpsk_and_reproducible():
    S1 = generate_cm_signals(3, 500, seed=7).entries
    S2 = generate_cm_signals(3, 500, seed=7).entries
    np.testing.assert_array_equal(S1, S2)
    np.testing.assert_allclose(np.abs(S1), 1.0, atol=1e-15)
    dist = np.min(np.abs(S1[..., None] - QPSK), axis=-1)
    assert dist.max() < 1e-15


@pytest.mark.parametrize(
    "kwargs",
    [
        dict(sources=()),
        dict(sources=tuple(SourceConfig(a) for a in range(-40, 40, 10))),  # D = 8 = M
        dict(num_snapshots=79),
        dict(snr_db=float("nan")),
        dict(sources=(SourceConfig(5.0), SourceConfig(5.0))),
    ],
)
def test_invalid_scenarios_rejected(kwargs):
    base = dict(geometry=ArrayGeometry(8), sources=(SourceConfig(0.0),), snr_db=np.inf, num_snapshots=8000)
    base.update(kwargs)
    with pytest.raises(InvalidScenarioError):
        Scenario(**base)


def test_noise_free_synthesis_is_exact_model():
    sc = three_source_scenario(amplitudes=(1.0, 0.7, 0.5), num_snapshots=200)
    X = synthesize(sc)
    A = steering_matrix(sc.geometry, sc.angles_deg)
    S = X.signals.entries
    expected = A @ np.diag(sc.amplitudes) @ S.conj().T
    np.testing.assert_allclose(X.entries, expected, atol=1e-14)


def test_noise_power_follows_strongest_source():
    sc = three_source_scenario(snr_db=10.0, amplitudes=(2.0, 1.0, 0.5), num_snapshots=20000)
    X = synthesize(sc)
    A = steering_matrix(sc.geometry, sc.angles_deg)
    N = X.entries - A @ np.diag(sc.amplitudes) @ X.signals.entries.conj().T
    expected = 4.0 / 10.0
    assert sc.noise_variance == pytest.approx(expected)
    assert np.mean(np.abs(N) ** 2) == pytest.approx(expected, rel=0.03)
    assert np.mean(N.real ** 2) == pytest.approx(expected / 2, rel=0.03)


def test_trials_are_independent_and_reproducible():
    sc = three_source_scenario(snr_db=20.0, num_snapshots=100)
    np.testing.assert_array_equal(synthesize(sc, 3).entries, synthesize(sc, 3).entries)
    assert not np.allclose(synthesize(sc, 3).entries, synthesize(sc, 4).entries)
