import math
import warnings

import numpy as np
import pytest
from hypothesis import assume, given, settings
from hypothesis import strategies as st

from rootcma.array_model import ArrayGeometry, steering_vector
from rootcma.dsft import (
    BeamResponseGrid,
    ModeSet,
    beam_response,
    dirichlet_response,
    dsft_eval,
    impact_factor,
    mu_grid,
    phase_related_angles,
    phase_related_modes,
    sum_mode_response,
    sum_norm_squared,
    wrap_angle,
)
from rootcma.errors import DomainError, InvalidScenarioError


def direct_sum(M, mu, mu0):
    # brute-force DSFT of a steering vector, the oracle for the closed form
    m = np.arange(M)
    return np.exp(-1j * np.multiply.outer(np.atleast_1d(mu) - mu0, m)).sum(axis=-1)


def test_dirichlet_peak_equals_M():
    for M in range(2, 17):
        assert dirichlet_response(M, 0.7, 0.7) == pytest.approx(M, abs=1e-12)


def test_dirichlet_nulls_at_2pi_over_M():
    M = 8
    for k in range(1, M):
        assert abs(dirichlet_response(M, 0.3 + 2 * np.pi * k / M, 0.3)) < 1e-12


@given(st.integers(2, 16), st.floats(-np.pi, np.pi), st.floats(-3e-9, 3e-9))
def test_dirichlet_continuous_across_taylor_switch(M, mu0, dx):
    assume(abs(mu0 + dx) < np.pi)
    assert abs(dirichlet_response(M, mu0 + dx, mu0) - direct_sum(M, mu0 + dx, mu0)[0]) < 1e-9


@given(st.integers(2, 16), st.floats(-20, 20), st.floats(-np.pi, np.pi))
def test_dirichlet_is_2pi_periodic(M, mu, mu0):
    a = dirichlet_response(M, mu, mu0)
    b = dirichlet_response(M, mu + 2 * np.pi, mu0)
    assert abs(a - b) < 1e-9


def test_dsft_of_steering_vector_is_dirichlet():
    grid = mu_grid()
    a = steering_vector(6, 1.1)
    np.testing.assert_allclose(dsft_eval(a, grid), dirichlet_response(6, grid, 1.1), atol=1e-12)


def test_beam_response_is_conjugate_dsft_and_matches_inner_product():
    w = np.array([1, 2j, -1 + 0.5j, 0.3])
    for mu in (-2.0, 0.0, 1.3):
        assert beam_response(w, mu) == pytest.approx(np.vdot(w, steering_vector(4, mu)))


def test_wrap_angle_range():
    x = wrap_angle(np.array([-np.pi, np.pi, 3 * np.pi, -7.0]))
    assert np.all(x >= -np.pi) and np.all(x < np.pi)
    assert x[1] == pytest.approx(-np.pi)


def test_mode_set_validation():
    with pytest.raises(InvalidScenarioError):
        ModeSet(())
    with pytest.raises(InvalidScenarioError):
        ModeSet((0.1, 0.1))
    with pytest.raises(InvalidScenarioError):
        ModeSet((np.pi,))
    with pytest.raises(InvalidScenarioError):
        ModeSet((0.0, 0.5, 1.0)).validate_for(3)


def test_phase_related_modes_wrap_raises():
    # k = 2 with M - 1 = 4 revisits mode 0 after two steps
    with pytest.raises(InvalidScenarioError):
        phase_related_modes(5, 3, k=2)


def test_three_spaced_modes_response_and_norm():
    modes = phase_related_modes(8, 3)
    for mu in modes.mus:
        assert sum_mode_response(modes, 8, mu) == pytest.approx(10.0, abs=1e-12)
    assert sum_norm_squared(modes, 8) == pytest.approx(30.0, abs=1e-12)
    assert np.linalg.norm(modes.steering_sum(8)) ** 2 == pytest.approx(30.0, abs=1e-12)
    for i in range(3):
        assert abs(impact_factor(modes, 8, i)) < 1e-12


def test_sum_norm_squared_matches_direct_norm(rng):
    for _ in range(50):
        M = int(rng.integers(2, 17))
        D = int(rng.integers(1, M))
        mus = tuple(rng.uniform(-np.pi, np.pi, D))
        modes = ModeSet(mus)
        assert sum_norm_squared(modes, M) == pytest.approx(np.linalg.norm(modes.steering_sum(M)) ** 2, abs=1e-9)


def test_impact_factor_nonzero_for_unrelated_modes():
    modes = ModeSet((0.0, 0.4))
    assert abs(impact_factor(modes, 8, 0)) > 1e-3
    with pytest.raises(DomainError):
        impact_factor(modes, 8, 2)


def test_phase_related_angle_examples(geo8):
    assert phase_related_angles(20.0, geo8)[0] == pytest.approx(3.2278, abs=1e-4)
    oracle = math.degrees(math.asin(math.sin(math.radians(3.23)) - 2 / 7))
    assert phase_related_angles(3.23, geo8, k_list=(1,))[0] == pytest.approx(oracle, abs=1e-12)
    assert phase_related_angles(3.23, geo8, k_list=(3,))[0] == pytest.approx(-53.206, abs=1e-3)
    with pytest.warns(RuntimeWarning):
        out = phase_related_angles(3.23, geo8, k_list=(1, 4), branch="minus")
    assert len(out) == 1
    with pytest.raises(DomainError):
        with warnings.catch_warnings():
            warnings.simplefilter("ignore")
            phase_related_angles(80.0, geo8, k_list=(3,), branch="plus")


def test_phase_related_angle_chain_of_spaced_sources(geo8):
    # 20 -> 3.23 (one step) -> -53.2 (three more steps)
    a1 = phase_related_angles(20.0, geo8)[0]
    a4 = phase_related_angles(20.0, geo8, k_list=(4,))[0]
    assert round(a1, 2) == 3.23
    assert round(a4, 1) == -53.2


def test_beam_grid_csv_round_trip(tmp_path):
    grid = mu_grid(16)
    w = steering_vector(4, 0.5)
    g = BeamResponseGrid(grid, beam_response(w, grid), w, 0.5)
    g.to_csv(tmp_path / "b.csv")
    data = np.genfromtxt(tmp_path / "b.csv", delimiter=",", names=True)
    np.testing.assert_array_equal(data["re"] + 1j * data["im"], g.response)
    with pytest.raises(DomainError):
        BeamResponseGrid(grid[::-1], g.response, w)


@settings(max_examples=60)
@given(st.integers(2, 16), st.data())
def test_phase_relation_property(M, data):
    D = data.draw(st.integers(1, M - 1))
    k = data.draw(st.integers(1, 3))
    mu0 = data.draw(st.floats(-np.pi, np.pi, exclude_max=True))
    try:
        modes = phase_related_modes(M, D, k, mu0)
    except InvalidScenarioError:
        assume(False)
    a = modes.steering_sum(M)
    for mu in modes.mus:
        assert abs(sum_mode_response(modes, M, mu) - (M + D - 1)) < 1e-10
        assert abs(np.vdot(steering_vector(M, mu), a) - (M + D - 1)) < 1e-10
