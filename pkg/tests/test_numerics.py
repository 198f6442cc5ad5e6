import numpy as np
import pytest
from hypothesis import assume, given, settings
from hypothesis import strategies as st

from rootcma.errors import NotPositiveDefiniteError, NumericFailureError
from rootcma.numerics import (
    companion_eigenvalues,
    companion_matrix,
    condition_number,
    expand_roots,
    hpd_solve,
    is_hermitian,
    monic,
    pair_roots,
    polyval,
    root_radius_bound,
    simultaneous_roots,
)


def test_monic_and_polyval():
    p = np.array([2, 0, 4], dtype=complex)  # 2 + 4 z^2
    np.testing.assert_allclose(monic(p), [0.5, 0, 1])
    assert polyval(p, 1j) == pytest.approx(-2)


def test_companion_layout():
    C = companion_matrix(np.array([-6, 11, -6, 1], dtype=complex))
    np.testing.assert_allclose(C[0], [6, -11, 6])
    np.testing.assert_allclose(np.diag(C, -1), 1)
    np.testing.assert_allclose(np.sort(companion_eigenvalues([-6, 11, -6, 1]).real), [1, 2, 3], atol=1e-12)


def test_roots_of_unity_both_methods():
    p = np.zeros(8, dtype=complex)
    p[0], p[7] = -1, 1
    truth = np.exp(2j * np.pi * np.arange(7) / 7)
    for roots in (simultaneous_roots(p), companion_eigenvalues(p)):
        _, dist = pair_roots(truth, roots)
        assert dist < 1e-10


roots_lists = st.lists(
    st.complex_numbers(max_magnitude=3, allow_nan=False, allow_infinity=False), min_size=1, max_size=10
)


def backward_error(found, p):
    return np.linalg.norm(expand_roots(found) - p) / max(1.0, np.linalg.norm(p))


@settings(max_examples=100)
@given(roots_lists)
def test_companion_round_trip_is_backward_stable(roots):
    p = expand_roots(np.array(roots))
    assert p[-1] == 1
    assert backward_error(companion_eigenvalues(p), p) <= 1e-8


@settings(max_examples=100)
@given(roots_lists)
def test_aberth_round_trip_distinct_roots(roots):
    roots = np.array(roots)
    gaps = np.abs(roots[:, None] - roots[None, :]) + np.eye(roots.size)
    assume(gaps.min() > 1e-2)
    p = expand_roots(roots)
    assert backward_error(simultaneous_roots(p), p) <= 1e-8


def test_aberth_double_root_is_recentred():
    p = expand_roots([1, 1, -0.5 + 2j])
    found = simultaneous_roots(p)
    assert backward_error(found, p) < 1e-12
    assert abs(np.sort_complex(found)[1:].mean() - 1) < 1e-12


def test_aberth_tiny_root_next_to_unit_root():
    found = np.sort(np.abs(simultaneous_roots(expand_roots([1, 1e-78]))))
    assert found[0] < 1e-12 and found[1] == pytest.approx(1)


def test_radius_bound_contains_all_roots(rng):
    for _ in range(100):
        n = int(rng.integers(1, 12))
        c = np.append(rng.normal(size=n) + 1j * rng.normal(size=n), 1)
        assert np.all(np.abs(companion_eigenvalues(c)) <= root_radius_bound(c) * (1 + 1e-9))


def test_simultaneous_roots_budget_exhaustion_reports_partial():
    p = expand_roots([1, 1, 1, 2, 2])
    with pytest.raises(NumericFailureError) as info:
        simultaneous_roots(p, tol=0.0, max_sweeps=1)
    assert info.value.partial is not None and len(info.value.partial) == 5


def test_hpd_solve_and_errors(rng):
    B = rng.normal(size=(4, 4)) + 1j * rng.normal(size=(4, 4))
    G = B @ B.conj().T + np.eye(4)
    b = rng.normal(size=4) + 0j
    np.testing.assert_allclose(G @ hpd_solve(G, b), b, atol=1e-12)
    assert is_hermitian(G)
    with pytest.raises(NotPositiveDefiniteError):
        hpd_solve(-G, b)
    with pytest.raises(NotPositiveDefiniteError):
        hpd_solve(G + np.triu(np.ones((4, 4)), 1), b)


def test_condition_number_singular_is_inf():
    assert condition_number(np.ones((2, 2))) == np.inf
    assert condition_number(np.eye(3)) == pytest.approx(1.0)


def test_pair_roots_distance():
    a = np.array([1, 1j, -1])
    b = np.array([-1 + 1e-3, 1, 1j])
    aligned, d = pair_roots(a, b)
    np.testing.assert_allclose(aligned, [1, 1j, -1 + 1e-3])
    assert d == pytest.approx(1e-3)
