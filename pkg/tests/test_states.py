import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from phaseconj.errors import InvalidModeError, InvalidParameter, InvalidState
from phaseconj.states import (
    GaussianState,
    coherent_state,
    is_physical,
    partial_trace,
    squeezed_state,
    symplectic_eigenvalues,
    symplectic_form,
    tensor,
    thermal_state,
    two_mode_squeezed_state,
    vacuum_state,
)
from phaseconj.transforms import to_quadrature_map, two_mode_squeezer

from gen import random_physical_state

finite = st.floats(-50, 50, allow_nan=False)


@pytest.mark.parametrize("n", [1, 2, 3, 5])
def test_symplectic_form_identities(n):
    om = symplectic_form(n)
    assert np.array_equal(om.T, -om)
    assert np.array_equal(om @ om, -np.eye(2 * n))


def test_symplectic_form_rejects_zero_modes():
    with pytest.raises(InvalidParameter):
        symplectic_form(0)


def test_vacuum():
    s = vacuum_state(2)
    assert np.array_equal(s.mean, np.zeros(4))
    assert np.array_equal(s.cov, 0.5 * np.eye(4))
    assert is_physical(s)
    with pytest.raises(InvalidParameter):
        vacuum_state(0)


@given(finite, finite)
def test_coherent_state(x, p):
    s = coherent_state(x, p)
    assert np.array_equal(s.mean, [x, p])
    assert np.array_equal(s.cov, 0.5 * np.eye(2))
    assert is_physical(s)


def test_state_is_immutable():
    s = coherent_state(1.0, 2.0)
    with pytest.raises(ValueError):
        s.mean[0] = 3.0
    with pytest.raises(ValueError):
        s.cov[0, 0] = 3.0


@pytest.mark.parametrize(
    "mean, cov",
    [
        (np.zeros(3), np.eye(3)),
        (np.zeros(2), np.eye(4)),
        (np.zeros(2), np.array([[1.0, 0.2], [0.0, 1.0]])),
        (np.zeros(2), np.array([[np.nan, 0.0], [0.0, 1.0]])),
        (np.zeros(0), np.zeros((0, 0))),
    ],
)
def test_invalid_states_rejected(mean, cov):
    with pytest.raises(InvalidState):
        GaussianState(mean, cov)


def test_sub_vacuum_cov_not_physical():
    res = is_physical(GaussianState(np.zeros(2), 0.25 * np.eye(2)))
    assert not res
    # symplectic eigenvalue of (1/4) I is 1/4
    assert res.min_symplectic_eigenvalue == pytest.approx(0.25, abs=1e-12)
    assert "vacuum" in res.message


def test_conjugator_output_cov_physical():
    assert is_physical(GaussianState(np.zeros(2), 1.5 * np.eye(2)))


@given(st.floats(0, 3), st.floats(0, 3))
def test_thermal_and_squeezed_physical(nbar, r):
    assert is_physical(thermal_state(nbar))
    assert is_physical(squeezed_state(r, 1.0, -1.0))


def test_thermal_rejects_negative():
    with pytest.raises(InvalidParameter):
        thermal_state(-0.1)


@given(
    st.floats(0.1, 5),
    st.floats(0.1, 5),
    st.floats(-0.9, 0.9),
)
def test_single_mode_symplectic_eigenvalue_matches_sqrt_det(a, b, rho):
    # one-mode oracle: nu = sqrt(det V)
    c = rho * np.sqrt(a * b)
    V = np.array([[a, c], [c, b]])
    nu = symplectic_eigenvalues(V)
    assert nu.shape == (1,)
    assert nu[0] == pytest.approx(np.sqrt(a * b - c * c), rel=1e-12)


def test_multimode_symplectic_spectrum(rng):
    # a symplectic congruence of diag(nu_k) has spectrum nu_k
    from gen import random_canonical

    nus = np.array([0.5, 0.9, 2.3])
    S = to_quadrature_map(random_canonical(rng, 3))
    V = S @ np.diag(np.repeat(nus, 2)) @ S.T
    assert np.allclose(symplectic_eigenvalues(V), nus, rtol=1e-9)


def test_tensor_then_partial_trace_recovers_factors(rng):
    for _ in range(50):
        a = random_physical_state(rng, 1)
        b = random_physical_state(rng, 2)
        joint = tensor(a, b)
        assert partial_trace(joint, [0]).allclose(a, atol=1e-12)
        assert partial_trace(joint, [1, 2]).allclose(b, atol=1e-12)
        assert np.array_equal(partial_trace(joint, [0]).cov, a.cov)


def test_partial_trace_orders_modes():
    s = tensor(coherent_state(1, 2), coherent_state(3, 4), coherent_state(5, 6))
    assert np.array_equal(partial_trace(s, [2, 0]).mean, [5, 6, 1, 2])


@pytest.mark.parametrize("keep", [[], [3], [0, 0], [-1]])
def test_partial_trace_bad_modes(keep):
    with pytest.raises(InvalidModeError):
        partial_trace(vacuum_state(2), keep)


def _epr_variances_from_cov(r):
    V = two_mode_squeezed_state(r).cov
    wx = np.array([1.0, 0, -1.0, 0])
    wp = np.array([0, 1.0, 0, 1.0])
    return wx @ V @ wx, wp @ V @ wp


@pytest.mark.parametrize("r", np.arange(0.0, 10.01, 0.5))
def test_two_mode_squeezed_epr_variances(r):
    vx, vp = _epr_variances_from_cov(r)
    # the difference of O(e^{2r}) entries carries an O(eps e^{2r}) rounding error
    scale = np.cosh(2 * r)
    assert abs(vx - np.exp(-2 * r)) <= 1e-12 * max(1.0, 4 * scale)
    assert abs(vp - np.exp(-2 * r)) <= 1e-12 * max(1.0, 4 * scale)


@pytest.mark.parametrize("r", np.arange(0.0, 10.01, 0.5))
def test_two_mode_squeezed_epr_variances_generating_circuit(r):
    # pull the observable back through the squeezer onto vacuum: absolute 1e-12
    S = to_quadrature_map(two_mode_squeezer(r))
    for w in ([1.0, 0, -1.0, 0], [0, 1.0, 0, 1.0]):
        u = S.T @ np.array(w)
        assert abs(0.5 * u @ u - np.exp(-2 * r)) <= 1e-12


def test_two_mode_squeezed_matches_circuit_on_vacuum():
    from phaseconj.transforms import apply

    for r in (0.0, 0.3, 1.0, 2.5):
        got = apply(two_mode_squeezer(r), vacuum_state(2))
        assert got.allclose(two_mode_squeezed_state(r), atol=1e-12 * np.cosh(2 * r))


def test_two_mode_squeezed_physical_and_pure():
    for r in (0.0, 1.0, 5.0):
        s = two_mode_squeezed_state(r)
        nu = symplectic_eigenvalues(s.cov)
        assert np.allclose(nu, 0.5, rtol=1e-9)


def test_two_mode_squeezed_rejects_bad_r():
    for r in (-0.1, np.inf, np.nan):
        with pytest.raises(InvalidParameter):
            two_mode_squeezed_state(r)


def test_random_states_physical(rng):
    for n in (1, 2, 3):
        for _ in range(20):
            assert is_physical(random_physical_state(rng, n))
