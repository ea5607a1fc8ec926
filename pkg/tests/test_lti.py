import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy import signal

from conftest import random_stable
from softlimb.errors import DomainError, UnstableSystemError
from softlimb.lti import (
    StateSpaceModel,
    UncertaintyWeight,
    append,
    discretize,
    freq_response,
    hinf_norm,
    hinf_norm_grid,
    is_hurwitz,
    parallel,
    realize_weight,
    series,
    similarity_scale,
)


def scipy_response(sys, w):
    """Transfer matrix at jw from scipy's per-input polynomial conversion."""
    H = np.zeros((sys.p, sys.m), dtype=complex)
    for j in range(sys.m):
        num, den = signal.ss2tf(sys.A, sys.B, sys.C, sys.D, input=j)
        for i in range(sys.p):
            H[i, j] = np.polyval(num[i], 1j * w) / np.polyval(den, 1j * w)
    return H


def test_dimension_check():
    with pytest.raises(ValueError):
        StateSpaceModel(np.eye(2), np.ones((3, 1)), np.ones((1, 2)), np.zeros((1, 1)))


def test_static_system_response():
    D = np.array([[1.0, 2.0], [3.0, 4.0]])
    sys = StateSpaceModel.static(D)
    assert sys.n == 0
    np.testing.assert_array_equal(freq_response(sys, 17.0), D)
    assert hinf_norm(sys) == pytest.approx(np.linalg.norm(D, 2))


def test_freq_response_matches_scipy():
    rng = np.random.default_rng(1)
    sys = random_stable(rng, 4, 2, 3)
    for w in (0.0, 0.3, 2.0, 50.0):
        np.testing.assert_allclose(freq_response(sys, w), scipy_response(sys, w), rtol=1e-8, atol=1e-10)


def test_freq_response_on_axis_mode_raises():
    with pytest.raises(DomainError):
        freq_response(StateSpaceModel([[0.0]], [[1.0]], [[1.0]], [[0.0]]), 0.0)


def test_lag_dc_gain():
    lag = StateSpaceModel([[-1.0]], [[1.0]], [[1.0]], [[0.0]])
    assert freq_response(lag, 0.0)[0, 0] == pytest.approx(1.0)


def test_is_hurwitz():
    assert is_hurwitz(np.diag([-1.0, -2.0]), margin=0.0)
    assert not is_hurwitz(np.array([[0.0]]))
    assert is_hurwitz(np.zeros((0, 0)))


def test_weight_realization():
    w = UncertaintyWeight(0.1, 1.5, 0.1)
    sys = realize_weight(w)
    assert freq_response(sys, 0.0)[0, 0].real == pytest.approx(0.1)
    assert abs(freq_response(sys, 1e9)[0, 0]) == pytest.approx(1.5, rel=1e-6)
    np.testing.assert_allclose(sys.poles(), [-15.0])
    for x in (0.1, 3.0, 40.0):
        assert freq_response(sys, x)[0, 0] == pytest.approx(w(1j * x), rel=1e-12)


@pytest.mark.parametrize("kwargs", [dict(r0=0.2, r_inf=0.1), dict(r0=0.0), dict(tau=0.0)])
def test_weight_validation(kwargs):
    with pytest.raises(DomainError):
        UncertaintyWeight(**kwargs)


def test_hinf_of_weight_is_r_inf():
    assert hinf_norm(realize_weight(UncertaintyWeight())) == pytest.approx(1.5, abs=1e-6)


def test_hinf_of_resonant_system():
    # lightly damped second-order: peak 1 / (2 zeta sqrt(1 - zeta^2))
    zeta, wn = 0.05, 3.0
    sys = StateSpaceModel([[0.0, 1.0], [-wn**2, -2 * zeta * wn]], [[0.0], [wn**2]], [[1.0, 0.0]], [[0.0]])
    assert hinf_norm(sys) == pytest.approx(1 / (2 * zeta * np.sqrt(1 - zeta**2)), rel=1e-8)


def test_hinf_unstable_raises():
    with pytest.raises(UnstableSystemError):
        hinf_norm(StateSpaceModel([[0.5]], [[1.0]], [[1.0]], [[0.0]]))


def test_hinf_agrees_with_grid():
    rng = np.random.default_rng(7)
    for _ in range(20):
        n, m = rng.integers(1, 7), rng.integers(1, 4)
        sys = random_stable(rng, n, m, m)
        assert hinf_norm(sys) == pytest.approx(hinf_norm_grid(sys), rel=1e-3)


def test_similarity_scale_matches_direct_product():
    rng = np.random.default_rng(3)
    sys = random_stable(rng, 3, 2, 2)
    W = rng.normal(size=(2, 2)) + 2 * np.eye(2)
    scaled = similarity_scale(sys, W)
    np.testing.assert_allclose(freq_response(scaled, 1.0), W @ freq_response(sys, 1.0) @ np.linalg.inv(W), atol=1e-12)
    for c in (1.0, -3.0, 1e-3):
        assert hinf_norm(similarity_scale(sys, c * np.eye(2))) == pytest.approx(hinf_norm(sys), rel=1e-9)
    with pytest.raises(DomainError):
        similarity_scale(sys, np.zeros((2, 2)))


def test_discretize_against_scipy():
    rng = np.random.default_rng(5)
    sys = random_stable(rng, 3, 2, 2)
    d = discretize(sys, 0.05)
    Ad, Bd, Cd, Dd, _ = signal.cont2discrete((sys.A, sys.B, sys.C, sys.D), 0.05, method="zoh")
    np.testing.assert_allclose(d.A, Ad, atol=1e-12)
    np.testing.assert_allclose(d.B, Bd, atol=1e-12)
    np.testing.assert_array_equal(d.D, sys.D)
    assert d.dt == 0.05


def test_discretize_closed_forms():
    B = np.array([[1.0, 2.0], [3.0, 4.0]])
    integ = discretize(StateSpaceModel(np.zeros((2, 2)), B, np.eye(2), np.zeros((2, 2))), 0.01)
    np.testing.assert_allclose(integ.A, np.eye(2), atol=0)
    np.testing.assert_allclose(integ.B, 0.01 * B, rtol=1e-14)
    scalar = discretize(StateSpaceModel([[-1.0]], [[1.0]], [[1.0]], [[0.0]]), 0.1)
    assert scalar.A[0, 0] == pytest.approx(np.exp(-0.1), rel=1e-14)


def test_discrete_response_approaches_continuous():
    sys = random_stable(np.random.default_rng(11), 2, 1, 1)
    for dt in (1e-2, 1e-3):
        err = abs(freq_response(discretize(sys, dt), 0.5)[0, 0] - freq_response(sys, 0.5)[0, 0])
        assert err < 10 * dt


def test_interconnections():
    rng = np.random.default_rng(2)
    a, b = random_stable(rng, 2, 2, 2), random_stable(rng, 3, 2, 2)
    w = 0.7
    np.testing.assert_allclose(freq_response(series(a, b), w), freq_response(b, w) @ freq_response(a, w), atol=1e-12)
    np.testing.assert_allclose(freq_response(parallel(a, b), w), freq_response(a, w) + freq_response(b, w), atol=1e-12)
    blk = freq_response(append(a, b), w)
    np.testing.assert_allclose(blk[:2, :2], freq_response(a, w), atol=1e-12)
    np.testing.assert_allclose(blk[2:, 2:], freq_response(b, w), atol=1e-12)
    assert np.all(blk[:2, 2:] == 0)


@settings(max_examples=50, deadline=None)
@given(st.floats(0.01, 10.0), st.floats(1.1, 20.0), st.floats(0.01, 5.0))
def test_weight_norm_property(r0, ratio, tau):
    w = UncertaintyWeight(r0, r0 * ratio, tau)
    assert hinf_norm(realize_weight(w)) == pytest.approx(r0 * ratio, rel=1e-6)
