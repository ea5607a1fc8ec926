import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from conftest import random_structured_gain
from softlimb.antiwindup import ControllerState, actuator, controller_step, hanus_condition, preserve_direction, saturate
from softlimb.errors import DomainError
from softlimb.lti import StateSpaceModel, discretize
from softlimb.synthesis import NominalController, PiGains, SvdFactors, build_nominal_controller, svd_2x2


def test_hanus_identities_random():
    rng = np.random.default_rng(4)
    for _ in range(100):
        G = random_structured_gain(rng)
        g = PiGains(rng.uniform(0.1, 5), rng.uniform(0.1, 5))
        f = svd_2x2(G)
        cc = hanus_condition(build_nominal_controller(f, g))
        ss = cc.ss
        assert np.max(np.abs(ss.B - cc.H @ ss.D)) <= 1e-12 * max(1.0, np.abs(ss.B).max())
        np.testing.assert_allclose(cc.H, g.ki / g.kp * f.V.T, atol=1e-10)
        np.testing.assert_allclose(cc.A_cond, -g.ki * np.eye(2), atol=1e-10)


def test_singular_feedthrough_rejected():
    f = SvdFactors(np.eye(2), np.ones(2), np.eye(2))
    ss = StateSpaceModel(np.zeros((2, 2)), np.eye(2), np.eye(2), np.array([[1.0, 1.0], [1.0, 1.0]]))
    with pytest.raises(DomainError):
        hanus_condition(NominalController(ss, f, PiGains(1.0, 1.0)))


def test_saturate_examples():
    np.testing.assert_array_equal(saturate([0.5, -0.3]), [0.5, -0.3])
    np.testing.assert_array_equal(saturate([0.5, -2.0]), [0.5, -1.0])
    np.testing.assert_array_equal(saturate([3.0, -3.0]), [1.0, -1.0])


def test_preserve_direction_examples():
    np.testing.assert_array_equal(preserve_direction([0.3, -0.4]), [0.3, -0.4])
    np.testing.assert_array_equal(preserve_direction([2.0, 1.0]), [1.0, 0.5])
    np.testing.assert_array_equal(preserve_direction([-3.0, 3.0]), [-1.0, 1.0])


def test_operator_properties_bulk():
    u = np.random.default_rng(0).normal(scale=3.0, size=(20_000, 2))
    n = preserve_direction(u)
    np.testing.assert_array_equal(n[:500], np.array([preserve_direction(v) for v in u[:500]]))
    assert np.all(np.abs(n) <= 1.0)
    np.testing.assert_array_equal(saturate(n), n)
    cross = u[:, 0] * n[:, 1] - u[:, 1] * n[:, 0]
    assert np.max(np.abs(cross)) <= 1e-12 * np.max(np.abs(u))


@settings(max_examples=300)
@given(st.floats(-1e6, 1e6), st.floats(-1e6, 1e6))
def test_direction_scaling_then_clamp_is_direction_scaling(a, b):
    n = preserve_direction([a, b])
    np.testing.assert_array_equal(saturate(n), n)
    np.testing.assert_array_equal(actuator([a, b], True), n)
    assert a * n[1] - b * n[0] == pytest.approx(0.0, abs=1e-9 * max(1.0, abs(a), abs(b)))


def test_zero_error_equilibrium(cc_fast):
    u_c, u_a, st_ = controller_step(cc_fast, ControllerState(), np.zeros(2), 1e-3)
    assert not np.any(u_c) and not np.any(u_a) and not np.any(st_.x)


def test_unsaturated_updates_agree(cc_fast):
    rng = np.random.default_rng(8)
    for _ in range(50):
        x = rng.normal(scale=0.05, size=2)
        e = rng.normal(scale=0.05, size=2)
        u_c, u_a, on = controller_step(cc_fast, ControllerState(x), e, 1e-3, antiwindup=True)
        assert np.max(np.abs(u_c)) <= 1.0
        _, _, off = controller_step(cc_fast, ControllerState(x), e, 1e-3, antiwindup=False)
        np.testing.assert_allclose(on.x, off.x, atol=1e-12)


def test_unconditioned_update_is_zoh_of_nominal(cc_fast):
    dt = 1e-2
    zoh = discretize(cc_fast.ss, dt)
    x, e = np.array([0.1, -0.2]), np.array([0.3, 0.1])
    _, _, nxt = controller_step(cc_fast, ControllerState(x), e, dt, antiwindup=False)
    np.testing.assert_allclose(nxt.x, zoh.A @ x + zoh.B @ e, atol=1e-14)


def test_state_update_sees_error_only_through_applied_input(cc_fast):
    """Hold u_a fixed (deep saturation) and vary e: the conditioned update must not change."""
    dt = 1e-3
    d = cc_fast.discrete(dt)
    x = np.array([0.2, 0.1])
    for e in (np.array([5.0, 5.0]), np.array([50.0, 7.0])):
        u_a = actuator(d.C @ x + d.D @ e)
        np.testing.assert_allclose(d.Phi_cond @ x + d.Gamma_cond @ e + d.H_d @ u_a, d.Phi_cond @ x + d.H_d @ u_a, atol=1e-12)
    np.testing.assert_allclose(d.Gamma_cond, 0.0, atol=1e-12)


def test_windup_bounded_only_with_conditioning(cc_fast):
    e = np.array([2.0, 2.0])
    norms = {}
    for aw in (True, False):
        state = ControllerState()
        trace = []
        for k in range(10_000):
            _, u_a, state = controller_step(cc_fast, state, e, 1e-3, antiwindup=aw)
            assert np.all(np.abs(u_a) <= 1.0)
            trace.append(np.linalg.norm(state.x))
        norms[aw] = np.array(trace)
    # conditioned: settles to a constant
    assert abs(norms[True][-1] - norms[True][-2]) < 1e-9
    assert norms[True].max() < 10.0
    # unconditioned: grows linearly in time
    growth = np.diff(norms[False][::1000])
    np.testing.assert_allclose(growth, growth[0], rtol=1e-6)
    assert norms[False][-1] > 10 * norms[True][-1]


def test_nonfinite_state_rejected():
    with pytest.raises(DomainError):
        ControllerState(np.array([np.nan, 0.0]))
