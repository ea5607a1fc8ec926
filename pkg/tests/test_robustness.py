import numpy as np
import pytest

from softlimb.errors import DomainError
from softlimb.lti import UncertaintyWeight, freq_response, hinf_norm_grid, is_hurwitz, similarity_scale, hinf_norm
from softlimb.robustness import (
    BETA_MARGIN,
    build_m_mixed,
    build_m_sat,
    compute_beta,
    conditioned_controller,
    max_stable_gain,
    sweep_beta,
    verify_robust_stability,
)
from softlimb.synthesis import PiGains, closed_loop_pole

GAIN_GRID = [(0.5, 1.5), (1.0, 1.5), (2.0, 1.5), (2.0, 0.3), (4.0, 3.0)]


def m11_scalar(s, kp, ki):
    """Closed-form dead-zone M11 of the decoupled loop (a scalar times I)."""
    return kp / (1 + kp) - ki / ((1 + kp) ** 2 * (s + ki * kp / (1 + kp)))


def frozen_gain_loop(cc, G, k):
    """Loop matrix with the actuator replaced by u_a = k u_c (static plant, r = 0)."""
    ss = cc.ss
    Mq = np.linalg.inv(np.eye(2) + k * ss.D @ G) @ ss.C
    return cc.A_cond + (cc.H - cc.B_cond @ G) @ (k * Mq)


@pytest.mark.parametrize("kp,ki", GAIN_GRID)
def test_deadzone_form_closed_forms(G, kp, ki):
    cc = conditioned_controller(G, PiGains(kp, ki))
    m = build_m_sat(cc, G, sector="deadzone")
    A, B, C, D = cc.ss.A, cc.ss.B, cc.ss.C, cc.ss.D
    inv = np.linalg.inv(np.eye(2) + D @ G)
    np.testing.assert_allclose(m.ss.A, (A - cc.H @ C) + cc.H @ inv @ C, atol=1e-12)
    np.testing.assert_allclose(m.ss.B, -cc.H @ inv, atol=1e-12)
    np.testing.assert_allclose(m.ss.C, inv @ C, atol=1e-12)
    np.testing.assert_allclose(m.ss.D, inv @ D @ G, atol=1e-12)
    np.testing.assert_allclose(m.ss.D, kp / (1 + kp) * np.eye(2), atol=1e-12)
    np.testing.assert_allclose(np.linalg.eigvals(m.ss.A), [closed_loop_pole(PiGains(kp, ki))] * 2, atol=1e-9)
    for w in np.logspace(-3, 3, 20):
        np.testing.assert_allclose(freq_response(m.ss, w), m11_scalar(1j * w, kp, ki) * np.eye(2), atol=1e-9)


def test_deadzone_beta_identity_scaling(cc_fast, G):
    m = build_m_sat(cc_fast, G, sector="deadzone")
    assert compute_beta(m.ss, np.eye(2)) == pytest.approx(2 / 3, abs=1e-6)
    assert hinf_norm_grid(m.ss) == pytest.approx(2 / 3, abs=1e-6)


@pytest.mark.parametrize("kp,ki", GAIN_GRID)
def test_centered_form_nominal_poles(G, kp, ki):
    cc = conditioned_controller(G, PiGains(kp, ki))
    m = build_m_sat(cc, G)
    np.testing.assert_allclose(np.linalg.eigvals(m.ss.A), [-ki * (1 + kp) / (2 + kp)] * 2, atol=1e-9)
    np.testing.assert_allclose(m.ss.A, frozen_gain_loop(cc, G, 0.5), atol=1e-12)


def test_mixed_nominal_poles_and_dimensions(cc_fast, G):
    m = build_m_mixed(cc_fast, G, UncertaintyWeight(), sector="deadzone")
    assert m.ss.n == 4 and m.ss.m == 4 and m.ss.p == 4
    np.testing.assert_allclose(np.sort(np.linalg.eigvals(m.ss.A).real), [-15, -15, -1, -1], atol=1e-9)
    assert [b.scaling for b in m.structure.blocks] == ["full", "scalar-identity"]


def test_vanishing_weight_decouples_dynamic_channel(cc_fast, G):
    tiny = UncertaintyWeight(1e-12, 2e-12, 0.1)
    m = build_m_mixed(cc_fast, G, tiny)
    sat = build_m_sat(cc_fast, G)
    for w in (0.1, 1.0, 10.0):
        M = freq_response(m.ss, w)
        assert np.max(np.abs(M[:, 2:])) < 1e-9
        np.testing.assert_allclose(M[:2, :2], freq_response(sat.ss, w), atol=1e-9)


def test_compute_beta_invariances(cc_slow, G):
    m = build_m_mixed(cc_slow, G, UncertaintyWeight())
    W = np.diag([1.0, 2.0, 0.5, 0.5]) + 0.1
    plain = compute_beta(m.ss, W)
    assert compute_beta(m.ss, -3.0 * W) == pytest.approx(plain, rel=1e-8)
    refined = compute_beta(m.ss, W, m.structure)
    assert refined <= plain + 1e-12
    assert refined <= hinf_norm(m.ss) + 1e-12
    with pytest.raises(DomainError):
        compute_beta(m.ss, np.zeros((4, 4)))


def test_report_consistency(cc_slow, G):
    rep = verify_robust_stability(cc_slow, G, with_dynamics=True)
    assert rep.robustly_stable == (rep.m_stable and rep.beta < 1 - BETA_MARGIN)
    assert rep.certificate.feasible
    assert rep.beta <= rep.beta_identity + 1e-12
    d = rep.as_dict()
    assert d["kp"] == 0.5 and d["robustly_stable"] is True


def test_verdicts_at_published_operating_points(G):
    slow = verify_robust_stability(conditioned_controller(G, PiGains(0.5, 1.5)), G, with_dynamics=True)
    fast = verify_robust_stability(conditioned_controller(G, PiGains(2.0, 1.5)), G, with_dynamics=False)
    assert slow.robustly_stable and slow.beta < 1
    assert fast.robustly_stable


def test_certified_sat_only_gains_survive_frozen_sector_gains(G):
    """Every constant gain k in the sector [0, 1] must leave the loop stable when certified."""
    for kp in (0.5, 1.0, 2.0, 3.0):
        cc = conditioned_controller(G, PiGains(kp, 1.5))
        assert verify_robust_stability(cc, G).robustly_stable
        for k in np.linspace(0.0, 1.0, 21):
            assert is_hurwitz(frozen_gain_loop(cc, G, k), margin=0.0) or k == 0.0


def test_sat_only_beta_closed_form(G):
    """Centered cone, decoupled loop: beta = max(|kp-1|/(kp+1), kp/(kp+2))."""
    for kp in (0.5, 1.0, 2.0, 3.0):
        rep = verify_robust_stability(conditioned_controller(G, PiGains(kp, 1.5)), G)
        assert rep.beta == pytest.approx(max(abs(kp - 1) / (kp + 1), kp / (kp + 2)), abs=1e-6)


def test_beta_monotone_and_mixed_dominates(G):
    kps = [0.5, 1.0, 1.5, 2.0, 2.5]
    sat = [r.beta for r in sweep_beta(kps, 1.5, G)]
    mixed = [r.beta for r in sweep_beta(kps, 1.5, G, with_dynamics=True)]
    # sat-only values at 0.5 and 1.0 are both exactly 1/3
    assert np.all(np.diff(sat) >= -1e-8), sat
    assert np.all(np.diff(mixed) >= -1e-8), mixed
    assert np.all(np.array(mixed) >= np.array(sat) - 1e-8)


def test_spectral_backend_verdict_matches(G):
    cc = conditioned_controller(G, PiGains(1.0, 1.5))
    a = verify_robust_stability(cc, G, with_dynamics=True, backend="cvxpy")
    b = verify_robust_stability(cc, G, with_dynamics=True, backend="spectral")
    assert a.robustly_stable == b.robustly_stable
    assert a.beta == pytest.approx(b.beta, abs=1e-3)


def test_max_stable_gain_coarse(G):
    sat = max_stable_gain(1.5, False, None, G, grid=0.5, kp_max=3.0)
    assert not sat.bounded and sat.max_kp == 3.0
    mixed = max_stable_gain(1.5, True, UncertaintyWeight(), G, grid=0.5, kp_max=3.0)
    assert mixed.bounded
    assert 1.5 <= mixed.max_kp < mixed.first_failure <= 2.0
    assert mixed.max_kp < sat.max_kp
    assert [row[0] for row in mixed.table] == [0.5, 1.0, 1.5, 2.0]


def test_max_stable_gain_errors(G):
    with pytest.raises(DomainError):
        max_stable_gain(1.5, False, None, G, grid=0.0)
    with pytest.raises(DomainError, match="no robustly stable gain"):
        max_stable_gain(1.5, True, UncertaintyWeight(), G, grid=3.0, kp_max=3.0)
