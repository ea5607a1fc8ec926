import numpy as np
import pytest

from softlimb.model import LimbParams, static_gain_matrix
from softlimb.robustness import conditioned_controller
from softlimb.synthesis import PiGains


@pytest.fixture(scope="session")
def G():
    return static_gain_matrix(LimbParams()).matrix


@pytest.fixture(scope="session")
def cc_fast(G):
    return conditioned_controller(G, PiGains(2.0, 1.5))


@pytest.fixture(scope="session")
def cc_slow(G):
    return conditioned_controller(G, PiGains(0.5, 1.5))


def random_structured_gain(rng):
    """Random gain with the beam-model structure [[a, a], [b, -b]]."""
    a = rng.uniform(0.05, 5.0) * rng.choice([-1, 1])
    b = rng.uniform(0.05, 5.0) * rng.choice([-1, 1])
    return np.array([[a, a], [b, -b]])


def random_stable(rng, n, m, p):
    from softlimb.lti import StateSpaceModel

    A = rng.normal(size=(n, n))
    A -= (np.max(np.linalg.eigvals(A).real) + rng.uniform(0.1, 2.0)) * np.eye(n)
    return StateSpaceModel(A, rng.normal(size=(n, m)), rng.normal(size=(p, n)), rng.normal(size=(p, m)))


def pytest_terminal_summary(terminalreporter):
    try:
        from test_acceptance import RESULTS
    except ImportError:
        return
    if not RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(RESULTS):
        ok, detail = RESULTS[n]
        terminalreporter.write_line(f"criterion {n:2d}: {'PASS' if ok else 'FAIL'}  {detail}")
