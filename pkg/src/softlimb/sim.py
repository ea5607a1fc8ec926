"""Closed-loop time-domain simulation of the limb under the sampled controller.

The truth plant is the static gain optionally preceded by a first-order
actuator lag and a multiplicative input perturbation ``I + w(s) Delta(s)``.
When the plant has direct feedthrough the sampled loop is algebraic
(``u_c`` depends on ``y`` which depends on ``sat(u_c)``); it is solved
exactly at every sample rather than broken with an artificial delay.
"""
from __future__ import annotations

import io
import math
from dataclasses import dataclass
from pathlib import Path
from typing import Optional, Union

import numpy as np
from scipy.optimize import root

from .antiwindup import ConditionedController, ControllerState, actuator, controller_step
from .errors import DomainError, InstabilityError
from .lti import StateSpaceModel, UncertaintyWeight, append, discretize, hinf_norm, parallel, realize_weight, series

DEFAULT_DT = 1e-3
DEFAULT_LAG = 0.5
DIVERGENCE_LIMIT = 1e3
COLUMNS = ("t", "r_pitch", "r_yaw", "y_pitch", "y_yaw", "u1_c", "u2_c", "u1_a", "u2_a", "x1", "x2")


@dataclass(frozen=True)
class TruthPlant:
    """Plant used in simulation: ``y = G (I + w Delta) lag(u)``."""

    gain: np.ndarray
    lag: Optional[StateSpaceModel] = None
    mismatch: Optional[StateSpaceModel] = None
    weight: Optional[UncertaintyWeight] = None

    def realization(self) -> StateSpaceModel:
        G = np.asarray(self.gain, dtype=float)
        path = self.lag if self.lag is not None else StateSpaceModel.static(np.eye(2))
        if self.mismatch is not None:
            w = append(realize_weight(self.weight or UncertaintyWeight()), realize_weight(self.weight or UncertaintyWeight()))
            perturb = parallel(StateSpaceModel.static(np.eye(2)), series(self.mismatch, w))
            path = series(path, perturb)
        return series(path, StateSpaceModel.static(G))


def first_order_lag(tau: float, channels: int = 2) -> StateSpaceModel:
    """Unit-DC-gain lag ``1 / (tau s + 1)`` on each channel."""
    if not tau > 0:
        raise DomainError(f"lag time constant must be positive, got {tau!r}")
    return StateSpaceModel(-np.eye(channels) / tau, np.eye(channels) / tau, np.eye(channels), np.zeros((channels, channels)))


def random_mismatch(seed: int, channels: int = 2, order: int = 2) -> StateSpaceModel:
    """Random stable, strictly proper ``Delta`` with ``||Delta||_inf`` = 1 (to within 1e-9, from below)."""
    rng = np.random.default_rng(seed)
    blocks = []
    k = 0
    while k < order:
        if order - k >= 2 and rng.random() < 0.5:
            sigma, omega = rng.uniform(0.5, 10.0), rng.uniform(0.5, 20.0)
            blocks.append(np.array([[-sigma, omega], [-omega, -sigma]]))
            k += 2
        else:
            blocks.append(np.array([[-rng.uniform(0.5, 30.0)]]))
            k += 1
    A = np.zeros((order, order))
    i = 0
    for b in blocks:
        A[i:i + len(b), i:i + len(b)] = b
        i += len(b)
    B = rng.normal(size=(order, channels))
    C = rng.normal(size=(channels, order))
    sys = StateSpaceModel(A, B, C, np.zeros((channels, channels)))
    scale = hinf_norm(sys) * (1 + 1e-9)
    return StateSpaceModel(A, B, C / scale, sys.D)


def build_truth_plant(
    G,
    lag_time_constant: Optional[float] = None,
    mismatch_seed: Optional[int] = None,
    w: Optional[UncertaintyWeight] = None,
) -> TruthPlant:
    lag = first_order_lag(lag_time_constant) if lag_time_constant is not None else None
    mismatch = random_mismatch(mismatch_seed) if mismatch_seed is not None else None
    return TruthPlant(np.asarray(G, dtype=float), lag, mismatch, (w or UncertaintyWeight()) if mismatch is not None else None)


@dataclass(frozen=True)
class Trajectory:
    t: np.ndarray
    pitch: np.ndarray
    yaw: np.ndarray
    duration: float
    dt: float

    def __post_init__(self):
        if not self.duration > 0:
            raise DomainError("trajectory duration must be positive")
        if len(self.t) > 1 and np.any(np.diff(self.t) <= 0):
            raise DomainError("trajectory times must be strictly increasing")


HOLD_SEQUENCE = ((0.0, 0.0), (1.0, 0.0), (1.0, 1.0), (0.0, 1.0), (-1.0, 0.0), (0.0, 0.0))


def _sample_times(duration: float, dt: float) -> np.ndarray:
    if not (duration > dt > 0):
        raise DomainError(f"need duration > dt > 0, got duration={duration!r}, dt={dt!r}")
    return np.arange(int(round(duration / dt))) * dt


def read_waypoints(path: Union[str, Path]):
    """Parse ``t, pitch_deg, yaw_deg`` rows; a non-numeric first row is taken as a header."""
    rows = []
    with open(path, newline="") as fh:
        for lineno, line in enumerate(fh, start=1):
            text = line.strip()
            if not text or text.startswith("#"):
                continue
            fields = [f.strip() for f in text.split(",")]
            try:
                values = [float(f) for f in fields]
            except ValueError:
                if not rows and lineno == 1:
                    continue
                raise DomainError(f"{path}:{lineno}: non-numeric waypoint entry {text!r}") from None
            if len(values) != 3:
                raise DomainError(f"{path}:{lineno}: expected 3 columns (t, pitch_deg, yaw_deg), got {len(values)}")
            if rows and values[0] <= rows[-1][0]:
                raise DomainError(f"{path}:{lineno}: waypoint times must increase")
            rows.append(values)
    if not rows:
        raise DomainError(f"{path}: no waypoints")
    data = np.array(rows)
    return data[:, 0], np.radians(data[:, 1]), np.radians(data[:, 2])


def make_trajectory(
    kind: str,
    amplitude: float = math.radians(30.0),
    duration: float = 20.0,
    dt: float = DEFAULT_DT,
    path: Optional[Union[str, Path]] = None,
) -> Trajectory:
    """Reference signals sampled every ``dt`` on ``[0, duration)``.

    ``step``
        both axes at ``amplitude`` from t = 0.
    ``hold-sequence`` (alias ``sequence``)
        piecewise-linear loop (0,0) -> (A,0) -> (A,A) -> (0,A) -> (-A,0) ->
        (0,0) in (pitch, yaw), stretched over ``duration``.
    ``waypoints``
        linear interpolation of the CSV at ``path`` (angles in degrees);
        ``amplitude`` is ignored.
    """
    if kind == "waypoints":
        if path is None:
            raise DomainError("waypoint trajectory needs a path")
        tw, pw, yw = read_waypoints(path)
        duration = duration if duration else float(tw[-1])
        t = _sample_times(duration, dt)
        return Trajectory(t, np.interp(t, tw, pw), np.interp(t, tw, yw), duration, dt)
    t = _sample_times(duration, dt)
    if kind == "step":
        return Trajectory(t, np.full(t.size, amplitude), np.full(t.size, amplitude), duration, dt)
    if kind in ("hold-sequence", "sequence"):
        shape = np.array(HOLD_SEQUENCE) * amplitude
        knots = np.linspace(0.0, duration, len(shape))
        return Trajectory(t, np.interp(t, knots, shape[:, 0]), np.interp(t, knots, shape[:, 1]), duration, dt)
    raise DomainError(f"unknown trajectory kind {kind!r}")


@dataclass(frozen=True)
class SimTrace:
    data: np.ndarray

    def __getitem__(self, name: str) -> np.ndarray:
        return self.data[:, COLUMNS.index(name)]

    def __len__(self) -> int:
        return self.data.shape[0]

    @property
    def t(self) -> np.ndarray:
        return self["t"]

    @property
    def reference(self) -> np.ndarray:
        return self.data[:, 1:3]

    @property
    def output(self) -> np.ndarray:
        return self.data[:, 3:5]

    @property
    def u_commanded(self) -> np.ndarray:
        return self.data[:, 5:7]

    @property
    def u_applied(self) -> np.ndarray:
        return self.data[:, 7:9]

    def to_csv(self, target=None) -> str:
        """Write the trace with a header row; returns the text when ``target`` is None."""
        buf = io.StringIO()
        np.savetxt(buf, self.data, delimiter=",", fmt="%.12g", header=",".join(COLUMNS), comments="")
        text = buf.getvalue()
        if target is None:
            return text
        if hasattr(target, "write"):
            target.write(text)
        else:
            Path(target).write_text(text)
        return text


def _phi_jacobian(u: np.ndarray, direction_scaling: bool) -> np.ndarray:
    if direction_scaling:
        j = int(np.argmax(np.abs(u)))
        peak = abs(u[j])
        if peak <= 1.0:
            return np.eye(u.size)
        row = np.zeros(u.size)
        row[j] = np.sign(u[j])
        return np.eye(u.size) / peak - np.outer(u, row) / peak**2
    return np.diag((np.abs(u) <= 1.0).astype(float))


def solve_algebraic_loop(c: np.ndarray, M: np.ndarray, direction_scaling: bool) -> np.ndarray:
    """Solve ``u + M act(u) = c`` for the commanded input ``u``.

    Semismooth Newton from the unsaturated solution, with a general root
    finder as fallback.
    """
    I = np.eye(c.size)
    u = np.linalg.solve(I + M, c)
    if np.max(np.abs(u)) <= 1.0:
        return u
    tol = 1e-13 * (1.0 + np.max(np.abs(c)))
    for _ in range(60):
        F = u + M @ actuator(u, direction_scaling) - c
        if np.max(np.abs(F)) <= tol:
            return u
        u = u - np.linalg.solve(I + M @ _phi_jacobian(u, direction_scaling), F)
    sol = root(lambda v: v + M @ actuator(v, direction_scaling) - c, u, method="hybr", options={"xtol": 1e-14})
    if not sol.success:
        raise InstabilityError(f"algebraic loop did not converge: {sol.message}")
    return sol.x


def run_closed_loop(
    cc: ConditionedController,
    plant: TruthPlant,
    traj: Trajectory,
    dt: Optional[float] = None,
    antiwindup: bool = True,
    direction_scaling: bool = True,
) -> SimTrace:
    """Simulate the sampled loop from rest.

    Per sample: the plant output is read, the error formed, the controller
    stepped (direction scaling, clamp, conditioned update) and the applied
    input held over the next period.

    Raises
    ------
    InstabilityError
        When ``|y|`` exceeds 1e3 rad; the partial trace is attached.
    """
    dt = traj.dt if dt is None else dt
    if dt > traj.duration / 100:
        raise DomainError(f"dt={dt} is too coarse for a {traj.duration} s trajectory (need dt <= duration/100)")
    ss = plant.realization()
    zoh = discretize(ss, dt) if ss.n else ss
    Phi, Gam, Cp, Dp = zoh.A, zoh.B, zoh.C, zoh.D
    ctrl = cc.discrete(dt)
    M = ctrl.D @ Dp
    has_feedthrough = bool(np.any(M))
    n_steps = traj.t.size
    out = np.empty((n_steps, len(COLUMNS)))
    xp = np.zeros(ss.n)
    state = ControllerState(np.zeros(cc.ss.n))
    refs = np.column_stack([traj.pitch, traj.yaw])
    for k in range(n_steps):
        r = refs[k]
        y_free = Cp @ xp
        if has_feedthrough:
            u_guess = solve_algebraic_loop(ctrl.C @ state.x + ctrl.D @ (r - y_free), M, direction_scaling)
            y = y_free + Dp @ actuator(u_guess, direction_scaling)
        else:
            y = y_free
        x_now = state.x
        u_c, u_a, state = controller_step(cc, state, r - y, dt, antiwindup, direction_scaling)
        out[k, 0] = traj.t[k]
        out[k, 1:3] = r
        out[k, 3:5] = y
        out[k, 5:7] = u_c
        out[k, 7:9] = u_a
        out[k, 9:11] = x_now
        if not np.all(np.abs(y) < DIVERGENCE_LIMIT):
            raise InstabilityError(f"closed loop diverged at t={traj.t[k]:.3f} s", SimTrace(out[: k + 1].copy()))
        if ss.n:
            xp = Phi @ xp + Gam @ u_a
    return SimTrace(out)


def tracking_errors(trace: SimTrace, skip: float = 0.0) -> tuple[float, float]:
    """Mean absolute tracking error over ``t >= skip`` as ``(yaw_deg, pitch_deg)``."""
    mask = trace.t >= skip
    if not np.any(mask):
        raise DomainError(f"no samples at or after t={skip}")
    err = np.degrees(np.abs(trace.reference[mask] - trace.output[mask])).mean(axis=0)
    return float(err[1]), float(err[0])


def integrated_abs_error(trace: SimTrace) -> float:
    """Sum over axes of the time integral of ``|r - y|`` in rad s."""
    dt = trace.t[1] - trace.t[0] if len(trace) > 1 else 0.0
    return float(np.abs(trace.reference - trace.output).sum() * dt)


def peak_overshoot(trace: SimTrace) -> float:
    """Largest excursion of either axis beyond its final reference, in degrees (0 if none)."""
    final = trace.reference[-1]
    excess = (trace.output - final) * np.sign(np.where(final == 0, 1.0, final))
    return float(max(0.0, np.degrees(excess.max())))


def settling_time(trace: SimTrace, band: float = 0.02) -> float:
    """Last time either axis is outside ``band`` (relative) of its final reference."""
    final = trace.reference[-1]
    tol = band * np.maximum(np.abs(final), 1e-12)
    outside = np.any(np.abs(trace.output - final) > tol, axis=1)
    if not np.any(outside):
        return 0.0
    idx = np.nonzero(outside)[0][-1]
    return float(trace.t[min(idx + 1, len(trace) - 1)])
