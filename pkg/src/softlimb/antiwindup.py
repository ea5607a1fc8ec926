"""Hanus conditioning, actuator saturation and direction-preserving scaling."""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import NamedTuple

import numpy as np

from .errors import DomainError
from .lti import StateSpaceModel, discretize
from .synthesis import NominalController

SATURATION_LIMIT = 1.0
MAX_D_CONDITION = 1e9


class DiscreteController(NamedTuple):
    """ZOH nominal controller ``(Phi, Gamma, C, D)`` and its conditioned update.

    Conditioning is applied to the sampled controller: ``H_d = Gamma D^-1`` so
    ``x+ = (Phi - H_d C) x + H_d u_a`` and ``Gamma - H_d D`` vanishes exactly.
    """

    Phi: np.ndarray
    Gamma: np.ndarray
    C: np.ndarray
    D: np.ndarray
    H_d: np.ndarray
    Phi_cond: np.ndarray
    Gamma_cond: np.ndarray


@dataclass(frozen=True)
class ConditionedController:
    """Nominal controller plus the anti-windup gain ``H = B D^-1``."""

    nominal: NominalController
    H: np.ndarray
    _discrete: dict = field(default_factory=dict, init=False, repr=False, compare=False)

    @property
    def ss(self) -> StateSpaceModel:
        return self.nominal.ss

    @property
    def A_cond(self) -> np.ndarray:
        return self.ss.A - self.H @ self.ss.C

    @property
    def B_cond(self) -> np.ndarray:
        return self.ss.B - self.H @ self.ss.D

    def discrete(self, dt: float) -> DiscreteController:
        if dt not in self._discrete:
            if not dt > 0:
                raise DomainError(f"dt must be positive, got {dt!r}")
            zoh = discretize(self.ss, dt)
            H_d = zoh.B @ np.linalg.inv(zoh.D)
            self._discrete[dt] = DiscreteController(
                zoh.A, zoh.B, zoh.C, zoh.D, H_d, zoh.A - H_d @ zoh.C, zoh.B - H_d @ zoh.D
            )
        return self._discrete[dt]


@dataclass(frozen=True)
class ControllerState:
    x: np.ndarray = field(default_factory=lambda: np.zeros(2))

    def __post_init__(self):
        x = np.asarray(self.x, dtype=float)
        if not np.all(np.isfinite(x)):
            raise DomainError("controller state has non-finite entries")
        object.__setattr__(self, "x", x)


def hanus_condition(nc: NominalController) -> ConditionedController:
    """Attach ``H = B D^-1`` so that the error reaches the states only through ``u_a``.

    The conditioned dynamics are ``x' = (A - HC) x + (B - HD) e + H u_a`` with
    output ``u_c = C x + D e``.
    """
    D = nc.ss.D
    if D.shape[0] != D.shape[1] or np.linalg.cond(D) >= MAX_D_CONDITION:
        raise DomainError("controller feedthrough D is not invertible; Hanus gain undefined")
    return ConditionedController(nc, nc.ss.B @ np.linalg.inv(D))


def saturate(u) -> np.ndarray:
    """Component-wise clamp to the actuator range [-1, 1]."""
    return np.clip(np.asarray(u, dtype=float), -SATURATION_LIMIT, SATURATION_LIMIT)


def preserve_direction(u) -> np.ndarray:
    """Scale ``u`` by its largest magnitude entry when that entry exceeds 1.

    A 2-D array is treated as a batch of row vectors.
    """
    u = np.asarray(u, dtype=float)
    if u.ndim > 1:
        peak = np.max(np.abs(u), axis=-1, keepdims=True)
        return np.where(peak > SATURATION_LIMIT, u / np.maximum(peak, SATURATION_LIMIT), u)
    peak = np.max(np.abs(u)) if u.size else 0.0
    return u / peak if peak > SATURATION_LIMIT else u.copy()


def actuator(u_c, direction_scaling: bool = True) -> np.ndarray:
    """Applied input for a commanded input: optional direction scaling, then the clamp."""
    return saturate(preserve_direction(u_c) if direction_scaling else u_c)


def controller_step(
    cc: ConditionedController,
    state: ControllerState,
    e,
    dt: float,
    antiwindup: bool = True,
    direction_scaling: bool = True,
):
    """Advance the sampled controller by one period.

    The command is formed from the current state, passed through the
    direction scaling and the clamp, and the state update uses the applied
    input of the same sample.

    Returns
    -------
    u_c, u_a : ndarray
        Commanded and applied inputs.
    state : ControllerState
        State at the next sample.
    """
    d = cc.discrete(dt)
    e = np.asarray(e, dtype=float)
    u_c = d.C @ state.x + d.D @ e
    u_a = actuator(u_c, direction_scaling)
    if antiwindup:
        x_next = d.Phi_cond @ state.x + d.Gamma_cond @ e + d.H_d @ u_a
    else:
        x_next = d.Phi @ state.x + d.Gamma @ e
    return u_c, u_a, ControllerState(x_next)
