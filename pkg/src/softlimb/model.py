"""Static beam-bending model of the SMA-actuated limb.

The limb is treated as a cantilevered Euler-Bernoulli beam loaded by a
constant end moment ``M = F d``. The PWM duty ``u`` in [-1, 1] stands in for
the force ``F``, so the plant collapses to a constant 2x2 gain from the two
diagonal SMA-pair inputs to the (pitch, yaw) bend angles.

All quantities are SI: meters, pascals, radians.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .errors import DomainError

# Cross-section and moduli below are the reported limb values. Length, moment
# arms and SMA angle are not reported; the defaults are chosen so that a 30 deg
# bend on both axes is within actuator authority and 60 deg is near its edge.
DRAGONSKIN_MODULUS = 0.19e6
TUBING_MODULUS = 1.4e6
SECTION_WIDTH = 16.4e-3
SECTION_HEIGHT = 8.0e-3


@dataclass(frozen=True)
class LimbParams:
    """Geometry and material constants of the limb.

    The rectangular section has its width along x and height along y, so
    ``I_x = b h^3 / 12`` governs bending about x (yaw row) and
    ``I_y = h b^3 / 12`` bending about y (pitch row).
    """

    length_L: float = 0.4
    moduli: tuple[float, ...] = (DRAGONSKIN_MODULUS, TUBING_MODULUS)
    cross_width_b: float = SECTION_WIDTH
    cross_height_h: float = SECTION_HEIGHT
    moment_arm_dx: float = 7.0e-3
    moment_arm_dy: float = 3.5e-3
    sma_angle_phi: float = math.pi / 4

    def __post_init__(self):
        object.__setattr__(self, "moduli", tuple(float(e) for e in self.moduli))
        for name in ("length_L", "cross_width_b", "cross_height_h", "moment_arm_dx", "moment_arm_dy"):
            value = getattr(self, name)
            if not (np.isfinite(value) and value > 0):
                raise DomainError(f"{name} must be a positive length, got {value!r}")
        if not self.moduli:
            raise DomainError("moduli must contain at least one Young's modulus")
        if any(not (np.isfinite(e) and e > 0) for e in self.moduli):
            raise DomainError(f"moduli must be positive, got {self.moduli!r}")
        if not (0.0 <= self.sma_angle_phi <= math.pi / 2):
            raise DomainError(f"sma_angle_phi must lie in [0, pi/2], got {self.sma_angle_phi!r}")

    @property
    def modulus(self) -> float:
        return effective_modulus(self.moduli)

    @property
    def inertia_x(self) -> float:
        return rect_moment_of_inertia(self.cross_width_b, self.cross_height_h)

    @property
    def inertia_y(self) -> float:
        return rect_moment_of_inertia(self.cross_height_h, self.cross_width_b)


@dataclass(frozen=True)
class StaticGain:
    """DC gain from diagonal-pair inputs (u1, u2) to (pitch, yaw) in rad per unit duty."""

    matrix: np.ndarray = field(repr=True)

    def __post_init__(self):
        g = np.array(self.matrix, dtype=float)
        if g.shape != (2, 2):
            raise DomainError(f"static gain must be 2x2, got shape {g.shape}")
        if not np.all(np.isfinite(g)):
            raise DomainError("static gain has non-finite entries")
        g.setflags(write=False)
        object.__setattr__(self, "matrix", g)

    def __array__(self, dtype=None, copy=None):
        return np.asarray(self.matrix, dtype=dtype)


def rect_moment_of_inertia(b: float, h: float) -> float:
    """Second moment of area ``b h^3 / 12`` of a rectangle bent about the axis parallel to ``b``."""
    if not (b > 0 and h > 0):
        raise DomainError(f"rectangle dimensions must be positive, got b={b!r}, h={h!r}")
    return b * h**3 / 12.0


def effective_modulus(moduli: Sequence[float]) -> float:
    """Arithmetic mean of the constituent Young's moduli."""
    moduli = list(moduli)
    if not moduli:
        raise DomainError("need at least one modulus")
    if any(not e > 0 for e in moduli):
        raise DomainError(f"moduli must be positive, got {moduli!r}")
    return float(sum(moduli) / len(moduli))


def bend_angle(F: float, d: float, L: float, E: float, I: float) -> float:
    """Tip bend angle ``F d L / (E I)`` of a cantilever under end moment ``F d``."""
    for name, value in (("d", d), ("L", L), ("E", E), ("I", I)):
        if not value > 0:
            raise DomainError(f"{name} must be positive, got {value!r}")
    return F * d * L / (E * I)


def static_gain_matrix(p: LimbParams) -> StaticGain:
    """Static gain of the limb.

    Row 1 (pitch) uses the x moment arm projected by ``cos(phi)``; both SMA
    pairs pull the same way. Row 2 (yaw) uses the y arm projected by
    ``sin(phi)`` and the pairs act antagonistically.
    """
    E = p.modulus
    pitch = bend_angle(math.cos(p.sma_angle_phi), p.moment_arm_dx, p.length_L, E, p.inertia_y)
    yaw = bend_angle(math.sin(p.sma_angle_phi), p.moment_arm_dy, p.length_L, E, p.inertia_x)
    return StaticGain(np.array([[pitch, pitch], [yaw, -yaw]]))
