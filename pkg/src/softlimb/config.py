"""Sectioned ``key = value`` configuration for the command-line tool.

Sections and keys (all optional; angles in degrees)::

    [limb]        length_L, moduli, cross_width_b, cross_height_h,
                  moment_arm_dx, moment_arm_dy, sma_angle_deg
    [controller]  kp, ki
    [uncertainty] r0, r_inf, tau
    [simulation]  dt, duration, trajectory, amplitude_deg, lag_time_constant,
                  mismatch_seed, antiwindup, direction_scaling, skip

``lag_time_constant`` and ``mismatch_seed`` accept ``none``.
"""
from __future__ import annotations

import configparser
import dataclasses
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional, Union

from .errors import ConfigError, DomainError
from .lti import UncertaintyWeight
from .model import LimbParams
from .synthesis import PiGains

DEFAULT_KP = 2.0
DEFAULT_KI = 1.5
TRAJECTORY_KINDS = ("step", "sequence", "hold-sequence")


@dataclass(frozen=True)
class SimSettings:
    dt: float = 1e-3
    duration: float = 20.0
    trajectory: str = "step"
    amplitude_deg: float = 30.0
    lag_time_constant: Optional[float] = 0.5
    mismatch_seed: Optional[int] = None
    antiwindup: bool = True
    direction_scaling: bool = True
    skip: float = 0.0

    def __post_init__(self):
        if not self.dt > 0:
            raise DomainError(f"dt must be positive, got {self.dt!r}")
        if not self.duration > self.dt:
            raise DomainError(f"duration must exceed dt, got {self.duration!r}")
        if not math.isfinite(self.amplitude_deg):
            raise DomainError("amplitude_deg must be finite")
        if self.lag_time_constant is not None and not self.lag_time_constant > 0:
            raise DomainError(f"lag_time_constant must be positive or none, got {self.lag_time_constant!r}")
        if not 0 <= self.skip < self.duration:
            raise DomainError(f"skip must lie in [0, duration), got {self.skip!r}")


@dataclass(frozen=True)
class ToolConfig:
    limb: LimbParams = field(default_factory=LimbParams)
    gains: PiGains = field(default_factory=lambda: PiGains(DEFAULT_KP, DEFAULT_KI))
    weight: UncertaintyWeight = field(default_factory=UncertaintyWeight)
    simulation: SimSettings = field(default_factory=SimSettings)

    def items(self) -> list[tuple[str, str]]:
        """Fully resolved settings as ``(section.key, text)`` pairs, degrees for angles."""
        L = self.limb
        out = [
            ("limb.length_L", _fmt(L.length_L)),
            ("limb.moduli", ",".join(_fmt(e) for e in L.moduli)),
            ("limb.cross_width_b", _fmt(L.cross_width_b)),
            ("limb.cross_height_h", _fmt(L.cross_height_h)),
            ("limb.moment_arm_dx", _fmt(L.moment_arm_dx)),
            ("limb.moment_arm_dy", _fmt(L.moment_arm_dy)),
            ("limb.sma_angle_deg", _fmt(math.degrees(L.sma_angle_phi))),
            ("controller.kp", _fmt(self.gains.kp)),
            ("controller.ki", _fmt(self.gains.ki)),
            ("uncertainty.r0", _fmt(self.weight.r0)),
            ("uncertainty.r_inf", _fmt(self.weight.r_inf)),
            ("uncertainty.tau", _fmt(self.weight.tau)),
        ]
        for f in dataclasses.fields(SimSettings):
            out.append((f"simulation.{f.name}", _fmt(getattr(self.simulation, f.name))))
        return out


def _fmt(value) -> str:
    if value is None:
        return "none"
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, float):
        return repr(value)
    return str(value)


def _float(text: str) -> float:
    value = float(text)
    if not math.isfinite(value):
        raise ValueError(f"non-finite number {text!r}")
    return value


def _optional(conv):
    def parse(text: str):
        return None if text.strip().lower() in ("none", "") else conv(text)
    return parse


def _bool(text: str) -> bool:
    lowered = text.strip().lower()
    if lowered in ("1", "true", "yes", "on"):
        return True
    if lowered in ("0", "false", "no", "off"):
        return False
    raise ValueError(f"not a boolean: {text!r}")


def _moduli(text: str) -> tuple[float, ...]:
    return tuple(_float(t) for t in text.split(",") if t.strip())


def _trajectory(text: str) -> str:
    return text.strip()


# key -> (target field, converter); "_deg" keys are converted to radians
SCHEMA = {
    "limb": {
        "length_L": ("length_L", _float),
        "moduli": ("moduli", _moduli),
        "cross_width_b": ("cross_width_b", _float),
        "cross_height_h": ("cross_height_h", _float),
        "moment_arm_dx": ("moment_arm_dx", _float),
        "moment_arm_dy": ("moment_arm_dy", _float),
        "sma_angle_deg": ("sma_angle_phi", lambda t: math.radians(_float(t))),
    },
    "controller": {"kp": ("kp", _float), "ki": ("ki", _float)},
    "uncertainty": {"r0": ("r0", _float), "r_inf": ("r_inf", _float), "tau": ("tau", _float)},
    "simulation": {
        "dt": ("dt", _float),
        "duration": ("duration", _float),
        "trajectory": ("trajectory", _trajectory),
        "amplitude_deg": ("amplitude_deg", _float),
        "lag_time_constant": ("lag_time_constant", _optional(_float)),
        "mismatch_seed": ("mismatch_seed", _optional(int)),
        "antiwindup": ("antiwindup", _bool),
        "direction_scaling": ("direction_scaling", _bool),
        "skip": ("skip", _float),
    },
}


def _section_values(parser: configparser.ConfigParser, section: str) -> dict:
    values = {}
    if not parser.has_section(section):
        return values
    schema = SCHEMA[section]
    for key, text in parser.items(section):
        if key not in schema:
            raise ConfigError(f"[{section}] unknown key {key!r}; allowed: {', '.join(schema)}")
        target, conv = schema[key]
        try:
            values[target] = conv(text)
        except ValueError as exc:
            raise ConfigError(f"[{section}] {key}: {exc}") from None
    return values


def _build(section: str, cls, values: dict):
    try:
        return cls(**values)
    except DomainError as exc:
        raise ConfigError(f"[{section}] {exc}") from None


def config_from_text(text: str, source: str = "<config>") -> ToolConfig:
    parser = configparser.ConfigParser(interpolation=None)
    parser.optionxform = str  # keys are case sensitive (length_L)
    try:
        parser.read_string(text, source=source)
    except configparser.MissingSectionHeaderError as exc:
        raise ConfigError(f"{source}: line {exc.lineno}: expected a [section] header before {exc.line.strip()!r}") from None
    except configparser.ParsingError as exc:
        lineno, line = exc.errors[0]
        raise ConfigError(f"{source}: line {lineno}: cannot parse {line.strip()!r}") from None
    except configparser.Error as exc:
        raise ConfigError(f"{source}: {exc}") from None
    unknown = set(parser.sections()) - set(SCHEMA)
    if unknown:
        raise ConfigError(f"{source}: unknown section(s) {sorted(unknown)}; allowed: {', '.join(SCHEMA)}")
    limb = _build("limb", LimbParams, _section_values(parser, "limb"))
    ctrl = {"kp": DEFAULT_KP, "ki": DEFAULT_KI, **_section_values(parser, "controller")}
    gains = _build("controller", PiGains, ctrl)
    weight = _build("uncertainty", UncertaintyWeight, _section_values(parser, "uncertainty"))
    sim = _build("simulation", SimSettings, _section_values(parser, "simulation"))
    return ToolConfig(limb, gains, weight, sim)


def parse_config(path: Union[str, Path]) -> ToolConfig:
    """Read and validate a configuration file; omitted keys take their defaults."""
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc.strerror or exc}") from None
    return config_from_text(text, str(path))


def with_overrides(cfg: ToolConfig, **overrides) -> ToolConfig:
    """Replace controller gains or simulation settings by keyword."""
    gains = {k: v for k, v in overrides.items() if k in ("kp", "ki")}
    sim = {k: v for k, v in overrides.items() if k not in ("kp", "ki")}
    if gains:
        cfg = dataclasses.replace(cfg, gains=_build("controller", PiGains, {**dataclasses.asdict(cfg.gains), **gains}))
    if sim:
        cfg = dataclasses.replace(cfg, simulation=_build("simulation", SimSettings, {**dataclasses.asdict(cfg.simulation), **sim}))
    return cfg
