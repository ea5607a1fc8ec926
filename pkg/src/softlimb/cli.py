"""``softlimb`` command-line tool.

Every report is a list of ``key=value`` lines that starts with the fully
resolved configuration. Exit status: 0 on success, 1 on a domain or
configuration error, 2 on a usage error.
"""
from __future__ import annotations

import argparse
import math
import sys
from typing import Optional, Sequence, TextIO

import numpy as np

from . import sim
from .antiwindup import hanus_condition
from .config import ToolConfig, _float, _optional, parse_config, with_overrides
from .errors import DomainError, InstabilityError
from .model import static_gain_matrix
from .robustness import max_stable_gain, verify_robust_stability
from .synthesis import build_nominal_controller, closed_loop_pole, svd_2x2

# published reference values, printed next to the computed ones for comparison
REFERENCE_BETA_WITH_DYNAMICS = 4.7793
REFERENCE_MAX_KP = {False: 2.0, True: 0.5}
REFERENCE_STEP_RESIDUAL_DEG = {"yaw": 2.19, "pitch": 1.94}


def _fmt(value) -> str:
    if isinstance(value, (bool, np.bool_)):
        return "true" if value else "false"
    if isinstance(value, (float, np.floating)):
        return f"{float(value):.10g}"
    if isinstance(value, np.ndarray):
        return "[" + ";".join(",".join(f"{v + 0.0:.10g}" for v in row) for row in np.atleast_2d(value)) + "]"
    return str(value)


def _emit(out: TextIO, key: str, value) -> None:
    out.write(f"{key}={_fmt(value)}\n")


def _emit_config(out: TextIO, cfg: ToolConfig) -> None:
    for key, value in cfg.items():
        out.write(f"config.{key}={value}\n")


def _controller(cfg: ToolConfig):
    G = static_gain_matrix(cfg.limb).matrix
    factors = svd_2x2(G)
    nominal = build_nominal_controller(factors, cfg.gains)
    return G, factors, nominal, hanus_condition(nominal)


def cmd_limb_info(cfg: ToolConfig, args, out: TextIO) -> int:
    G, f, _, _ = _controller(cfg)
    _emit(out, "modulus_E", cfg.limb.modulus)
    _emit(out, "inertia_x", cfg.limb.inertia_x)
    _emit(out, "inertia_y", cfg.limb.inertia_y)
    _emit(out, "G", G)
    _emit(out, "U", f.U)
    _emit(out, "sigma", f.sigma[None, :])
    _emit(out, "V", f.V)
    _emit(out, "condition_number", f.sigma[0] / f.sigma[1])
    return 0


def cmd_synthesize(cfg: ToolConfig, args, out: TextIO) -> int:
    _, _, nominal, cc = _controller(cfg)
    for name in "ABCD":
        _emit(out, name, getattr(nominal.ss, name))
    _emit(out, "H", cc.H)
    _emit(out, "A_cond", cc.A_cond)
    _emit(out, "B_cond", cc.B_cond)
    _emit(out, "closed_loop_pole", closed_loop_pole(cfg.gains))
    return 0


def cmd_verify(cfg: ToolConfig, args, out: TextIO) -> int:
    G, _, _, cc = _controller(cfg)
    rep = verify_robust_stability(cc, G, args.with_dynamics, cfg.weight, backend=args.backend)
    for key, value in rep.as_dict().items():
        if key not in ("kp", "ki"):
            _emit(out, key, value)
    if args.with_dynamics:
        _emit(out, "beta_reference", REFERENCE_BETA_WITH_DYNAMICS)
    _emit(out, "verdict", "robustly stable" if rep.robustly_stable else "not certified")
    return 0


def cmd_sweep(cfg: ToolConfig, args, out: TextIO) -> int:
    G = static_gain_matrix(cfg.limb).matrix
    res = max_stable_gain(cfg.gains.ki, args.with_dynamics, cfg.weight, G, grid=args.grid, kp_max=args.kp_max, backend=args.backend)
    _emit(out, "with_dynamics", args.with_dynamics)
    _emit(out, "grid", args.grid)
    _emit(out, "max_kp", res.max_kp)
    _emit(out, "max_kp_bounded", res.bounded)
    _emit(out, "first_failure_kp", "none" if res.first_failure is None else res.first_failure)
    _emit(out, "max_kp_reference", REFERENCE_MAX_KP[args.with_dynamics])
    out.write("\nkp,beta\n")
    for kp, beta, _ in res.table:
        out.write(f"{kp:.10g},{beta:.10g}\n")
    return 0


def cmd_simulate(cfg: ToolConfig, args, out: TextIO) -> int:
    s = cfg.simulation
    G, _, _, cc = _controller(cfg)
    kind = s.trajectory
    if kind in ("step", "sequence", "hold-sequence"):
        traj = sim.make_trajectory(kind, math.radians(s.amplitude_deg), s.duration, s.dt)
    else:
        traj = sim.make_trajectory("waypoints", duration=s.duration, dt=s.dt, path=kind)
    plant = sim.build_truth_plant(G, s.lag_time_constant, s.mismatch_seed, cfg.weight)
    try:
        trace = sim.run_closed_loop(cc, plant, traj, s.dt, s.antiwindup, s.direction_scaling)
    except InstabilityError as exc:
        if args.out and exc.trace is not None:
            exc.trace.to_csv(args.out)
        raise
    summary = args.report
    trace.to_csv(args.out if args.out else out)
    yaw, pitch = sim.tracking_errors(trace, s.skip)
    _emit(summary, "rows", len(trace))
    _emit(summary, "yaw_mae_deg", yaw)
    _emit(summary, "pitch_mae_deg", pitch)
    _emit(summary, "peak_overshoot_deg", sim.peak_overshoot(trace))
    if kind == "step":
        final = np.degrees(np.abs(trace.reference[-1] - trace.output[-1]))
        _emit(summary, "final_error_pitch_deg", final[0])
        _emit(summary, "final_error_yaw_deg", final[1])
        _emit(summary, "final_error_reference_pitch_deg", REFERENCE_STEP_RESIDUAL_DEG["pitch"])
        _emit(summary, "final_error_reference_yaw_deg", REFERENCE_STEP_RESIDUAL_DEG["yaw"])
    if args.out:
        _emit(summary, "csv", args.out)
    return 0


def _positive(text: str) -> float:
    value = _float(text)
    if not value > 0:
        raise argparse.ArgumentTypeError(f"must be positive, got {text}")
    return value


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="configuration file")
    common.add_argument("--kp", type=float, default=argparse.SUPPRESS, help="proportional gain")
    common.add_argument("--ki", type=float, default=argparse.SUPPRESS, help="integral gain")

    parser = argparse.ArgumentParser(prog="softlimb", description="Decoupling PI control and robust stability analysis for a saturated two-axis soft limb.")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("limb-info", parents=[common], help="static gain and its SVD")
    p.set_defaults(func=cmd_limb_info)

    p = sub.add_parser("synthesize", parents=[common], help="nominal and conditioned controller matrices")
    p.set_defaults(func=cmd_synthesize)

    for name, func, help_text in (
        ("verify", cmd_verify, "robust stability report"),
        ("sweep-kp", cmd_sweep, "largest certified proportional gain"),
    ):
        p = sub.add_parser(name, parents=[common], help=help_text)
        p.add_argument("--with-dynamics", action="store_true", help="include the multiplicative dynamic uncertainty")
        p.add_argument("--backend", default="cvxpy", choices=("cvxpy", "spectral"), help="LMI solver")
        if name == "sweep-kp":
            p.add_argument("--grid", type=_positive, default=0.1, help="gain step (default 0.1)")
            p.add_argument("--kp-max", type=_positive, default=5.0, help="upper end of the scan (default 5)")
        p.set_defaults(func=func)

    p = sub.add_parser("simulate", parents=[common], help="closed-loop simulation to CSV")
    p.add_argument("--traj", dest="trajectory", default=argparse.SUPPRESS, help="step, sequence, or a waypoint CSV file")
    p.add_argument("--duration", type=_positive, default=argparse.SUPPRESS, help="seconds")
    p.add_argument("--dt", type=_positive, default=argparse.SUPPRESS, help="sample period in seconds")
    p.add_argument("--amplitude", dest="amplitude_deg", type=float, default=argparse.SUPPRESS, help="degrees")
    p.add_argument("--lag", dest="lag_time_constant", type=_optional(_float), default=argparse.SUPPRESS, help="actuator lag in seconds, or none")
    p.add_argument("--seed", dest="mismatch_seed", type=_optional(int), default=argparse.SUPPRESS, help="mismatch seed, or none")
    p.add_argument("--skip", type=float, default=argparse.SUPPRESS, help="seconds excluded from the error metric")
    p.add_argument("--no-antiwindup", dest="antiwindup", action="store_false", default=argparse.SUPPRESS)
    p.add_argument("--no-direction-scaling", dest="direction_scaling", action="store_false", default=argparse.SUPPRESS)
    p.add_argument("--out", help="CSV path (default: stdout, summary on stderr)")
    p.set_defaults(func=cmd_simulate)
    return parser


OVERRIDE_KEYS = ("kp", "ki", "trajectory", "duration", "dt", "amplitude_deg", "lag_time_constant", "mismatch_seed", "skip", "antiwindup", "direction_scaling")


def main(argv: Optional[Sequence[str]] = None, out: Optional[TextIO] = None) -> int:
    out = out or sys.stdout
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        cfg = parse_config(args.config) if args.config else ToolConfig()
        overrides = {k: getattr(args, k) for k in OVERRIDE_KEYS if hasattr(args, k)}
        cfg = with_overrides(cfg, **overrides)
        # a CSV on stdout must stay clean, so the report moves to stderr
        args.report = sys.stderr if args.command == "simulate" and not args.out else out
        _emit(args.report, "command", args.command)
        _emit_config(args.report, cfg)
        return args.func(cfg, args, out)
    except (DomainError, InstabilityError, OSError) as exc:
        sys.stderr.write(f"softlimb {args.command}: error: {exc}\n")
        return 1


if __name__ == "__main__":
    sys.exit(main())
