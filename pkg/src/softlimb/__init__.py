"""Decoupling PI control of a saturated two-axis soft limb.

Static beam model -> SVD-decoupling PI controller -> Hanus anti-windup ->
cone-bounded robust stability certificate -> closed-loop simulation.
"""
from .antiwindup import ConditionedController, ControllerState, actuator, controller_step, hanus_condition, preserve_direction, saturate
from .config import ToolConfig, parse_config
from .errors import ConfigError, DomainError, InstabilityError, InterconnectionError, UnstableSystemError
from .lmi import LmiCertificate, ScalingBlock, check_certificate, solve_cone_lmi
from .lti import StateSpaceModel, UncertaintyWeight, discretize, freq_response, hinf_norm, is_hurwitz, realize_weight, similarity_scale
from .model import LimbParams, StaticGain, bend_angle, static_gain_matrix
from .robustness import (
    DeltaStructure,
    InterconnectionM,
    RobustnessReport,
    build_m_mixed,
    build_m_sat,
    compute_beta,
    conditioned_controller,
    max_stable_gain,
    verify_robust_stability,
)
from .sim import SimTrace, Trajectory, TruthPlant, build_truth_plant, make_trajectory, run_closed_loop, tracking_errors
from .synthesis import NominalController, PiGains, SvdFactors, build_nominal_controller, svd_2x2

__version__ = "0.1.0"
