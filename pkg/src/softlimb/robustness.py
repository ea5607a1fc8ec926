"""Robust stability of the saturated loop via an M-Delta interconnection.

The actuator nonlinearity (direction scaling followed by the clamp) is
pulled out of the loop. With direction scaling it acts as ``u_a = s(u) u``
for a scalar ``s`` in (0, 1], so the removed part is a scalar-times-identity
operator lying in the sector [0, 1]. Two normalizations of that sector are
supported:

``"centered"`` (default)
    ``u_a = q/2 - p/2`` with ``p`` in the cone of center 0, radius 1. This is
    the tightest cone containing the sector and the one used for verdicts.
``"deadzone"``
    ``u_a = q - p`` with ``p`` the dead-zone output. ``p = 0`` recovers the
    unsaturated linear loop, which makes it the natural form for checking
    closed-form pole locations.

Unmodeled dynamics enter as a multiplicative perturbation at the plant
input, ``y = G (u_a + w(s) p_dyn)`` with ``q_dyn = u_a``.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np
from scipy.optimize import minimize

from .antiwindup import ConditionedController, hanus_condition
from .errors import DomainError, InterconnectionError
from .lmi import LmiCertificate, ScalingBlock, assemble_scaling, solve_cone_lmi, split_scaling
from .lti import StateSpaceModel, UncertaintyWeight, append, hinf_norm, is_hurwitz, realize_weight, similarity_scale
from .synthesis import PiGains, build_nominal_controller, svd_2x2

# a verdict must clear 1 by more than rounding
BETA_MARGIN = 1e-6
SECTORS = {"centered": (0.5, 0.5), "deadzone": (1.0, 1.0)}
DUAL_SCALING = {"scalar-identity": "full", "diagonal": "diagonal", "full": "scalar-identity"}


@dataclass(frozen=True)
class DeltaBlock:
    """One block of the perturbation.

    ``form`` is the structure of the perturbation itself; ``scaling`` is the
    compatible commuting scaling structure and is derived from it.
    """

    kind: str
    size: int
    form: str

    def __post_init__(self):
        if self.kind not in ("cone-nonlinear", "lti"):
            raise DomainError(f"unknown block kind {self.kind!r}")
        if self.form not in DUAL_SCALING:
            raise DomainError(f"unknown block form {self.form!r}")

    @property
    def scaling(self) -> str:
        return DUAL_SCALING[self.form]

    def scaling_block(self) -> ScalingBlock:
        return ScalingBlock(self.size, self.scaling)


@dataclass(frozen=True)
class DeltaStructure:
    blocks: tuple[DeltaBlock, ...]

    @property
    def size(self) -> int:
        return sum(b.size for b in self.blocks)

    def scaling_blocks(self) -> list[ScalingBlock]:
        return [b.scaling_block() for b in self.blocks]


SAT_BLOCK = DeltaBlock("cone-nonlinear", 2, "scalar-identity")
DYN_BLOCK = DeltaBlock("lti", 2, "full")


@dataclass(frozen=True)
class InterconnectionM:
    """``M11`` seen by the pulled-out perturbation, with the full loop state inside."""

    ss: StateSpaceModel
    structure: DeltaStructure
    sector: str = "centered"


@dataclass(frozen=True)
class RobustnessReport:
    gains: PiGains
    with_dynamics: bool
    m_stable: bool
    beta: float
    beta_identity: float
    robustly_stable: bool
    certificate: Optional[LmiCertificate] = None
    scaling: Optional[np.ndarray] = field(default=None, repr=False)
    sector: str = "centered"

    def as_dict(self) -> dict:
        c = self.certificate
        return {
            "kp": self.gains.kp,
            "ki": self.gains.ki,
            "with_dynamics": self.with_dynamics,
            "sector": self.sector,
            "m_stable": self.m_stable,
            "lmi_feasible": bool(c and c.feasible),
            "lmi_residual": c.residual if c else float("nan"),
            "lmi_delta": c.delta if c else float("nan"),
            "beta_identity_scaling": self.beta_identity,
            "beta": self.beta,
            "robustly_stable": self.robustly_stable,
        }


def _interconnect(cc: ConditionedController, G, weight: Optional[UncertaintyWeight], sector: str) -> StateSpaceModel:
    """Close the loop around ``r = 0`` and read off the map ``p -> q``.

    Unknowns are written as affine maps of ``xi = [x, x_w, p_sat, p_dyn]``.
    """
    try:
        alpha, rho = SECTORS[sector]
    except KeyError:
        raise DomainError(f"unknown sector normalization {sector!r}") from None
    G = np.asarray(G, dtype=float)
    ctrl = cc.ss
    nc, nu = ctrl.n, ctrl.m
    if weight is not None:
        wsys = append(*[realize_weight(weight)] * nu)
        Aw, Bw, Cw, Dw = wsys.A, wsys.B, wsys.C, wsys.D
    else:
        Aw, Bw, Cw, Dw = (np.zeros((0, 0)), np.zeros((0, 0)), np.zeros((nu, 0)), np.zeros((nu, 0)))
    nw, nd = Aw.shape[0], Bw.shape[1]
    width = nc + nw + nu + nd
    I = np.eye(nu)

    def pick(block, start, size):
        out = np.zeros((block.shape[0], width))
        out[:, start:start + size] = block
        return out

    x_sel = pick(np.eye(nc), 0, nc)
    xw_sel = pick(np.eye(nw), nc, nw)
    ps_sel = pick(I, nc + nw, nu)
    pd_sel = pick(np.eye(nd), nc + nw + nu, nd)

    DG = ctrl.D @ G
    loop = I + alpha * DG
    if np.linalg.cond(loop) > 1e12:
        raise InterconnectionError("algebraic loop I + D G is singular")
    q_sat = np.linalg.solve(loop, ctrl.C @ x_sel + rho * DG @ ps_sel - DG @ (Cw @ xw_sel + Dw @ pd_sel))
    u_a = alpha * q_sat - rho * ps_sel
    e = -G @ (u_a + Cw @ xw_sel + Dw @ pd_sel)
    x_dot = cc.A_cond @ x_sel + cc.B_cond @ e + cc.H @ u_a
    rows = [x_dot] + ([Aw @ xw_sel + Bw @ pd_sel] if nw else [])
    dyn = np.vstack(rows)
    out = np.vstack([q_sat, u_a]) if weight is not None else q_sat
    n = nc + nw
    return StateSpaceModel(dyn[:, :n], dyn[:, n:], out[:, :n], out[:, n:])


def build_m_sat(cc: ConditionedController, G, sector: str = "centered") -> InterconnectionM:
    """Interconnection with only the actuator nonlinearity pulled out (two controller states)."""
    return InterconnectionM(_interconnect(cc, G, None, sector), DeltaStructure((SAT_BLOCK,)), sector)


def build_m_mixed(cc: ConditionedController, G, w: UncertaintyWeight, sector: str = "centered") -> InterconnectionM:
    """Nonlinearity plus a full 2x2 multiplicative uncertainty weighted by ``w`` (four states)."""
    return InterconnectionM(_interconnect(cc, G, w, sector), DeltaStructure((SAT_BLOCK, DYN_BLOCK)), sector)


def _normalized(W: np.ndarray) -> np.ndarray:
    W = W / np.linalg.norm(W, 2)
    diag = np.diag(W)
    lead = diag[np.argmax(np.abs(diag))] if np.any(diag) else 1.0
    return W * np.sign(lead)


def compute_beta(M11: StateSpaceModel, W, structure: Optional[DeltaStructure] = None, refine: bool = True) -> float:
    """``|| W M11 W^-1 ||_inf``, locally minimized over the scaling class of ``structure``.

    Refinement starts from the supplied ``W`` and from the identity and keeps
    the smallest value seen, so the result never exceeds the value at ``W``
    or at ``I``. Without ``structure`` the plain scaled norm is returned.
    """
    W = np.atleast_2d(np.asarray(W, dtype=float))
    if np.linalg.cond(W) > 1e12:
        raise DomainError("scaling W is singular")
    beta = hinf_norm(similarity_scale(M11, W))
    if structure is None or not refine:
        return beta
    blocks = structure.scaling_blocks()
    best = min(beta, hinf_norm(M11))

    def objective(theta):
        Wt = assemble_scaling(blocks, theta, symmetric=False, positive=True)
        if np.linalg.cond(Wt) > 1e10:
            return np.inf
        return hinf_norm(similarity_scale(M11, Wt), tol=1e-10)

    starts = [np.eye(M11.m)]
    try:
        starts.insert(0, _normalized(W))
    except (ValueError, ZeroDivisionError):
        pass
    for W0 in starts:
        if not _in_class(W0, blocks):
            W0 = _project(W0, blocks)
        theta0 = split_scaling(blocks, W0, symmetric=False, positive=True)
        if theta0.size == 0 or not np.all(np.isfinite(theta0)):
            continue
        res = minimize(objective, theta0, method="Nelder-Mead", options={"xatol": 1e-7, "fatol": 1e-10, "maxiter": 2000})
        best = min(best, float(res.fun))
    return best


def _in_class(W: np.ndarray, blocks: Sequence[ScalingBlock]) -> bool:
    return np.allclose(W, _project(W, blocks), atol=1e-12)


def _project(W: np.ndarray, blocks: Sequence[ScalingBlock]) -> np.ndarray:
    """Nearest member of the block structure with positive diagonal/scalar parts."""
    out = np.zeros_like(W)
    i = 0
    for b in blocks:
        sl = slice(i, i + b.size)
        sub = W[sl, sl]
        if b.structure == "full":
            out[sl, sl] = sub
        elif b.structure == "diagonal":
            out[sl, sl] = np.diag(np.maximum(np.abs(np.diag(sub)), 1e-6))
        else:
            out[sl, sl] = max(abs(np.trace(sub)) / b.size, 1e-6) * np.eye(b.size)
        i += b.size
    return out


def conditioned_controller(G, gains: PiGains) -> ConditionedController:
    return hanus_condition(build_nominal_controller(svd_2x2(G), gains))


def verify_robust_stability(
    cc: ConditionedController,
    G,
    with_dynamics: bool = False,
    w: Optional[UncertaintyWeight] = None,
    sector: str = "centered",
    backend: str = "cvxpy",
) -> RobustnessReport:
    """Two-condition robust stability test.

    1. ``M`` is stable (Hurwitz loop matrix).
    2. The scaled norm ``inf_W || W M11 W^-1 ||_inf`` is below one; ``W``
       comes from the multiplier LMI and is then locally refined.
    """
    w = w or UncertaintyWeight()
    m = build_m_mixed(cc, G, w, sector) if with_dynamics else build_m_sat(cc, G, sector)
    gains = cc.nominal.gains
    m_stable = is_hurwitz(m.ss.A)
    if not m_stable:
        return RobustnessReport(gains, with_dynamics, False, np.inf, np.inf, False, None, None, sector)
    cert = solve_cone_lmi(m.ss, m.structure.scaling_blocks(), backend=backend)
    beta_identity = hinf_norm(m.ss)
    W = cert.W if cert.feasible else np.eye(m.ss.m)
    beta = compute_beta(m.ss, W, m.structure)
    return RobustnessReport(
        gains, with_dynamics, True, beta, beta_identity, bool(beta < 1.0 - BETA_MARGIN), cert, W, sector
    )


@dataclass(frozen=True)
class GainSearch:
    """Result of a proportional-gain scan; ``bounded`` is False when no failure was found up to ``kp_max``."""

    max_kp: float
    bounded: bool
    first_failure: Optional[float]
    table: tuple[tuple[float, float, bool], ...]


def max_stable_gain(
    ki: float,
    with_dynamics: bool,
    w: Optional[UncertaintyWeight],
    G,
    grid: float = 0.1,
    kp_max: float = 5.0,
    bisections: int = 6,
    sector: str = "centered",
    backend: str = "cvxpy",
) -> GainSearch:
    """Scan ``kp = grid, 2 grid, ...`` until the verdict flips, then bisect inside that step.

    Returns the largest passing gain below the first failure. The ``table``
    holds ``(kp, beta, robustly_stable)`` for every grid point evaluated.
    """
    if not grid > 0:
        raise DomainError(f"grid step must be positive, got {grid!r}")

    def check(kp):
        return verify_robust_stability(conditioned_controller(G, PiGains(kp, ki)), G, with_dynamics, w, sector, backend)

    table = []
    last_pass = None
    n_steps = int(np.floor(kp_max / grid + 1e-9))
    for i in range(1, n_steps + 1):
        kp = round(i * grid, 12)
        rep = check(kp)
        table.append((kp, rep.beta, rep.robustly_stable))
        if rep.robustly_stable:
            last_pass = kp
            continue
        if last_pass is None:
            raise DomainError(f"no robustly stable gain at the smallest step kp={kp}")
        lo, hi = last_pass, kp
        for _ in range(bisections):
            mid = 0.5 * (lo + hi)
            if check(mid).robustly_stable:
                lo = mid
            else:
                hi = mid
        return GainSearch(lo, True, hi, tuple(table))
    if last_pass is None:
        raise DomainError("gain grid is empty")
    return GainSearch(last_pass, False, None, tuple(table))


def sweep_beta(kps: Sequence[float], ki: float, G, with_dynamics: bool = False, w: Optional[UncertaintyWeight] = None, sector: str = "centered", backend: str = "cvxpy") -> list[RobustnessReport]:
    return [
        verify_robust_stability(conditioned_controller(G, PiGains(kp, ki)), G, with_dynamics, w, sector, backend)
        for kp in kps
    ]
