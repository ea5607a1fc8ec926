"""Cone-bounded multiplier LMI and its solvers.

For ``M11 = (A, B, C, D)`` the search is over symmetric ``Q > 0``, a
structured symmetric scaling ``W`` and ``delta > 0`` with::

    [[A'Q + QA,    QB - C'W             ],
     [B'Q - WC,    delta I - 2W - WD - D'W]]  <=  0

Every solver result is re-checked by an eigenvalue test of the assembled
block before a certificate is declared feasible.
"""
from __future__ import annotations

import logging
import warnings
from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np
import scipy.linalg
from scipy.optimize import minimize

from .errors import DomainError
from .lti import StateSpaceModel

log = logging.getLogger(__name__)

FEASIBILITY_TOL = 1e-8
Q_FLOOR = 1e-9
DELTA_FLOOR = 1e-9


@dataclass(frozen=True)
class ScalingBlock:
    """One diagonal block of ``W``: ``structure`` is ``full``, ``diagonal`` or ``scalar-identity``."""

    size: int
    structure: str

    def __post_init__(self):
        if self.structure not in ("full", "diagonal", "scalar-identity"):
            raise DomainError(f"unknown scaling structure {self.structure!r}")
        if self.size < 1:
            raise DomainError("scaling block size must be positive")

    def n_params(self, symmetric: bool) -> int:
        k = self.size
        if self.structure == "full":
            return k * (k + 1) // 2 if symmetric else k * k
        return k if self.structure == "diagonal" else 1

    def build(self, theta, symmetric: bool, positive: bool = False) -> np.ndarray:
        k = self.size
        theta = np.asarray(theta, dtype=float)
        if self.structure == "full":
            if symmetric:
                M = np.zeros((k, k))
                M[np.triu_indices(k)] = theta
                return M + np.triu(M, 1).T
            return theta.reshape(k, k)
        values = np.exp(theta) if positive else theta
        if self.structure == "diagonal":
            return np.diag(values)
        return values[0] * np.eye(k)

    def extract(self, W: np.ndarray, symmetric: bool, positive: bool = False) -> np.ndarray:
        """Inverse of ``build`` for a matrix already in this class."""
        if self.structure == "full":
            return W[np.triu_indices(self.size)] if symmetric else W.ravel().copy()
        values = np.diag(W) if self.structure == "diagonal" else W[:1, 0]
        return np.log(np.abs(values)) if positive else values.copy()


def assemble_scaling(blocks: Sequence[ScalingBlock], theta, symmetric: bool, positive: bool = False) -> np.ndarray:
    parts, i = [], 0
    for b in blocks:
        j = i + b.n_params(symmetric)
        parts.append(b.build(theta[i:j], symmetric, positive))
        i = j
    return scipy.linalg.block_diag(*parts)


def split_scaling(blocks: Sequence[ScalingBlock], W: np.ndarray, symmetric: bool, positive: bool = False) -> np.ndarray:
    out, i = [], 0
    for b in blocks:
        out.append(b.extract(W[i:i + b.size, i:i + b.size], symmetric, positive))
        i += b.size
    return np.concatenate(out)


@dataclass(frozen=True)
class LmiCertificate:
    Q: np.ndarray
    W: np.ndarray
    delta: float
    residual: float
    q_min_eig: float
    feasible: bool
    backend: str = ""
    message: str = ""


def cone_lmi_matrix(M11: StateSpaceModel, Q, W, delta: float) -> np.ndarray:
    """The multiplier block matrix for given ``(Q, W, delta)``."""
    A, B, C, D = M11.A, M11.B, M11.C, M11.D
    m = M11.m
    return np.block([
        [A.T @ Q + Q @ A, Q @ B - C.T @ W],
        [B.T @ Q - W @ C, delta * np.eye(m) - 2 * W - W @ D - D.T @ W],
    ])


def check_certificate(M11: StateSpaceModel, Q, W, delta, eps: float = FEASIBILITY_TOL, backend: str = "", message: str = "") -> LmiCertificate:
    """Independent plug-back test: largest eigenvalue of the block, ``Q`` and ``delta`` floors."""
    Q = 0.5 * (np.asarray(Q, dtype=float) + np.asarray(Q, dtype=float).T)
    W = np.asarray(W, dtype=float)
    X = cone_lmi_matrix(M11, Q, W, float(delta))
    residual = float(np.max(np.linalg.eigvalsh(0.5 * (X + X.T))))
    q_min = float(np.min(np.linalg.eigvalsh(Q))) if Q.size else np.inf
    feasible = (
        residual <= eps
        and q_min >= Q_FLOOR
        and delta >= DELTA_FLOOR
        and np.linalg.cond(W) < 1e12
    )
    return LmiCertificate(Q, W, float(delta), residual, q_min, bool(feasible), backend, message)


def _cvxpy_backend(M11: StateSpaceModel, blocks: Sequence[ScalingBlock]):
    import cvxpy as cp

    n, m = M11.n, M11.m
    A, B, C, D = M11.A, M11.B, M11.C, M11.D
    Q = cp.Variable((n, n), symmetric=True)
    parts = []
    for b in blocks:
        if b.structure == "full":
            parts.append(cp.Variable((b.size, b.size), symmetric=True))
        elif b.structure == "diagonal":
            parts.append(cp.diag(cp.Variable(b.size)))
        else:
            parts.append(cp.Variable() * np.eye(b.size))
    if len(parts) == 1:
        W = parts[0]
    else:
        rows = []
        for i, bi in enumerate(blocks):
            rows.append([parts[i] if i == j else np.zeros((bi.size, bj.size)) for j, bj in enumerate(blocks)])
        W = cp.bmat(rows)
    delta = cp.Variable()
    t = cp.Variable()
    X = cp.bmat([
        [A.T @ Q + Q @ A, Q @ B - C.T @ W],
        [B.T @ Q - W @ C, delta * np.eye(m) - 2 * W - W @ D - D.T @ W],
    ])
    X = 0.5 * (X + X.T)
    # homogeneous in (Q, W, delta): box the variables so the margin t is bounded
    cons = [
        X << t * np.eye(n + m),
        Q >> 1e-6 * np.eye(n),
        Q << np.eye(n),
        W << np.eye(m),
        W >> -np.eye(m),
        delta >= 1e-6,
        delta <= 1.0,
    ]
    prob = cp.Problem(cp.Minimize(t), cons)
    message = ""
    for solver in ("CLARABEL", "SCS"):
        if solver not in cp.installed_solvers():
            continue
        try:
            with warnings.catch_warnings():
                warnings.simplefilter("ignore")
                prob.solve(solver=solver)
        except cp.error.SolverError as exc:
            message = f"{solver}: {exc}"
            continue
        if Q.value is not None:
            message = f"{solver}: {prob.status}, margin {t.value:.3e}"
            break
    if Q.value is None:
        raise RuntimeError(message or "no SDP solver available")
    Wv = np.asarray(W.value if hasattr(W, "value") else W, dtype=float)
    return np.asarray(Q.value), 0.5 * (Wv + Wv.T), float(delta.value), message


def _affine_lmi(M11: StateSpaceModel, blocks: Sequence[ScalingBlock], q_floor: float):
    """Basis of the affine map ``theta -> diag(LMI block, q_floor I - Q)`` and box bounds on ``theta``."""
    n, m = M11.n, M11.m
    zn, zm = np.zeros((n, n)), np.zeros((m, m))
    mats, bounds = [], []
    for i, j in zip(*np.triu_indices(n)):
        E = np.zeros((n, n))
        E[i, j] = E[j, i] = 1.0
        mats.append(scipy.linalg.block_diag(cone_lmi_matrix(M11, E, zm, 0.0), -E))
        bounds.append((-1.0, 1.0))
    nw = sum(b.n_params(True) for b in blocks)
    for k in range(nw):
        Wk = assemble_scaling(blocks, np.eye(nw)[k], symmetric=True)
        mats.append(scipy.linalg.block_diag(cone_lmi_matrix(M11, zn, Wk, 0.0), zn))
        bounds.append((-1.0, 1.0))
    mats.append(scipy.linalg.block_diag(cone_lmi_matrix(M11, zn, zm, 1.0), zn))
    bounds.append((1e-6, 1.0))
    base = scipy.linalg.block_diag(np.zeros((n + m, n + m)), q_floor * np.eye(n))
    return base, np.array(mats), bounds


def _spectral_backend(M11: StateSpaceModel, blocks: Sequence[ScalingBlock], q_floor: float = 1e-6):
    """Minimize a smoothed largest eigenvalue of the LMI block over a box.

    The block is affine in ``(Q, W, delta)`` so its largest eigenvalue is
    convex; the log-sum-exp smoothing keeps it convex and differentiable,
    and the temperature is raised in stages. ``Q >= q_floor I`` enters as
    an extra diagonal block of the same eigenvalue problem.
    """
    n = M11.n
    base, mats, bounds = _affine_lmi(M11, blocks, q_floor)
    nq = n * (n + 1) // 2

    def objective(theta, temp):
        X = base + np.tensordot(theta, mats, axes=1)
        lam, vec = np.linalg.eigh(X)
        top = lam[-1]
        p = np.exp(temp * (lam - top))
        total = p.sum()
        P = (vec * (p / total)) @ vec.T
        return top + np.log(total) / temp, np.tensordot(mats, P, axes=([1, 2], [0, 1]))

    theta = np.zeros(len(bounds))
    diag = [k for k, (i, j) in enumerate(zip(*np.triu_indices(n))) if i == j]
    theta[diag] = 0.5
    theta[nq:-1] = split_scaling(blocks, np.eye(M11.m), symmetric=True)
    theta[-1] = 1e-3
    for temp in (10.0, 100.0, 1e3, 1e4, 1e5):
        theta = minimize(objective, theta, args=(temp,), jac=True, method="L-BFGS-B", bounds=bounds,
                         options={"maxiter": 2000, "ftol": 1e-15, "gtol": 1e-12}).x
    Q = np.zeros((n, n))
    Q[np.triu_indices(n)] = theta[:nq]
    Q = Q + np.triu(Q, 1).T
    W = assemble_scaling(blocks, theta[nq:-1], symmetric=True)
    top = float(np.max(np.linalg.eigvalsh(base + np.tensordot(theta, mats, axes=1))))
    return Q, W, float(theta[-1]), f"smoothed spectral search, margin {top:.3e}"


BACKENDS: dict[str, Callable] = {
    "cvxpy": _cvxpy_backend,
    "spectral": _spectral_backend,
}


def solve_cone_lmi(M11: StateSpaceModel, blocks: Sequence[ScalingBlock], eps: float = FEASIBILITY_TOL, backend: str = "cvxpy") -> LmiCertificate:
    """Search ``(Q, W, delta)`` for the multiplier LMI and return the best certificate found.

    ``blocks`` gives the structure of ``W`` block by block. The ``feasible``
    flag comes only from :func:`check_certificate`; a solver failure yields an
    infeasible certificate with the solver message attached.
    """
    if M11.p != M11.m or sum(b.size for b in blocks) != M11.m:
        raise DomainError("scaling structure does not match the channel dimension of M11")
    try:
        solve = BACKENDS[backend]
    except KeyError:
        raise DomainError(f"unknown LMI backend {backend!r}; available: {sorted(BACKENDS)}") from None
    try:
        Q, W, delta, message = solve(M11, blocks)
    except Exception as exc:  # solver breakdown is a diagnostic, never a pass
        log.warning("LMI backend %s failed: %s", backend, exc)
        n, m = M11.n, M11.m
        return LmiCertificate(np.eye(n), np.eye(m), 0.0, np.inf, 1.0, False, backend, str(exc))
    return check_certificate(M11, Q, W, delta, eps, backend, message)
