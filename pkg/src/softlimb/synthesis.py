"""SVD-decoupling PI controller.

With ``G = U S V^T`` the controller ``K(s) = V l(s) S^-1 U^T``, where
``l(s) = kp (1 + ki / s)``, makes the loop ``G K = l(s) I`` so both singular
directions are driven by identical scalar loops.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DomainError
from .lti import StateSpaceModel

NEAR_SINGULAR_RATIO = 1e-9


@dataclass(frozen=True)
class PiGains:
    kp: float
    ki: float

    def __post_init__(self):
        if not (np.isfinite(self.kp) and self.kp > 0):
            raise DomainError(f"kp must be positive, got {self.kp!r}")
        if not (np.isfinite(self.ki) and self.ki > 0):
            raise DomainError(f"ki must be positive, got {self.ki!r}")


@dataclass(frozen=True)
class SvdFactors:
    """``G = U @ diag(sigma) @ V.T`` with ``sigma`` descending."""

    U: np.ndarray
    sigma: np.ndarray
    V: np.ndarray

    @property
    def Sigma(self) -> np.ndarray:
        return np.diag(self.sigma)

    def reconstruct(self) -> np.ndarray:
        return self.U @ self.Sigma @ self.V.T


@dataclass(frozen=True)
class NominalController:
    ss: StateSpaceModel
    factors: SvdFactors
    gains: PiGains

    def transfer(self, s: complex) -> np.ndarray:
        """``K(s) = V diag(l(s)) S^-1 U^T`` evaluated directly from the factors."""
        f, g = self.factors, self.gains
        return g.kp * (1 + g.ki / s) * f.V @ np.diag(1 / f.sigma) @ f.U.T


def svd_2x2(G) -> SvdFactors:
    """Singular value decomposition with a deterministic sign convention.

    Each column pair ``(u_j, v_j)`` is flipped so that ``U[j, j] >= 0``; when
    the diagonal entry vanishes (permuted axes) the largest entry of ``u_j`` is
    made positive instead. Equal singular values take ``U = I``.

    Raises
    ------
    DomainError
        If ``sigma_2 < 1e-9 sigma_1``; decoupling would divide by ~0.
    """
    G = np.asarray(G, dtype=float)
    if G.shape != (2, 2) or not np.all(np.isfinite(G)):
        raise DomainError("expected a finite 2x2 gain")
    U, s, Vt = np.linalg.svd(G)
    if s[0] == 0 or s[1] < NEAR_SINGULAR_RATIO * s[0]:
        raise DomainError(f"plant gain is near singular (singular values {s[0]:.3e}, {s[1]:.3e})")
    if s[0] - s[1] <= 1e-12 * s[0]:
        U = np.eye(2)
        V = G.T / s[0]
        return SvdFactors(U, np.array([s[0], s[0]]), V)
    V = Vt.T.copy()
    rows = np.linalg.norm(G, axis=1)
    if abs(G[0] @ G[1]) <= 1e-15 * rows[0] * rows[1]:
        # orthogonal rows (the beam structure): G G^T is diagonal, so U is an exact permutation
        order = np.argsort(-rows, kind="stable")
        U = np.eye(2)[:, order]
        s = rows[order]
        V = G.T @ U / s
    for j in range(2):
        pivot = U[j, j] if abs(U[j, j]) > 1e-14 else U[np.argmax(np.abs(U[:, j])), j]
        if pivot < 0:
            U[:, j] *= -1
            V[:, j] *= -1
    return SvdFactors(U, s, V)


def build_nominal_controller(f: SvdFactors, g: PiGains) -> NominalController:
    """State-space form of the decoupling PI controller.

    One integrator per singular channel, ``x' = ki e_s``, ``u_s = kp (x + e_s)``
    with ``e_s = S^-1 U^T e``; mapped back through ``V``::

        A = 0,  B = ki S^-1 U^T,  C = kp V,  D = kp V S^-1 U^T
    """
    if np.min(f.sigma) <= 0:
        raise DomainError("singular values must be positive to invert Sigma")
    Sinv_Ut = np.diag(1.0 / f.sigma) @ f.U.T
    ss = StateSpaceModel(
        np.zeros((2, 2)),
        g.ki * Sinv_Ut,
        g.kp * f.V,
        g.kp * f.V @ Sinv_Ut,
    )
    return NominalController(ss, f, g)


def dc_decoupling_matrix(f: SvdFactors, G) -> np.ndarray:
    """``U^T G V S^-1``; the identity whenever the factors belong to ``G``."""
    return f.U.T @ np.asarray(G, dtype=float) @ f.V @ np.diag(1.0 / f.sigma)


def closed_loop_pole(g: PiGains) -> float:
    """Double pole ``-kp ki / (1 + kp)`` of the unsaturated loop around a static plant."""
    return -g.kp * g.ki / (1.0 + g.kp)
