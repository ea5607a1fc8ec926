"""Small dense LTI state-space algebra.

Everything here is sized for a handful of states (the largest system in the
package has four), so plain dense linear algebra is used throughout.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np
import scipy.linalg
from scipy.optimize import minimize_scalar

from .errors import DomainError, UnstableSystemError

HURWITZ_MARGIN = 1e-9


@dataclass(frozen=True)
class StateSpaceModel:
    """``x' = A x + B u``, ``y = C x + D u``.

    ``dt`` is ``None`` for continuous time, otherwise the sample period of a
    discrete realization. ``n == 0`` is a static gain ``D``.
    """

    A: np.ndarray
    B: np.ndarray
    C: np.ndarray
    D: np.ndarray
    dt: Optional[float] = None

    def __post_init__(self):
        D = np.atleast_2d(np.asarray(self.D, dtype=float))
        p, m = D.shape
        A = np.asarray(self.A, dtype=float)
        A = np.atleast_2d(A) if A.size else np.zeros((0, 0))
        n = A.shape[0]
        B = np.asarray(self.B, dtype=float).reshape(n, m)
        C = np.asarray(self.C, dtype=float).reshape(p, n)
        if A.shape != (n, n):
            raise DomainError(f"A must be square, got {A.shape}")
        for name, arr in (("A", A), ("B", B), ("C", C), ("D", D)):
            if not np.all(np.isfinite(arr)):
                raise DomainError(f"{name} has non-finite entries")
            arr.setflags(write=False)
        if self.dt is not None and not self.dt > 0:
            raise DomainError(f"sample period must be positive, got {self.dt!r}")
        object.__setattr__(self, "A", A)
        object.__setattr__(self, "B", B)
        object.__setattr__(self, "C", C)
        object.__setattr__(self, "D", D)

    @property
    def n(self) -> int:
        return self.A.shape[0]

    @property
    def m(self) -> int:
        return self.D.shape[1]

    @property
    def p(self) -> int:
        return self.D.shape[0]

    @classmethod
    def static(cls, D) -> "StateSpaceModel":
        D = np.atleast_2d(np.asarray(D, dtype=float))
        return cls(np.zeros((0, 0)), np.zeros((0, D.shape[1])), np.zeros((D.shape[0], 0)), D)

    def poles(self) -> np.ndarray:
        return np.linalg.eigvals(self.A) if self.n else np.zeros(0, dtype=complex)


@dataclass(frozen=True)
class UncertaintyWeight:
    """First-order multiplicative uncertainty weight ``(tau s + r0) / ((tau / r_inf) s + 1)``."""

    r0: float = 0.1
    r_inf: float = 1.5
    tau: float = 0.1

    def __post_init__(self):
        if not (0 < self.r0 < self.r_inf):
            raise DomainError(f"weight needs 0 < r0 < r_inf, got r0={self.r0!r}, r_inf={self.r_inf!r}")
        if not self.tau > 0:
            raise DomainError(f"weight time constant must be positive, got {self.tau!r}")

    def __call__(self, s):
        return (self.tau * s + self.r0) / (self.tau / self.r_inf * s + 1.0)


def freq_response(sys: StateSpaceModel, omega: float) -> np.ndarray:
    """Complex gain ``C (zI - A)^-1 B + D`` at ``z = j omega`` (or ``exp(j omega dt)`` if discrete)."""
    if sys.n == 0:
        return sys.D.astype(complex)
    z = np.exp(1j * omega * sys.dt) if sys.dt is not None else 1j * omega
    resolvent = z * np.eye(sys.n) - sys.A
    try:
        X = np.linalg.solve(resolvent, sys.B)
    except np.linalg.LinAlgError as exc:
        raise DomainError(f"resolvent is singular at omega={omega!r}") from exc
    if np.linalg.cond(resolvent) > 1e14:
        raise DomainError(f"resolvent is singular at omega={omega!r}")
    return sys.C @ X + sys.D


def sigma_max(sys: StateSpaceModel, omega: float) -> float:
    return float(np.linalg.norm(freq_response(sys, omega), 2))


def is_hurwitz(A, margin: float = HURWITZ_MARGIN) -> bool:
    """True iff every eigenvalue of ``A`` has real part below ``-margin``."""
    A = np.atleast_2d(np.asarray(A, dtype=float)) if np.size(A) else np.zeros((0, 0))
    if A.shape[0] != A.shape[1]:
        raise DomainError(f"A must be square, got {A.shape}")
    if A.size == 0:
        return True
    return bool(np.max(np.linalg.eigvals(A).real) < -margin)


def _hamiltonian(sys: StateSpaceModel, gamma: float) -> np.ndarray:
    A, B, C, D = sys.A, sys.B, sys.C, sys.D
    R = gamma**2 * np.eye(sys.m) - D.T @ D
    Rinv = np.linalg.inv(R)
    Ah = A + B @ Rinv @ D.T @ C
    return np.block([
        [Ah, B @ Rinv @ B.T],
        [-C.T @ (np.eye(sys.p) + D @ Rinv @ D.T) @ C, -Ah.T],
    ])


def _crossings(sys: StateSpaceModel, gamma: float) -> np.ndarray:
    """Nonnegative frequencies where some singular value of ``G(jw)`` equals ``gamma``."""
    eig = np.linalg.eigvals(_hamiltonian(sys, gamma))
    scale = max(1.0, float(np.max(np.abs(eig))) if eig.size else 1.0)
    on_axis = eig[np.abs(eig.real) < 1e-8 * scale]
    return np.unique(np.round(np.abs(on_axis.imag), 12))


def hinf_norm(sys: StateSpaceModel, tol: float = 1e-9) -> float:
    """H-infinity norm of a stable continuous-time system.

    Level-set iteration on the Hamiltonian: at a trial level ``gamma`` the
    imaginary-axis eigenvalues are the frequencies where a singular value
    crosses ``gamma``. Evaluating the response at and between crossings lifts
    the lower bound; a level with no crossing is an upper bound, after which
    the bracket is bisected. The result is within relative ``tol`` of the
    true supremum.
    """
    if sys.dt is not None:
        raise DomainError("hinf_norm expects a continuous-time system")
    if not is_hurwitz(sys.A):
        raise UnstableSystemError("system is not stable; H-infinity norm is infinite")
    lb = float(np.linalg.norm(sys.D, 2))
    if sys.n == 0:
        return lb
    probe = [0.0]
    poles = sys.poles()
    probe += [abs(p) for p in poles] + [abs(p.imag) for p in poles if abs(p.imag) > 0]
    lb = max([lb] + [sigma_max(sys, w) for w in probe])
    if lb == 0.0:
        return 0.0
    ub = np.inf
    for _ in range(200):
        if ub <= lb * (1 + 2 * tol):
            break
        # just above the current lower bound until an upper bound exists, then bisect
        gamma = lb * (1 + 2 * tol) if not np.isfinite(ub) else 0.5 * (lb + ub)
        w = _crossings(sys, gamma)
        if w.size == 0:
            ub = gamma
            continue
        edges = np.concatenate([[0.0], w, [2 * w[-1] + 1.0]])
        mids = 0.5 * (edges[:-1] + edges[1:])
        lifted = max(sigma_max(sys, x) for x in np.concatenate([w, mids]))
        if lifted >= gamma:
            lb = lifted
        else:
            # crossings produced by eigenvalue noise only
            ub = gamma
    return float(lb)


def hinf_norm_grid(sys: StateSpaceModel, w_min: float = 1e-3, w_max: float = 1e5, n_points: int = 2000) -> float:
    """Brute-force H-infinity norm: dense log grid plus local refinement of the best points.

    Independent of the Hamiltonian machinery; used to cross-check ``hinf_norm``.
    """
    if not is_hurwitz(sys.A):
        raise UnstableSystemError("system is not stable; H-infinity norm is infinite")
    best = float(np.linalg.norm(sys.D, 2))
    if sys.n == 0:
        return best
    grid = np.logspace(np.log10(w_min), np.log10(w_max), n_points)
    vals = np.array([sigma_max(sys, w) for w in grid])
    best = max(best, sigma_max(sys, 0.0), float(vals.max()))
    step = np.log(grid[1] / grid[0])
    for i in np.argsort(vals)[-3:]:
        res = minimize_scalar(
            lambda lw: -sigma_max(sys, np.exp(lw)),
            bounds=(np.log(grid[i]) - step, np.log(grid[i]) + step),
            method="bounded",
            options={"xatol": 1e-10},
        )
        best = max(best, -float(res.fun))
    return best


def realize_weight(w: UncertaintyWeight) -> StateSpaceModel:
    """One-state realization of the weight: DC gain ``r0``, high-frequency gain ``r_inf``."""
    pole = w.r_inf / w.tau
    # w(s) = r_inf + (r0 - r_inf) * pole / (s + pole)
    return StateSpaceModel([[-pole]], [[1.0]], [[(w.r0 - w.r_inf) * pole]], [[w.r_inf]])


def similarity_scale(sys: StateSpaceModel, W) -> StateSpaceModel:
    """Realization of ``W G(s) W^-1``."""
    W = np.atleast_2d(np.asarray(W, dtype=float))
    if sys.p != sys.m:
        raise DomainError("similarity scaling needs a square system")
    if W.shape != (sys.p, sys.p):
        raise DomainError(f"scaling must be {sys.p}x{sys.p}, got {W.shape}")
    if np.linalg.cond(W) > 1e12:
        raise DomainError("scaling matrix is singular")
    Winv = np.linalg.inv(W)
    return StateSpaceModel(sys.A, sys.B @ Winv, W @ sys.C, W @ sys.D @ Winv, sys.dt)


def discretize(sys: StateSpaceModel, dt: float) -> StateSpaceModel:
    """Zero-order-hold equivalent, from the exponential of ``[[A, B], [0, 0]] dt``."""
    if not dt > 0:
        raise DomainError(f"dt must be positive, got {dt!r}")
    n, m = sys.n, sys.m
    M = np.zeros((n + m, n + m))
    M[:n, :n] = sys.A
    M[:n, n:] = sys.B
    E = scipy.linalg.expm(M * dt)
    return StateSpaceModel(E[:n, :n], E[:n, n:], sys.C, sys.D, dt)


def series(first: StateSpaceModel, second: StateSpaceModel) -> StateSpaceModel:
    """``second(first(u))``."""
    if first.p != second.m:
        raise DomainError(f"cannot cascade {first.p} outputs into {second.m} inputs")
    n1, n2 = first.n, second.n
    A = np.block([[first.A, np.zeros((n1, n2))], [second.B @ first.C, second.A]])
    B = np.vstack([first.B, second.B @ first.D])
    C = np.hstack([second.D @ first.C, second.C])
    return StateSpaceModel(A, B, C, second.D @ first.D)


def parallel(a: StateSpaceModel, b: StateSpaceModel) -> StateSpaceModel:
    """Sum of two systems driven by the same input."""
    if (a.p, a.m) != (b.p, b.m):
        raise DomainError("parallel connection needs matching dimensions")
    return StateSpaceModel(
        scipy.linalg.block_diag(a.A, b.A),
        np.vstack([a.B, b.B]),
        np.hstack([a.C, b.C]),
        a.D + b.D,
    )


def append(*systems: StateSpaceModel) -> StateSpaceModel:
    """Block-diagonal stacking of independent channels."""
    return StateSpaceModel(
        scipy.linalg.block_diag(*[s.A for s in systems]),
        scipy.linalg.block_diag(*[s.B for s in systems]),
        scipy.linalg.block_diag(*[s.C for s in systems]),
        scipy.linalg.block_diag(*[s.D for s in systems]),
    )
