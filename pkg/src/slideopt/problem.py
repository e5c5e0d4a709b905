"""Optimization-instance definition and first/second-order optimality checks.

A ProblemSpec bundles the objective, equality constraints and whatever
derivatives are available analytically; missing derivatives fall back to
central differences. All other modules consume instances only through
this interface.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Optional, Sequence

import numpy as np
import scipy.linalg

from . import numerics


@dataclass(frozen=True)
class ProblemSpec:
    """One equality-constrained instance: min phi(x) s.t. h(x) = 0.

    Callables must be reentrant; the spec itself is immutable and safe to
    share across workers. ``gradient``, ``jacobian`` and the Hessians are
    optional; finite differences of the level below are used when absent.

    ``constant_jacobian``/``linear_constraints`` are performance and
    exactness hints for the simulation engine (linear h means the
    constraint Hessians and the Jacobian time derivative vanish).
    """

    dim_x: int
    dim_h: int
    objective: Callable[[np.ndarray], float]
    constraints: Callable[[np.ndarray], np.ndarray]
    gradient: Optional[Callable[[np.ndarray], np.ndarray]] = None
    jacobian: Optional[Callable[[np.ndarray], np.ndarray]] = None
    hessian_phi: Optional[Callable[[np.ndarray], np.ndarray]] = None
    hessian_h: Optional[Callable[[np.ndarray], Sequence[np.ndarray]]] = None
    strong_convexity: Optional[float] = None
    name: str = ""
    linear_constraints: bool = False
    constant_jacobian: bool = False
    fd_step: float = numerics.DEFAULT_FD_STEP

    def __post_init__(self):
        if self.dim_x < 1 or self.dim_h < 1:
            raise ValueError("dim_x and dim_h must be positive")
        if self.strong_convexity is not None and self.strong_convexity <= 0:
            raise ValueError("strong_convexity must be positive when given")

    # -- evaluation helpers ------------------------------------------------

    def _check_x(self, x) -> np.ndarray:
        x = np.atleast_1d(np.asarray(x, dtype=float))
        if x.size != self.dim_x:
            raise ValueError(f"x has size {x.size}, expected {self.dim_x}")
        return x

    def value(self, x) -> float:
        return float(self.objective(self._check_x(x)))

    def grad(self, x) -> np.ndarray:
        x = self._check_x(x)
        if self.gradient is not None:
            g = np.atleast_1d(np.asarray(self.gradient(x), dtype=float))
        else:
            g = numerics.fd_gradient(self.objective, x, self.fd_step)
        if g.size != self.dim_x:
            raise ValueError(f"gradient has size {g.size}, expected {self.dim_x}")
        return g

    def h(self, x) -> np.ndarray:
        x = self._check_x(x)
        v = np.atleast_1d(np.asarray(self.constraints(x), dtype=float))
        if v.size != self.dim_h:
            raise ValueError(f"h has size {v.size}, expected {self.dim_h}")
        return v

    def jac(self, x) -> np.ndarray:
        x = self._check_x(x)
        if self.jacobian is not None:
            J = np.atleast_2d(np.asarray(self.jacobian(x), dtype=float))
        else:
            J = numerics.fd_jacobian(self.constraints, x, self.fd_step)
        if J.shape != (self.dim_h, self.dim_x):
            raise ValueError(f"jacobian has shape {J.shape}, expected "
                             f"{(self.dim_h, self.dim_x)}")
        return J

    def hess_objective(self, x) -> np.ndarray:
        x = self._check_x(x)
        if self.hessian_phi is not None:
            return np.atleast_2d(np.asarray(self.hessian_phi(x), dtype=float))
        return numerics.fd_jacobian(self.grad, x, self.fd_step)

    def constraint_hessians(self, x) -> list[np.ndarray]:
        """Hessians of each constraint component (zero list for linear h)."""
        x = self._check_x(x)
        if self.linear_constraints:
            return [np.zeros((self.dim_x, self.dim_x)) for _ in range(self.dim_h)]
        if self.hessian_h is not None:
            out = [np.atleast_2d(np.asarray(H, dtype=float)) for H in self.hessian_h(x)]
            if len(out) != self.dim_h:
                raise ValueError("hessian_h must return one matrix per constraint")
            return out
        return [numerics.fd_jacobian(lambda z, i=i: self.jac(z)[i], x, self.fd_step)
                for i in range(self.dim_h)]


@dataclass(frozen=True)
class KKTPoint:
    """A candidate stationary pair with its first-order residuals."""

    x_star: np.ndarray
    lambda_star: np.ndarray
    stationarity_residual: float
    feasibility_residual: float


def make_kkt_point(spec: ProblemSpec, x_star, lambda_star) -> KKTPoint:
    """Build a KKTPoint, evaluating both residual norms at (x*, lambda*)."""
    stat, feas = fonc_residuals(spec, x_star, lambda_star)
    return KKTPoint(np.asarray(x_star, dtype=float),
                    np.asarray(lambda_star, dtype=float), stat, feas)


def lagrangian(spec: ProblemSpec, x, lam) -> float:
    """L(x, lambda) = phi(x) + lambda^T h(x)."""
    lam = np.atleast_1d(np.asarray(lam, dtype=float))
    if lam.size != spec.dim_h:
        raise ValueError(f"lambda has size {lam.size}, expected {spec.dim_h}")
    return spec.value(x) + float(lam @ spec.h(x))


def fonc_residuals(spec: ProblemSpec, x, lam) -> tuple[float, float]:
    """Norms of the two first-order stationarity expressions.

    Returns (||grad phi + J_h^T lambda||_2, ||h(x)||_2); both vanish at a
    KKT point.
    """
    lam = np.atleast_1d(np.asarray(lam, dtype=float))
    if lam.size != spec.dim_h:
        raise ValueError(f"lambda has size {lam.size}, expected {spec.dim_h}")
    stat = spec.grad(x) + spec.jac(x).T @ lam
    return float(np.linalg.norm(stat)), float(np.linalg.norm(spec.h(x)))


def null_space_basis(J: np.ndarray, rcond: float = 1e-10) -> np.ndarray:
    """Orthonormal basis of ker(J) (columns); singular values below
    rcond * sigma_max count as zero."""
    J = np.atleast_2d(np.asarray(J, dtype=float))
    u, s, vt = np.linalg.svd(J)
    tol = rcond * (s[0] if s.size else 0.0)
    rank = int(np.sum(s > tol))
    return vt[rank:].T


def sonc_check(spec: ProblemSpec, x, lam, tol: float = 1e-8) -> bool:
    """Second-order necessary condition on the tangent space.

    True iff the Lagrangian Hessian restricted to an orthonormal basis of
    ker(J_h(x)) has minimum eigenvalue >= -tol. Vacuously true when the
    kernel is trivial. Raises RankDeficiencyError when J_h does not have
    full row rank (the tangent space is then ill-defined).
    """
    x = spec._check_x(x)
    lam = np.atleast_1d(np.asarray(lam, dtype=float))
    J = spec.jac(x)
    s = np.linalg.svd(J, compute_uv=False)
    if s.size and s[-1] <= 1e-10 * s[0]:
        raise numerics.RankDeficiencyError(
            "J_h is rank deficient at x; null-space basis ill-defined")
    Z = null_space_basis(J)
    if Z.shape[1] == 0:
        return True
    H = spec.hess_objective(x)
    for lam_i, Hi in zip(lam, spec.constraint_hessians(x)):
        if lam_i != 0.0:
            H = H + lam_i * Hi
    reduced = Z.T @ H @ Z
    reduced = 0.5 * (reduced + reduced.T)
    return bool(scipy.linalg.eigvalsh(reduced)[0] >= -tol)
