"""Multiplier and control laws.

The sliding-mode family (ideal switching, boundary-layer saturation,
super-twisting, nonsingular terminal sliding mode) plus the comparison
baselines (primal-dual gradient dynamics, PI multiplier feedback,
projected gradient flow, artificial potential field).

Sign convention: sign(0) = 0, the single-valued selection from the
set-valued SGN that keeps the manifold invariant.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass
from typing import Optional, Sequence, Union

import numpy as np

from . import numerics
from .problem import ProblemSpec


def sign(v: np.ndarray) -> np.ndarray:
    """Elementwise sign with sign(0) = 0."""
    return np.sign(v)


def sat(v: np.ndarray, eps: float) -> np.ndarray:
    """Elementwise saturation sat(v/eps): linear inside the boundary layer."""
    return np.clip(v / eps, -1.0, 1.0)


# ---------------------------------------------------------------------------
# Gain containers
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class SmcGains:
    """Per-constraint switching gains for the sliding-mode multiplier law.

    ``K`` is the diagonal of the positive-definite gain matrix. With
    ``smoothing='sat'`` the discontinuous sign is replaced by a boundary
    layer of width ``eps``; ``'fraction'`` uses the globally smooth
    h/(|h| + eps) approximation. ``alpha`` adds a proportional term
    alpha*h to the switching feedback (used by feasibility flows to
    accelerate the approach from far away).
    """

    K: np.ndarray
    smoothing: str = "sign"   # "sign" | "sat" | "fraction"
    eps: float = 1e-3
    alpha: float = 0.0
    gram_reg: float = numerics.DEFAULT_GRAM_REG

    def __post_init__(self):
        object.__setattr__(self, "K", np.atleast_1d(np.asarray(self.K, dtype=float)))
        if np.any(self.K <= 0):
            raise ValueError("all switching gains must be positive")
        if self.smoothing not in ("sign", "sat", "fraction"):
            raise ValueError("smoothing must be 'sign', 'sat' or 'fraction'")
        if self.smoothing in ("sat", "fraction") and self.eps <= 0:
            raise ValueError("eps must be positive for smoothed switching")
        if self.alpha < 0:
            raise ValueError("alpha must be nonnegative")
        if self.gram_reg < 0:
            raise ValueError("gram_reg must be nonnegative")

    def switch(self, h: np.ndarray) -> np.ndarray:
        if self.smoothing == "sign":
            return sign(h)
        if self.smoothing == "sat":
            return sat(h, self.eps)
        return h / (np.abs(h) + self.eps)

    @property
    def k_min(self) -> float:
        return float(np.min(self.K))

    @property
    def k_max(self) -> float:
        return float(np.max(self.K))


@dataclass(frozen=True)
class StaGains:
    """Super-twisting gains. Convergence is guaranteed for K1 > 2 sqrt(K2);
    construction warns when the condition is not met."""

    K1: float
    K2: float

    def __post_init__(self):
        if self.K1 <= 0 or self.K2 <= 0:
            raise ValueError("K1 and K2 must be positive")
        if self.K1 <= 2.0 * np.sqrt(self.K2):
            warnings.warn(
                f"STA gains K1={self.K1} <= 2*sqrt(K2)={2.0 * np.sqrt(self.K2):.4g}: "
                "finite-time convergence condition not met", stacklevel=2)


@dataclass(frozen=True)
class NtsmConfig:
    """Nonsingular terminal sliding-mode configuration.

    Manifold S = z1 + (1/beta)|z2|^gamma sign(z2) with z1 = h, z2 = hdot.
    ``p`` is the gradient-normalization exponent of the primal flow,
    p = (b-2)/(b-1) for some b > 2. ``z2_floor`` clamps |z2| before the
    (1 - gamma) exponent (which blows up as z2 -> 0); ``grad_floor`` is
    the stationarity cutoff of the normalized gradient.
    """

    beta: float
    gamma: float
    rho: float
    K1: np.ndarray
    K2: np.ndarray
    eta: float
    p: float
    z2_floor: float = 1e-6
    grad_floor: float = 1e-12
    gram_reg: float = numerics.DEFAULT_GRAM_REG

    def __post_init__(self):
        object.__setattr__(self, "K1", np.atleast_1d(np.asarray(self.K1, dtype=float)))
        object.__setattr__(self, "K2", np.atleast_1d(np.asarray(self.K2, dtype=float)))
        if self.beta <= 0:
            raise ValueError("beta must be positive")
        if not (1.0 < self.gamma < 2.0):
            raise ValueError("gamma must lie in (1, 2)")
        if not (0.0 < self.rho < 1.0):
            raise ValueError("rho must lie in (0, 1)")
        if not (0.0 < self.p < 1.0):
            raise ValueError("p must lie in (0, 1)")
        if self.eta < 0:
            raise ValueError("eta must be nonnegative")
        if np.any(self.K1 <= 0) or np.any(self.K2 <= 0):
            raise ValueError("K1 and K2 must be positive")
        if self.z2_floor <= 0 or self.grad_floor <= 0:
            raise ValueError("floors must be positive")


@dataclass(frozen=True)
class PdgdGains:
    """Primal-dual gradient dynamics (saddle-point flow) gains."""

    primal_gain: float = 1.0
    dual_gain: float = 1.0

    def __post_init__(self):
        if self.primal_gain <= 0 or self.dual_gain <= 0:
            raise ValueError("gains must be positive")


@dataclass(frozen=True)
class PiCmoGains:
    """Proportional-integral multiplier feedback: lambda = Kp h + Ki int(h)."""

    Kp: float = 1.0
    Ki: float = 1.0

    def __post_init__(self):
        if self.Kp <= 0 or self.Ki < 0:
            raise ValueError("Kp must be positive, Ki nonnegative")


@dataclass(frozen=True)
class PgfConfig:
    """Projected gradient flow xdot = -P(x) grad phi(x)."""

    gram_reg: float = numerics.DEFAULT_GRAM_REG


@dataclass(frozen=True)
class ApfConfig:
    """Artificial potential field: quadratic attraction to the goal plus
    inverse-distance repulsion within radius d0 of each obstacle surface."""

    k_att: float
    k_rep: float
    d0: float
    q_goal: np.ndarray
    obstacles: tuple  # of (center, radius)

    def __post_init__(self):
        object.__setattr__(self, "q_goal",
                           np.atleast_1d(np.asarray(self.q_goal, dtype=float)))
        object.__setattr__(self, "obstacles", tuple(
            (np.asarray(c, dtype=float), float(r)) for c, r in self.obstacles))
        if self.k_att <= 0 or self.k_rep < 0 or self.d0 <= 0:
            raise ValueError("k_att and d0 must be positive, k_rep nonnegative")


ControllerConfig = Union[SmcGains, StaGains, NtsmConfig, PdgdGains,
                         PiCmoGains, PgfConfig, ApfConfig]


# ---------------------------------------------------------------------------
# SMC multiplier laws
# ---------------------------------------------------------------------------

def smc_equivalent(spec: ProblemSpec, x, gains: SmcGains) -> np.ndarray:
    """Equivalent control lambda_eq = -(J J^T)^{-1} J grad phi.

    The multiplier value that makes the manifold {h = 0} invariant
    (hdot = 0) under the nominal plant.
    """
    J = spec.jac(x)
    return -numerics.gram_solve(J, J @ spec.grad(x), gains.gram_reg)


def smc_lambda(spec: ProblemSpec, x, gains: SmcGains,
               h_meas: Optional[np.ndarray] = None) -> np.ndarray:
    """Full sliding-mode multiplier
    lambda = -(J J^T)^{-1}[J grad phi - K switch(h) - alpha h].

    ``h_meas`` substitutes a noisy sliding-variable measurement in the
    switching term (the equivalent-control part always uses the model).
    Under the plant xdot = -grad phi - J^T lambda the closed loop is
    xdot = -P grad phi - J^T (J J^T)^{-1} (K switch(h) + alpha h).
    """
    J = spec.jac(x)
    h = spec.h(x) if h_meas is None else np.atleast_1d(np.asarray(h_meas, dtype=float))
    rhs = J @ spec.grad(x) - gains.K * gains.switch(h) - gains.alpha * h
    return -numerics.gram_solve(J, rhs, gains.gram_reg)


def sta_step(h: np.ndarray, z: np.ndarray, gains: StaGains) -> tuple[np.ndarray, np.ndarray]:
    """Super-twisting law: u = -K1 |h|^{1/2} sign(h) + z, zdot = -K2 sign(h).

    Returns (u, zdot); the caller integrates z. u is continuous in h, the
    discontinuity lives only in zdot.
    """
    h = np.atleast_1d(np.asarray(h, dtype=float))
    z = np.atleast_1d(np.asarray(z, dtype=float))
    if h.shape != z.shape:
        raise ValueError("h and z must have equal dimensions")
    u = -gains.K1 * np.sqrt(np.abs(h)) * sign(h) + z
    zdot = -gains.K2 * sign(h)
    return u, zdot


# ---------------------------------------------------------------------------
# Nonsingular terminal sliding mode
# ---------------------------------------------------------------------------

def ntsm_sliding_variable(z1: np.ndarray, z2: np.ndarray, cfg: NtsmConfig) -> np.ndarray:
    """S = z1 + (1/beta) |z2|^gamma sign(z2), elementwise."""
    z1 = np.atleast_1d(np.asarray(z1, dtype=float))
    z2 = np.atleast_1d(np.asarray(z2, dtype=float))
    if z1.shape != z2.shape:
        raise ValueError("z1 and z2 must have equal dimensions")
    return z1 + np.abs(z2) ** cfg.gamma * sign(z2) / cfg.beta


def normalized_gradient(spec: ProblemSpec, x, cfg: NtsmConfig) -> np.ndarray:
    """Normed gradient flow direction grad phi / ||grad phi||^p.

    Returns zero when ||grad phi|| <= grad_floor: the direction is
    undefined at stationary points while the magnitude ||g||^{1-p}
    already tends to zero.
    """
    g = spec.grad(x)
    nrm = float(np.linalg.norm(g))
    if nrm <= cfg.grad_floor:
        return np.zeros_like(g)
    return g / nrm ** cfg.p


def _normalized_gradient_jacobian(spec: ProblemSpec, x, cfg: NtsmConfig) -> np.ndarray:
    """Jacobian of g/||g||^p: ||g||^{-p} (H - p g (g^T H)/||g||^2)."""
    g = spec.grad(x)
    nrm = float(np.linalg.norm(g))
    if nrm <= cfg.grad_floor:
        return np.zeros((spec.dim_x, spec.dim_x))
    H = spec.hess_objective(x)
    return (H - cfg.p * np.outer(g, g @ H) / nrm ** 2) / nrm ** cfg.p


def ntsm_drift(spec: ProblemSpec, x, lam, xdot, cfg: NtsmConfig) -> np.ndarray:
    """Nominal drift of z2 = d/dt h(x) along the dual-rate plant.

    With plant xdot = -f_p(x) - J^T lambda + xi, f_p = grad phi/||grad phi||^p,
    the second constraint derivative is z2dot = a_bar - J J^T u + J xidot,
    where

        a_bar = H_h[xdot, xdot] - J J_{f_p} xdot - J (d/dt J^T) lambda.

    For linear constraints the curvature terms vanish and
    a_bar = -J J_{f_p} xdot.
    """
    x = spec._check_x(x)
    lam = np.atleast_1d(np.asarray(lam, dtype=float))
    xdot = np.atleast_1d(np.asarray(xdot, dtype=float))
    J = spec.jac(x)
    a = -J @ (_normalized_gradient_jacobian(spec, x, cfg) @ xdot)
    if not spec.linear_constraints:
        hessians = spec.constraint_hessians(x)
        # H_h[xdot, xdot] and Jdot^T lambda share the constraint Hessians.
        curv = np.array([xdot @ Hi @ xdot for Hi in hessians])
        jdot_t_lam = np.zeros(spec.dim_x)
        for lam_i, Hi in zip(lam, hessians):
            jdot_t_lam += lam_i * (Hi @ xdot)
        a = a + curv - J @ jdot_t_lam
    return a


def ntsm_control(spec: ProblemSpec, x, lam, xdot, cfg: NtsmConfig) -> np.ndarray:
    """Dual-rate NTSM input (drives lambdadot = u):

    u = (J J^T)^{-1} [a_bar + eta sign(S)
        + (beta/gamma) |z2|^{1-gamma} (K1 S + K2 |S|^rho sign(S) + z2)]

    The |z2|^{1-gamma} factor is clamped elementwise at
    z2_floor^{1-gamma} (the exponent is negative, so raw z2 -> 0 would
    blow the gain up).
    """
    J = spec.jac(x)
    xdot = np.atleast_1d(np.asarray(xdot, dtype=float))
    z1 = spec.h(x)
    z2 = J @ xdot
    S = ntsm_sliding_variable(z1, z2, cfg)
    a_bar = ntsm_drift(spec, x, lam, xdot, cfg)
    z2_clamped = np.maximum(np.abs(z2), cfg.z2_floor)
    bracket = (a_bar + cfg.eta * sign(S)
               + (cfg.beta / cfg.gamma) * z2_clamped ** (1.0 - cfg.gamma)
               * (cfg.K1 * S + cfg.K2 * np.abs(S) ** cfg.rho * sign(S) + z2))
    return numerics.gram_solve(J, bracket, cfg.gram_reg)


# ---------------------------------------------------------------------------
# Baselines
# ---------------------------------------------------------------------------

def pdgd_rhs(spec: ProblemSpec, x, lam, gains: PdgdGains) -> tuple[np.ndarray, np.ndarray]:
    """Saddle-point flow: xdot = -k_x (grad phi + J^T lambda), lambdadot = k_l h."""
    lam = np.atleast_1d(np.asarray(lam, dtype=float))
    xdot = -gains.primal_gain * (spec.grad(x) + spec.jac(x).T @ lam)
    lamdot = gains.dual_gain * spec.h(x)
    return xdot, lamdot


def pi_cmo_lambda(h_now: np.ndarray, h_integral: np.ndarray, gains: PiCmoGains) -> np.ndarray:
    """PI multiplier feedback; the caller maintains the running integral."""
    h_now = np.atleast_1d(np.asarray(h_now, dtype=float))
    h_integral = np.atleast_1d(np.asarray(h_integral, dtype=float))
    return gains.Kp * h_now + gains.Ki * h_integral


def pgf_rhs(spec: ProblemSpec, x, reg: float = 0.0) -> np.ndarray:
    """Projected gradient flow -P(x) grad phi(x); output lies in ker(J_h)."""
    return -numerics.projector(spec.jac(x), reg) @ spec.grad(x)


def apf_control(q, q_goal, obstacles: Sequence, gains) -> np.ndarray:
    """Negative potential gradient: -k_att (q - q_goal) plus, for each
    obstacle within influence distance d0 of its surface,
    k_rep (1/d - 1/d0) (1/d^2) grad d with d = ||q - c|| - radius.

    Raises ValueError for a query point on or inside an obstacle.
    """
    q = np.atleast_1d(np.asarray(q, dtype=float))
    q_goal = np.atleast_1d(np.asarray(q_goal, dtype=float))
    u = -gains.k_att * (q - q_goal)
    for center, radius in obstacles:
        center = np.asarray(center, dtype=float)
        dist_c = float(np.linalg.norm(q - center))
        d = dist_c - radius
        if d <= 0.0:
            raise ValueError(f"query point inside obstacle at {center} (d = {d:.3g})")
        if d < gains.d0:
            grad_d = (q - center) / dist_c
            u = u + gains.k_rep * (1.0 / d - 1.0 / gains.d0) * grad_d / d ** 2
    return u
