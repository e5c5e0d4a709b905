"""Closed-loop assembly, fixed-step integration, metrics and bounds.

simulate() wires a ProblemSpec, one controller law and a disturbance
bundle into an integrable system, runs explicit euler or rk4, and
records a Trajectory. The rest of the module computes empirical metrics
(reaching time, chattering amplitude) and the theoretical reaching-time
and ultimate bounds they are checked against.

Fixed-step explicit integration only: ideal switching laws have
discontinuous right-hand sides that defeat adaptive error control, so
euler with a small step is the honest discretization; rk4 is accepted
for the continuous laws.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional

import numpy as np
import scipy.linalg

from . import controllers as ctl
from . import disturbances as dist
from . import numerics
from .problem import ProblemSpec

# State-norm threshold beyond which a run is truncated and flagged.
DIVERGENCE_LIMIT = 1e9

# Minimum switching gain emitted by the tuning rule.
GAIN_FLOOR = 1e-3


@dataclass(frozen=True)
class IntegratorConfig:
    """Fixed-step integration settings.

    rk4 is rejected for ideal sign-switching SMC (discontinuous right-hand
    side); use euler there.
    """

    method: str = "euler"   # "euler" | "rk4"
    dt: float = 1e-4
    t_final: float = 1.0
    record_stride: int = 1

    def __post_init__(self):
        if self.method not in ("euler", "rk4"):
            raise ValueError("method must be 'euler' or 'rk4'")
        if self.dt <= 0:
            raise ValueError("dt must be positive")
        if self.t_final < self.dt:
            raise ValueError("t_final must be at least dt")
        if self.record_stride < 1:
            raise ValueError("record_stride must be a positive integer")


@dataclass
class Trajectory:
    """Time-indexed record of one closed-loop run."""

    times: np.ndarray        # (T,)
    states: np.ndarray       # (T, n)
    multipliers: np.ndarray  # (T, m)
    violations: np.ndarray   # (T, m)  h(x(t))
    sliding: np.ndarray      # (T, m)  true sliding variable
    aux: dict = field(default_factory=dict)
    diverged: bool = False
    divergence_time: Optional[float] = None

    def violation_inf(self) -> np.ndarray:
        """||h(x(t))||_inf per recorded sample."""
        return np.max(np.abs(self.violations), axis=1)

    def final_state(self) -> np.ndarray:
        return self.states[-1]


@dataclass
class RunReport:
    """Empirical metrics of one run paired with the theoretical bound."""

    reaching_time_empirical: Optional[float]
    reaching_time_bound: Optional[float]
    max_violation_after_reach: Optional[float]
    chattering_amplitude: Optional[float]
    final_distance_to_optimum: Optional[float]
    bound_satisfied: Optional[bool]
    diverged: bool = False


# ---------------------------------------------------------------------------
# Closed-loop right-hand sides
# ---------------------------------------------------------------------------

class _Loop:
    """Per-run closure bundle: state layout, rhs and probe extraction."""

    def __init__(self, spec: ProblemSpec, controller, d: dist.DisturbanceSpec,
                 x0: np.ndarray, lam0: np.ndarray):
        self.spec = spec
        self.controller = controller
        self.d = d
        self.n = spec.dim_x
        self.m = spec.dim_h

        if d.noise is not None and isinstance(controller, (ctl.PgfConfig, ctl.ApfConfig)):
            raise ValueError("measurement noise needs a law that reads the "
                             "sliding variable; PGF/APF do not")
        if d.structured is not None and isinstance(controller, (ctl.PgfConfig, ctl.ApfConfig)):
            raise ValueError("structured uncertainty perturbs the multiplier "
                             "channel; PGF/APF have none")

        reg = getattr(controller, "gram_reg", numerics.DEFAULT_GRAM_REG)
        self._reg = reg
        self._setup_gram(reg)
        self._P_const = None
        if isinstance(controller, ctl.PgfConfig) and self.J_const is not None:
            self._P_const = numerics.projector(self.J_const, controller.gram_reg)
        # Over-determined constraint sets (m > n, regularized): the plant
        # force J^T (J J^T + reg I)^{-1} v equals (J^T J + reg I)^{-1} J^T v,
        # an n-sized solve; the m-sized multiplier is only formed when the
        # step is recorded.
        self._tall = (isinstance(controller, ctl.SmcGains) and self.m > self.n
                      and reg > 0.0 and self.J_const is None)
        self._reg_eye_n = reg * np.eye(self.n)
        self.y0 = self._init_state(x0, lam0)

    # Gram solve, with a one-time factorization for constant Jacobians.
    def _setup_gram(self, reg: float):
        spec = self.spec
        if spec.constant_jacobian:
            self.J_const = spec.jac(np.zeros(self.n))
            G = self.J_const @ self.J_const.T
            if reg == 0.0:
                cond = np.linalg.cond(G)
                if not np.isfinite(cond) or cond > numerics.COND_LIMIT:
                    raise numerics.RankDeficiencyError(
                        f"constant J J^T is rank deficient (cond {cond:.3e}); "
                        "set gram_reg > 0")
            else:
                G = G + reg * np.eye(self.m)
            cho = scipy.linalg.cho_factor(G)
            self.gsolve = lambda J, b: scipy.linalg.cho_solve(cho, b)
        else:
            self.J_const = None
            self.gsolve = lambda J, b: numerics.gram_solve(J, b, reg)

    def jac(self, x: np.ndarray) -> np.ndarray:
        return self.J_const if self.J_const is not None else self.spec.jac(x)

    def plant_jac(self, J: np.ndarray, t: float, x: np.ndarray) -> np.ndarray:
        """Control-channel Jacobian seen by the plant (structured uncertainty
        perturbs the channel while the law keeps the nominal model)."""
        if self.d.structured is None:
            return J
        return dist.perturbed_jacobian(self.spec, self.d, t, x)

    def xi(self, t: float, x: np.ndarray, J: np.ndarray) -> np.ndarray:
        out = np.zeros(self.n)
        if self.d.matched is not None:
            eta = np.atleast_1d(np.asarray(self.d.matched.eta_fn(t, x), dtype=float))
            nrm = float(np.linalg.norm(eta))
            if nrm > self.d.matched.eta_bar * (1.0 + 1e-9):
                raise ValueError(
                    f"matched disturbance bound violated at t={t}: "
                    f"||eta||={nrm:.6g} > {self.d.matched.eta_bar}")
            out = out + J.T @ eta
        if self.d.additive is not None:
            out = out + np.atleast_1d(np.asarray(self.d.additive.xi_fn(t), dtype=float))
        return out

    def measured(self, S: np.ndarray, t: float) -> np.ndarray:
        if self.d.noise is None:
            return S
        return dist.noisy_sliding_measurement(S, self.d, t)

    def _init_state(self, x0: np.ndarray, lam0: np.ndarray) -> np.ndarray:
        c = self.controller
        if isinstance(c, (ctl.NtsmConfig, ctl.PdgdGains)):
            return np.concatenate([x0, lam0])
        if isinstance(c, ctl.StaGains):
            return np.concatenate([x0, np.zeros(self.m)])   # z integrator
        if isinstance(c, ctl.PiCmoGains):
            return np.concatenate([x0, np.zeros(self.m)])   # running integral of h
        return x0.copy()

    def x_of(self, y: np.ndarray) -> np.ndarray:
        return y[:self.n]

    # rhs returns (ydot, lambda, h, S_true) so recording reuses the
    # per-step evaluation. need_lam lets the tall fast path skip the
    # m-sized multiplier solve on unrecorded steps (lam is then None).
    def rhs(self, t: float, y: np.ndarray, need_lam: bool = True):
        spec, c = self.spec, self.controller
        x = y[:self.n]

        if isinstance(c, ctl.SmcGains):
            J = self.jac(x)
            g = spec.grad(x)
            h = spec.h(x)
            v = J @ g - c.K * c.switch(self.measured(h, t)) - c.alpha * h
            if self._tall and self.d.structured is None:
                force = np.linalg.solve(J.T @ J + self._reg_eye_n, J.T @ v)
                xdot = -g + force + self.xi(t, x, J)
                lam = -self.gsolve(J, v) if need_lam else None
                return xdot, lam, h, h
            lam = -self.gsolve(J, v)
            Jp = self.plant_jac(J, t, x)
            xdot = -g - Jp.T @ lam + self.xi(t, x, J)
            return xdot, lam, h, h

        if isinstance(c, ctl.StaGains):
            x, z = y[:self.n], y[self.n:]
            J = self.jac(x)
            g = spec.grad(x)
            h = spec.h(x)
            u_sta, zdot = ctl.sta_step(self.measured(h, t), z, c)
            lam = -self.gsolve(J, J @ g + u_sta)
            Jp = self.plant_jac(J, t, x)
            xdot = -g - Jp.T @ lam + self.xi(t, x, J)
            return np.concatenate([xdot, zdot]), lam, h, h

        if isinstance(c, ctl.NtsmConfig):
            x, lam = y[:self.n], y[self.n:]
            J = self.jac(x)
            Jp = self.plant_jac(J, t, x)
            xdot = -ctl.normalized_gradient(spec, x, c) - Jp.T @ lam + self.xi(t, x, J)
            z1 = spec.h(x)
            z2 = J @ xdot
            S = ctl.ntsm_sliding_variable(z1, z2, c)
            S_used = self.measured(S, t)
            a_bar = ctl.ntsm_drift(spec, x, lam, xdot, c)
            z2c = np.maximum(np.abs(z2), c.z2_floor)
            bracket = (a_bar + c.eta * ctl.sign(S_used)
                       + (c.beta / c.gamma) * z2c ** (1.0 - c.gamma)
                       * (c.K1 * S_used
                          + c.K2 * np.abs(S_used) ** c.rho * ctl.sign(S_used)
                          + z2))
            u = self.gsolve(J, bracket)
            return np.concatenate([xdot, u]), lam, z1, S

        if isinstance(c, ctl.PdgdGains):
            x, lam = y[:self.n], y[self.n:]
            J = self.jac(x)
            h = spec.h(x)
            Jp = self.plant_jac(J, t, x)
            xdot = -c.primal_gain * (spec.grad(x) + Jp.T @ lam) + self.xi(t, x, J)
            lamdot = c.dual_gain * self.measured(h, t)
            return np.concatenate([xdot, lamdot]), lam, h, h

        if isinstance(c, ctl.PiCmoGains):
            x, w = y[:self.n], y[self.n:]
            J = self.jac(x)
            h = spec.h(x)
            h_used = self.measured(h, t)
            lam = ctl.pi_cmo_lambda(h_used, w, c)
            Jp = self.plant_jac(J, t, x)
            xdot = -spec.grad(x) - Jp.T @ lam + self.xi(t, x, J)
            return np.concatenate([xdot, h_used]), lam, h, h

        if isinstance(c, ctl.PgfConfig):
            J = self.jac(x)
            h = spec.h(x)
            if self._P_const is None:
                P = numerics.projector(J, c.gram_reg)
            else:
                P = self._P_const
            xdot = -P @ spec.grad(x) + self.xi(t, x, J)
            zero = np.zeros(self.m)
            return xdot, zero, h, h

        if isinstance(c, ctl.ApfConfig):
            h = spec.h(x)
            J = self.jac(x)
            xdot = ctl.apf_control(x, c.q_goal, c.obstacles, c) + self.xi(t, x, J)
            zero = np.zeros(self.m)
            return xdot, zero, h, h

        raise TypeError(f"unknown controller config {type(c).__name__}")


def simulate(spec: ProblemSpec, controller, disturbance, x0, lam0,
             icfg: IntegratorConfig) -> Trajectory:
    """Integrate the closed loop and record a Trajectory.

    Measurement noise enters the controller only; the recorded sliding
    variable is the true value. Non-finite states or ||x||_inf beyond
    DIVERGENCE_LIMIT truncate the run with the diverged flag set at the
    offending time (expected for PDGD/PI-CMO under disturbance).
    """
    if disturbance is None:
        disturbance = dist.DisturbanceSpec()
    x0 = np.atleast_1d(np.asarray(x0, dtype=float))
    lam0 = np.atleast_1d(np.asarray(lam0, dtype=float))
    if x0.size != spec.dim_x:
        raise ValueError(f"x0 has size {x0.size}, expected {spec.dim_x}")
    if lam0.size != spec.dim_h:
        raise ValueError(f"lam0 has size {lam0.size}, expected {spec.dim_h}")
    if (icfg.method == "rk4" and isinstance(controller, ctl.SmcGains)
            and controller.smoothing == "sign"):
        raise ValueError("rk4 with ideal sign switching is not meaningful; "
                         "use euler or sat smoothing")

    loop = _Loop(spec, controller, disturbance, x0, lam0)
    dt, stride = icfg.dt, icfg.record_stride
    nsteps = int(round(icfg.t_final / dt))

    times, states, lams, hs, Ss = [], [], [], [], []
    aux_z = []   # STA integrator / PI-CMO integral snapshots
    has_aux = isinstance(controller, (ctl.StaGains, ctl.PiCmoGains))

    def record(t, y, lam, h, S):
        times.append(t)
        states.append(loop.x_of(y).copy())
        lams.append(np.atleast_1d(lam).copy())
        hs.append(np.atleast_1d(h).copy())
        Ss.append(np.atleast_1d(S).copy())
        if has_aux:
            aux_z.append(y[loop.n:].copy())

    y = loop.y0
    diverged = False
    div_time = None
    k = 0
    while k < nsteps:
        t = k * dt
        recording = (k % stride == 0)
        ydot, lam, h, S = loop.rhs(t, y, need_lam=recording)
        if recording:
            record(t, y, lam, h, S)
        if icfg.method == "euler":
            y_new = y + dt * ydot
        else:
            k1 = ydot
            k2 = loop.rhs(t + 0.5 * dt, y + 0.5 * dt * k1, need_lam=False)[0]
            k3 = loop.rhs(t + 0.5 * dt, y + 0.5 * dt * k2, need_lam=False)[0]
            k4 = loop.rhs(t + dt, y + dt * k3, need_lam=False)[0]
            y_new = y + (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
        xn = loop.x_of(y_new)
        if not np.all(np.isfinite(y_new)) or np.max(np.abs(xn)) > DIVERGENCE_LIMIT:
            diverged = True
            div_time = (k + 1) * dt
            break
        y = y_new
        k += 1

    if not diverged:
        t = nsteps * dt
        _, lam, h, S = loop.rhs(t, y)
        if not times or times[-1] < t:
            record(t, y, lam, h, S)

    traj = Trajectory(
        times=np.asarray(times),
        states=np.asarray(states),
        multipliers=np.asarray(lams),
        violations=np.asarray(hs),
        sliding=np.asarray(Ss),
        diverged=diverged,
        divergence_time=div_time,
    )
    if has_aux:
        key = "z" if isinstance(controller, ctl.StaGains) else "h_integral"
        traj.aux[key] = np.asarray(aux_z)
    return traj


# ---------------------------------------------------------------------------
# Empirical metrics
# ---------------------------------------------------------------------------

def reaching_time(traj: Trajectory, tol: float, dwell: float = 0.05) -> Optional[float]:
    """First recorded time t* with ||h||_inf <= tol for every sample in
    [t*, t* + dwell]; None if the window never closes.

    The dwell window rejects transversal zero crossings; it must fit
    inside the recorded span.
    """
    if tol <= 0 or dwell <= 0:
        raise ValueError("tol and dwell must be positive")
    t = traj.times
    if t.size == 0:
        return None
    feasible = traj.violation_inf() <= tol
    bad = np.cumsum(~feasible)          # bad[i] = infeasible count in [0, i]
    for i in np.flatnonzero(feasible):
        t_end = t[i] + dwell
        if t_end > t[-1] + 1e-12:
            return None
        j = int(np.searchsorted(t, t_end, side="right")) - 1
        n_bad = bad[j] - (bad[i - 1] if i > 0 else 0)
        if n_bad == 0:
            return float(t[i])
    return None


def chattering_amplitude(traj: Trajectory, t_start: float) -> float:
    """max over t >= t_start of ||h(x(t))||_inf."""
    if t_start < traj.times[0] - 1e-12 or t_start > traj.times[-1] + 1e-12:
        raise ValueError("t_start outside trajectory span")
    mask = traj.times >= t_start - 1e-12
    return float(np.max(traj.violation_inf()[mask]))


# ---------------------------------------------------------------------------
# Theoretical bounds
# ---------------------------------------------------------------------------

def smc_reach_bound(h0, gains: ctl.SmcGains) -> float:
    """Nominal reaching-time bound sqrt(2) ||h(0)||_2 / k_min."""
    h0 = np.atleast_1d(np.asarray(h0, dtype=float))
    return math.sqrt(2.0) * float(np.linalg.norm(h0)) / gains.k_min


def matched_reach_bound(S0, gains: ctl.SmcGains, J, eta_bar: float) -> Optional[float]:
    """Reaching bound ||S(0)||_2 / eps under matched disturbances, with
    eps = k_min - sigma_max(J J^T) eta_bar; None when eps <= 0 (the gain
    is too small for a guarantee)."""
    S0 = np.atleast_1d(np.asarray(S0, dtype=float))
    eps = gains.k_min - numerics.sigma_max_gram(J) * eta_bar
    if eps <= 0.0:
        return None
    return float(np.linalg.norm(S0)) / eps


def noise_ultimate_bound(gains: ctl.SmcGains, J, eta_bar: float, delta: float) -> float:
    """Ultimate bound (k_min delta + sigma_max(J J^T) eta_bar) / k_min on
    ||S||_2 under bounded measurement noise (conservative k = k_min
    scalar reduction)."""
    if gains.k_min <= 0:
        raise ValueError("k_min must be positive")
    return (gains.k_min * delta + numerics.sigma_max_gram(J) * eta_bar) / gains.k_min


def ntsm_time_bounds(s0, h0, x_gap: float, cfg: ctl.NtsmConfig,
                     mu: Optional[float] = None,
                     lipschitz: Optional[float] = None):
    """Three-phase NTSM bounds (T1, T2, T3).

    T1: manifold reaching, logarithmic in ||s(0)||.
    T2: constraint convergence on the manifold, power law in max|h_i(0)|.
    T3: optimality phase, needs the strong-convexity modulus mu and the
    gradient Lipschitz constant (returned as None when either is absent).
    """
    s0 = np.atleast_1d(np.asarray(s0, dtype=float))
    h0 = np.atleast_1d(np.asarray(h0, dtype=float))
    k1 = float(np.min(cfg.K1))
    k2 = float(np.min(cfg.K2))
    s_norm = float(np.linalg.norm(s0))
    T1 = (2.0 / k1) * math.log1p(k1 * s_norm ** (1.0 - cfg.rho)
                                 / (k2 * (1.0 - cfg.rho)))
    h_max = float(np.max(np.abs(h0)))
    T2 = (cfg.gamma / (cfg.gamma - 1.0)) * h_max ** ((cfg.gamma - 1.0) / cfg.gamma) \
        / cfg.beta ** (1.0 / cfg.gamma)
    T3 = None
    if mu is not None and lipschitz is not None:
        if mu <= 0 or lipschitz <= 0:
            raise ValueError("mu and lipschitz must be positive for T3")
        c_tilde = mu / lipschitz ** cfg.p
        T3 = (2.0 / (c_tilde * (2.0 - cfg.p))) \
            * (0.5 * x_gap ** 2) ** ((2.0 - cfg.p) / 2.0)
    return T1, T2, T3


def tune_gains(sigma_max_gram: float, eta_bar: float, delta: float, tau: float,
               dim_h: int) -> ctl.SmcGains:
    """Gain guideline: K = max(2 sigma_max(J J^T) eta_bar, floor) on every
    constraint, sat smoothing with boundary layer eps = tau K + delta."""
    if min(sigma_max_gram, eta_bar, delta, tau) < 0:
        raise ValueError("inputs must be nonnegative")
    k = max(2.0 * sigma_max_gram * eta_bar, GAIN_FLOOR)
    eps = tau * k + delta
    return ctl.SmcGains(K=np.full(dim_h, k), smoothing="sat", eps=eps)


def export_csv(traj: Trajectory, path) -> None:
    """Write the trajectory as CSV: t, x_1..x_n, lambda_1..lambda_m,
    h_1..h_m, S_1..S_m, one row per recorded step, full double precision.

    Output is byte-identical across re-runs with the same config/seeds.
    """
    n = traj.states.shape[1]
    m = traj.multipliers.shape[1]
    header = (["t"]
              + [f"x_{i}" for i in range(1, n + 1)]
              + [f"lambda_{i}" for i in range(1, m + 1)]
              + [f"h_{i}" for i in range(1, m + 1)]
              + [f"S_{i}" for i in range(1, m + 1)])
    block = np.hstack([traj.times[:, None], traj.states, traj.multipliers,
                       traj.violations, traj.sliding])
    with open(path, "w") as f:
        f.write(",".join(header) + "\n")
        for row in block:
            f.write(",".join(f"{v:.17g}" for v in row) + "\n")


def run_report(traj: Trajectory, tol: float, dwell: float,
               bound: Optional[float] = None,
               target: Optional[np.ndarray] = None) -> RunReport:
    """Summarize one trajectory against its reaching bound and target point."""
    reach = None if traj.diverged else reaching_time(traj, tol, dwell)
    max_viol = None
    chat = None
    if reach is not None:
        chat = chattering_amplitude(traj, reach + dwell) \
            if reach + dwell <= traj.times[-1] else chattering_amplitude(traj, reach)
        max_viol = chattering_amplitude(traj, reach)
    final_dist = None
    if target is not None and not traj.diverged:
        final_dist = float(np.linalg.norm(traj.final_state() - np.asarray(target)))
    satisfied = None
    if reach is not None and bound is not None:
        satisfied = bool(reach <= bound)
    elif bound is not None:
        satisfied = False
    return RunReport(
        reaching_time_empirical=reach,
        reaching_time_bound=bound,
        max_violation_after_reach=max_viol,
        chattering_amplitude=chat,
        final_distance_to_optimum=final_dist,
        bound_satisfied=satisfied,
        diverged=traj.diverged,
    )
