"""Perturbation classes for robustness studies.

Three bounded perturbations with declared bounds: matched disturbances
xi = J_h^T eta with ||eta|| <= eta_bar, structured Jacobian uncertainty
J + dJ(t) with a floor on sigma_min of the perturbed Gram matrix, and
measurement noise on the sliding variable with ||noise|| <= delta.
A raw additive channel covers signals that are not representable as
J_h^T eta (e.g. kernel-direction forcing in consensus problems).

Matched disturbances are constructed from the pre-image eta, making the
matched property (xi in range(J^T)) true by construction.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np

from . import numerics
from .problem import ProblemSpec


@dataclass(frozen=True)
class MatchedDisturbance:
    """xi(t, x) = J_h(x)^T eta(t, x) with ||eta(t, x)||_2 <= eta_bar."""

    eta_fn: Callable[[float, np.ndarray], np.ndarray]
    eta_bar: float

    def __post_init__(self):
        if self.eta_bar < 0:
            raise ValueError("eta_bar must be nonnegative")


@dataclass(frozen=True)
class StructuredUncertainty:
    """Time-varying Jacobian perturbation dJ(t); the perturbed Gram matrix
    must keep sigma_min >= alpha_floor."""

    delta_j_fn: Callable[[float], np.ndarray]
    alpha_floor: float

    def __post_init__(self):
        if self.alpha_floor <= 0:
            raise ValueError("alpha_floor must be positive")


@dataclass(frozen=True)
class MeasurementNoise:
    """Additive noise on the measured sliding variable, ||noise(t)||_2 <= delta."""

    noise_fn: Callable[[float], np.ndarray]
    delta: float

    def __post_init__(self):
        if self.delta < 0:
            raise ValueError("delta must be nonnegative")


@dataclass(frozen=True)
class AdditiveDisturbance:
    """Raw state-equation forcing xi(t) (not necessarily matched)."""

    xi_fn: Callable[[float], np.ndarray]
    bound: float = 0.0


@dataclass(frozen=True)
class DisturbanceSpec:
    """Bundle of perturbations applied to one run.

    Any subset may be present; ``none()`` builds the unperturbed spec.
    ``seed`` feeds stochastic noise constructors; runs with identical
    seeds reproduce byte-identically.
    """

    matched: Optional[MatchedDisturbance] = None
    structured: Optional[StructuredUncertainty] = None
    noise: Optional[MeasurementNoise] = None
    additive: Optional[AdditiveDisturbance] = None
    seed: int = 0

    @property
    def variant(self) -> str:
        tags = [name for name, part in (("matched", self.matched),
                                        ("structured", self.structured),
                                        ("meas_noise", self.noise),
                                        ("additive", self.additive)) if part is not None]
        return "+".join(tags) if tags else "none"


def none() -> DisturbanceSpec:
    return DisturbanceSpec()


def matched(eta_fn, eta_bar: float, seed: int = 0) -> DisturbanceSpec:
    return DisturbanceSpec(matched=MatchedDisturbance(eta_fn, eta_bar), seed=seed)


def structured(delta_j_fn, alpha_floor: float, seed: int = 0) -> DisturbanceSpec:
    return DisturbanceSpec(structured=StructuredUncertainty(delta_j_fn, alpha_floor),
                           seed=seed)


def measurement_noise(noise_fn, delta: float, seed: int = 0) -> DisturbanceSpec:
    return DisturbanceSpec(noise=MeasurementNoise(noise_fn, delta), seed=seed)


def additive(xi_fn, bound: float = 0.0, seed: int = 0) -> DisturbanceSpec:
    return DisturbanceSpec(additive=AdditiveDisturbance(xi_fn, bound), seed=seed)


def uniform_noise_fn(delta: float, dim: int, seed: int) -> Callable[[float], np.ndarray]:
    """Seeded noise with componentwise-uniform draws scaled so that
    ||noise(t)||_2 <= delta for every t.

    Deterministic in (seed, t): the generator state is derived from both,
    so repeated evaluation at the same instant (multi-stage integrators,
    re-runs) returns the same vector.
    """
    scale = delta / np.sqrt(dim)

    def noise(t: float) -> np.ndarray:
        key = np.frombuffer(np.float64(t).tobytes(), dtype=np.uint32)
        rng = np.random.default_rng(np.random.SeedSequence([seed, int(key[0]), int(key[1])]))
        return scale * rng.uniform(-1.0, 1.0, size=dim)

    return noise


def apply_matched(spec: ProblemSpec, d: DisturbanceSpec, t: float, x) -> np.ndarray:
    """xi = J_h(x)^T eta(t, x); asserts the declared bound on eta."""
    if d.matched is None:
        raise ValueError(f"disturbance variant is '{d.variant}', expected matched")
    eta = np.atleast_1d(np.asarray(d.matched.eta_fn(t, np.asarray(x, dtype=float)),
                                   dtype=float))
    nrm = float(np.linalg.norm(eta))
    if nrm > d.matched.eta_bar * (1.0 + 1e-9):
        raise ValueError(
            f"matched disturbance bound violated at t={t}: ||eta||={nrm:.6g} "
            f"> eta_bar={d.matched.eta_bar}")
    return spec.jac(x).T @ eta


def perturbed_jacobian(spec: ProblemSpec, d: DisturbanceSpec, t: float, x) -> np.ndarray:
    """J + dJ(t), with a run-time check of the sigma_min floor on the
    perturbed Gram matrix."""
    if d.structured is None:
        raise ValueError(f"disturbance variant is '{d.variant}', expected structured")
    Jt = spec.jac(x) + np.atleast_2d(np.asarray(d.structured.delta_j_fn(t), dtype=float))
    smin = numerics.sigma_min_gram(Jt)
    if smin < d.structured.alpha_floor:
        raise ValueError(
            f"structured uncertainty rank floor violated at t={t}: "
            f"sigma_min(JJ^T)={smin:.6g} < alpha={d.structured.alpha_floor}")
    return Jt


def noisy_sliding_measurement(S: np.ndarray, d: DisturbanceSpec, t: float) -> np.ndarray:
    """S + noise(t); asserts the declared noise bound."""
    if d.noise is None:
        raise ValueError(f"disturbance variant is '{d.variant}', expected meas_noise")
    S = np.atleast_1d(np.asarray(S, dtype=float))
    w = np.atleast_1d(np.asarray(d.noise.noise_fn(t), dtype=float))
    nrm = float(np.linalg.norm(w))
    if nrm > d.noise.delta * (1.0 + 1e-9):
        raise ValueError(
            f"measurement noise bound violated at t={t}: ||noise||={nrm:.6g} "
            f"> delta={d.noise.delta}")
    return S + w
