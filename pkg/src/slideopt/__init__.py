"""slideopt: sliding-mode control for equality-constrained optimization.

Treats Lagrange multipliers as feedback control inputs driving the
constraint violation to zero in finite time, with robustness bounds
under matched disturbances, structured uncertainty and measurement
noise, plus a benchmark harness and CLI for reproducible experiments.
"""

from .problem import KKTPoint, ProblemSpec, fonc_residuals, lagrangian, sonc_check
from .controllers import (ApfConfig, NtsmConfig, PdgdGains, PgfConfig,
                          PiCmoGains, SmcGains, StaGains)
from .disturbances import DisturbanceSpec
from .engine import (IntegratorConfig, RunReport, Trajectory,
                     chattering_amplitude, matched_reach_bound,
                     noise_ultimate_bound, ntsm_time_bounds, reaching_time,
                     simulate, smc_reach_bound, tune_gains)
from .benchmarks import BENCHMARKS, BenchmarkCase, build

__version__ = "0.1.0"

__all__ = [
    "ProblemSpec", "KKTPoint", "lagrangian", "fonc_residuals", "sonc_check",
    "SmcGains", "StaGains", "NtsmConfig", "PdgdGains", "PiCmoGains",
    "PgfConfig", "ApfConfig", "DisturbanceSpec",
    "IntegratorConfig", "Trajectory", "RunReport", "simulate",
    "reaching_time", "chattering_amplitude", "smc_reach_bound",
    "matched_reach_bound", "noise_ultimate_bound", "ntsm_time_bounds",
    "tune_gains",
    "BENCHMARKS", "BenchmarkCase", "build",
]
