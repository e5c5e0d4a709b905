"""Dense linear-algebra and finite-difference primitives.

Everything here is a pure function of its arguments: Gram-matrix solves
against J J^T, orthogonal projectors onto ker(J), central-difference
Jacobians, and singular-value statistics. These are the building blocks
for every controller and benchmark in the package.
"""

from __future__ import annotations

from typing import Callable

import numpy as np
import scipy.linalg

# Condition-number estimate beyond which an unregularized Gram solve is
# refused as rank deficient.
COND_LIMIT = 1e12

# Default Tikhonov shift for regularized Gram solves.
DEFAULT_GRAM_REG = 1e-8

# Default central-difference step (truncation/rounding balance at float64).
DEFAULT_FD_STEP = 1e-6


class RankDeficiencyError(np.linalg.LinAlgError):
    """Gram matrix J J^T is (numerically) singular and no regularization was requested."""


class NonFiniteEvaluationError(ValueError):
    """A user callable produced NaN/Inf; carries the offending output index."""

    def __init__(self, message: str, index=None):
        super().__init__(message)
        self.index = index


def _as_matrix(J) -> np.ndarray:
    J = np.asarray(J, dtype=float)
    if J.ndim != 2:
        raise ValueError(f"expected a 2-d matrix, got shape {J.shape}")
    return J


def fd_jacobian(f: Callable[[np.ndarray], np.ndarray], x: np.ndarray,
                step: float = DEFAULT_FD_STEP) -> np.ndarray:
    """Central-difference Jacobian of a vector-valued function.

    Entry (i, j) is (f_i(x + step e_j) - f_i(x - step e_j)) / (2 step).

    Raises NonFiniteEvaluationError if any probed evaluation is NaN/Inf,
    reporting the (output, input) index pair that failed.
    """
    if step <= 0.0:
        raise ValueError("step must be positive")
    x = np.atleast_1d(np.asarray(x, dtype=float))
    n = x.size
    cols = []
    for j in range(n):
        e = np.zeros(n)
        e[j] = step
        fp = np.atleast_1d(np.asarray(f(x + e), dtype=float))
        fm = np.atleast_1d(np.asarray(f(x - e), dtype=float))
        for name, val in (("f(x+h)", fp), ("f(x-h)", fm)):
            bad = ~np.isfinite(val)
            if bad.any():
                i = int(np.argmax(bad))
                raise NonFiniteEvaluationError(
                    f"non-finite value in {name} at output index {i}, input index {j}",
                    index=(i, j))
        cols.append((fp - fm) / (2.0 * step))
    return np.column_stack(cols)


def gram_solve(J: np.ndarray, b: np.ndarray, reg: float = 0.0) -> np.ndarray:
    """Solve (J J^T + reg I) y = b.

    With reg = 0 the Gram matrix must be well conditioned; a condition
    estimate above COND_LIMIT raises RankDeficiencyError suggesting a
    positive reg (redundant constraints make J J^T singular).
    """
    J = _as_matrix(J)
    b = np.atleast_1d(np.asarray(b, dtype=float))
    if b.size != J.shape[0]:
        raise ValueError(f"b has size {b.size}, expected {J.shape[0]} (rows of J)")
    if reg < 0.0:
        raise ValueError("reg must be nonnegative")
    G = J @ J.T
    if reg == 0.0:
        if not np.all(np.isfinite(G)):
            raise NonFiniteEvaluationError("non-finite Gram matrix")
        cond = np.linalg.cond(G)
        if not np.isfinite(cond) or cond > COND_LIMIT:
            raise RankDeficiencyError(
                f"J J^T is rank deficient (condition estimate {cond:.3e}); "
                "pass reg > 0 to regularize")
        return scipy.linalg.solve(G, b, assume_a="pos")
    G = G + reg * np.eye(J.shape[0])
    return scipy.linalg.solve(G, b, assume_a="pos")


def projector(J: np.ndarray, reg: float = 0.0) -> np.ndarray:
    """Orthogonal projector onto ker(J): P = I - J^T (J J^T + reg I)^{-1} J.

    Exact (idempotent, symmetric, J P = 0) when reg = 0 and J has full
    row rank; the regularized variant is the Tikhonov approximation used
    for rank-deficient constraint sets.
    """
    J = _as_matrix(J)
    m, n = J.shape
    Y = np.empty((m, n))
    if reg == 0.0:
        # One Gram factorization for all columns of J.
        G = J @ J.T
        cond = np.linalg.cond(G)
        if not np.isfinite(cond) or cond > COND_LIMIT:
            raise RankDeficiencyError(
                f"J J^T is rank deficient (condition estimate {cond:.3e}); "
                "pass reg > 0 to regularize")
        Y = scipy.linalg.solve(G, J, assume_a="pos")
    else:
        Y = scipy.linalg.solve(J @ J.T + reg * np.eye(m), J, assume_a="pos")
    return np.eye(n) - J.T @ Y


def sigma_max_gram(J: np.ndarray) -> float:
    """Largest singular value of J J^T, i.e. sigma_max(J)^2."""
    J = _as_matrix(J)
    if not np.all(np.isfinite(J)):
        raise NonFiniteEvaluationError("non-finite matrix entries")
    s = np.linalg.svd(J, compute_uv=False)
    return float(s[0] ** 2) if s.size else 0.0


def sigma_min_gram(J: np.ndarray) -> float:
    """Smallest singular value of J J^T (zero for rank-deficient J)."""
    J = _as_matrix(J)
    s = np.linalg.svd(J, compute_uv=False)
    return float(s[-1] ** 2) if s.size else 0.0


def fd_gradient(f: Callable[[np.ndarray], float], x: np.ndarray,
                step: float = DEFAULT_FD_STEP) -> np.ndarray:
    """Central-difference gradient of a scalar function."""
    wrapped = lambda z: np.atleast_1d(f(z))
    return fd_jacobian(wrapped, x, step)[0]
