"""Exponential temporal correlation and the Kronecker latent-weight prior."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.linalg import cho_solve, solve_triangular

from .errors import InputError, NumericalError

JITTER_START = 1e-10
JITTER_MAX = 1e-6


def safe_cholesky(mat: np.ndarray) -> np.ndarray:
    """Lower Cholesky factor, retrying with diagonal jitter 1e-10 .. 1e-6."""
    try:
        return np.linalg.cholesky(mat)
    except np.linalg.LinAlgError:
        pass
    eye = np.eye(mat.shape[0])
    jitter = JITTER_START
    while jitter <= JITTER_MAX * (1 + 1e-9):
        try:
            return np.linalg.cholesky(mat + jitter * eye)
        except np.linalg.LinAlgError:
            jitter *= 10.0
    raise NumericalError("covariance not PD")


@dataclass(frozen=True, eq=False)
class ExpCorrMatrix:
    """Correlation exp(-phi |t - t'|) over periods 1..m with cached factorizations."""

    m: int
    phi: float
    entries: np.ndarray
    chol: np.ndarray
    log_det: float
    inverse: np.ndarray

    def solve(self, b: np.ndarray) -> np.ndarray:
        return cho_solve((self.chol, True), b)

    def quad_form(self, v: np.ndarray) -> float:
        """v^T Sigma^-1 v for a length-m vector."""
        y = solve_triangular(self.chol, v, lower=True)
        return float(y @ y)


def build_exp_corr(m: int, phi: float) -> ExpCorrMatrix:
    if m < 1:
        raise InputError("need at least one exposure period")
    if not (math.isfinite(phi) and phi > 0):
        raise InputError(f"decay rate must be positive and finite, got {phi}")
    lag = np.abs(np.subtract.outer(np.arange(m), np.arange(m)))
    entries = np.exp(-phi * lag)
    chol = safe_cholesky(entries)
    log_det = 2.0 * float(np.sum(np.log(np.diag(chol))))
    inverse = cho_solve((chol, True), np.eye(m))
    inverse = 0.5 * (inverse + inverse.T)
    return ExpCorrMatrix(m, float(phi), entries, chol, log_det, inverse)


def ar1_inverse(m: int, phi: float) -> np.ndarray:
    """Closed-form tridiagonal inverse of the exponential correlation (rho = e^-phi)."""
    rho = math.exp(-phi)
    if m == 1:
        return np.ones((1, 1))
    c = 1.0 / (1.0 - rho * rho)
    out = np.zeros((m, m))
    idx = np.arange(m)
    out[idx, idx] = c * (1.0 + rho * rho)
    out[0, 0] = out[-1, -1] = c
    out[idx[:-1], idx[1:]] = -c * rho
    out[idx[1:], idx[:-1]] = -c * rho
    return out


@dataclass(frozen=True)
class KronSolve:
    solved: np.ndarray
    quad_form: float
    log_det: float


def kron_weight_prior_solve(corr: ExpCorrMatrix, r: int, v) -> KronSolve:
    """Apply (Sigma^-1 kron I_r) to v stacked period-major, never forming the big matrix.

    ``v`` holds m blocks of length r: (v(1), ..., v(m)). Returns the solved
    vector, the quadratic form v^T (Sigma^-1 kron I_r) v and r log|Sigma|.
    """
    v = np.asarray(v, dtype=float)
    if v.size != corr.m * r:
        raise InputError(f"length mismatch: expected {corr.m * r}, got {v.size}")
    blocks = v.reshape(corr.m, r)
    solved = corr.inverse @ blocks
    return KronSolve(solved.ravel(), float(np.sum(blocks * solved)), r * corr.log_det)
