"""Data containers and chain state for the mixture critical-window model.

The outcome model is Bernoulli-logit with linear predictor

    l_i = x_i' beta + sum_t g_i(t) alpha(t),

where g_i(t) is the weighted mixture exposure of subject i in period t and
alpha(t) = theta(t) gamma(t) is the selected risk process.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .covariance import ExpCorrMatrix
from .errors import InputError, NumericalError
from .weights import DesignCache, LatentWeightField, expand_exposures, weighted_design_matrix


@dataclass(frozen=True)
class Scaling:
    """Per (period, pollutant) centring and scale applied to the exposures."""

    median: np.ndarray  # m x q
    iqr: np.ndarray  # m x q


@dataclass(frozen=True, eq=False)
class ExposureDataset:
    y: np.ndarray
    X: np.ndarray
    Z: np.ndarray
    scaling: Scaling | None = None
    pollutants: tuple[str, ...] = ()
    covariates: tuple[str, ...] = ()

    def __post_init__(self):
        y = np.asarray(self.y, dtype=float)
        X = np.atleast_2d(np.asarray(self.X, dtype=float))
        Z = np.asarray(self.Z, dtype=float)
        if y.ndim != 1:
            raise InputError("outcomes must be a vector")
        n = y.size
        if X.shape[0] != n or Z.ndim != 3 or Z.shape[0] != n:
            raise InputError(f"inconsistent shapes: y {y.shape}, X {X.shape}, Z {Z.shape}")
        bad = np.flatnonzero((y != 0) & (y != 1))
        if bad.size:
            raise InputError(f"non-binary outcome at row {bad[0] + 1}")
        if not (np.all(np.isfinite(X)) and np.all(np.isfinite(Z))):
            raise InputError("covariates and exposures must be finite")
        object.__setattr__(self, "y", y)
        object.__setattr__(self, "X", X)
        object.__setattr__(self, "Z", Z)
        if not self.pollutants:
            object.__setattr__(self, "pollutants", tuple(f"p{j + 1}" for j in range(Z.shape[2])))
        if not self.covariates:
            object.__setattr__(self, "covariates", tuple(f"x{j + 1}" for j in range(X.shape[1])))
        if len(self.pollutants) != Z.shape[2] or len(self.covariates) != X.shape[1]:
            raise InputError("label count does not match the data")

    @property
    def n(self) -> int:
        return self.y.size

    @property
    def p(self) -> int:
        return self.X.shape[1]

    @property
    def m(self) -> int:
        return self.Z.shape[1]

    @property
    def q(self) -> int:
        return self.Z.shape[2]


@dataclass(frozen=True)
class Priors:
    """Prior hyperparameters.

    ``sigma2_beta`` is a variance; the default 100**2 is a prior standard
    deviation of 100 on each regression coefficient. Use :meth:`with_beta_sd`
    to give the standard deviation instead.
    """

    sigma2_beta: float = 100.0**2
    alpha_phi: float = 1.0
    beta_phi: float = 1.0
    sigma2_A: float = 1.0

    def __post_init__(self):
        for name in ("sigma2_beta", "alpha_phi", "beta_phi", "sigma2_A"):
            if not getattr(self, name) > 0:
                raise InputError(f"prior {name} must be positive")

    @classmethod
    def with_beta_sd(cls, sd: float, **kw) -> "Priors":
        return cls(sigma2_beta=sd * sd, **kw)


@dataclass
class RiskProcessState:
    delta1: np.ndarray
    delta2: np.ndarray
    gamma: np.ndarray  # 0/1 integers
    gamma_star: np.ndarray
    A11: float = 1.0
    A21: float = 0.0
    A22: float = 1.0
    phi1: float = 1.0
    phi2: float = 1.0

    @property
    def theta(self) -> np.ndarray:
        return self.A11 * self.delta1

    @property
    def eta(self) -> np.ndarray:
        return self.A21 * self.delta1 + self.A22 * self.delta2

    @property
    def alpha(self) -> np.ndarray:
        return self.theta * self.gamma

    def check(self):
        if not np.array_equal(self.gamma_star > 0, self.gamma == 1):
            raise NumericalError("gamma_star sign pattern disagrees with gamma")
        if not (self.A11 > 0 and self.A22 > 0 and self.phi1 > 0 and self.phi2 > 0):
            raise NumericalError("positive parameter left its support")


@dataclass
class ChainState:
    """One full parameter configuration plus the caches the sweep relies on."""

    beta: np.ndarray
    weight_field: LatentWeightField
    phi_lambda: float
    risk: RiskProcessState
    w: np.ndarray
    design: DesignCache
    corr_lambda: ExpCorrMatrix
    corr1: ExpCorrMatrix
    corr2: ExpCorrMatrix
    xb: np.ndarray = field(default=None)
    galpha: np.ndarray = field(default=None)
    # alpha excluded from the likelihood (prior-recovery checks)
    disconnected: bool = False

    def __post_init__(self):
        if self.xb is None:
            raise ValueError("xb (X @ beta) must be supplied")
        if self.galpha is None:
            self.refresh_predictor()

    @property
    def lambda_star(self) -> np.ndarray:
        return self.weight_field.lambda_star

    @property
    def G(self) -> np.ndarray:
        return self.design.G

    @property
    def Gstar(self) -> np.ndarray:
        if self.disconnected:
            return np.zeros_like(self.design.G)
        return self.design.G * self.risk.gamma

    @property
    def lin_pred(self) -> np.ndarray:
        return self.xb + self.galpha

    def effective_alpha(self) -> np.ndarray:
        if self.disconnected:
            return np.zeros_like(self.risk.delta1)
        return self.risk.alpha

    def refresh_predictor(self, X: np.ndarray | None = None):
        if X is not None:
            self.xb = X @ self.beta
        self.galpha = self.design.G @ self.effective_alpha()


def log_likelihood(state: ChainState, data: ExposureDataset) -> float:
    """Bernoulli-logit log-likelihood at the state's linear predictor."""
    lin = data.X @ state.beta + state.design.G @ state.effective_alpha()
    return float(np.sum(data.y * lin - np.logaddexp(0.0, lin)))


def audit_state(state: ChainState, data: ExposureDataset, tol: float = 1e-9) -> float:
    """Recompute G, G* and the predictor from scratch; raise if caches drifted."""
    design = state.design
    if design.frozen:
        G = np.einsum("itc,tc->it", expand_exposures(data.Z), design.weights)
    else:
        G = weighted_design_matrix(state.weight_field, data.Z)
    sums = design.weights.sum(axis=1)
    if not np.allclose(sums[sums > 0], 1.0, atol=1e-12):
        raise NumericalError("stored weights do not sum to one")
    alpha = np.zeros(data.m) if state.disconnected else state.risk.alpha
    lin = data.X @ state.beta + G @ alpha
    gstar = np.zeros_like(G) if state.disconnected else G * state.risk.gamma
    worst = max(
        float(np.max(np.abs(G - design.G))),
        float(np.max(np.abs(gstar - state.Gstar))),
        float(np.max(np.abs(lin - state.lin_pred))),
    )
    state.risk.check()
    if worst > tol:
        raise NumericalError(f"cache audit failed: discrepancy {worst:.3g}")
    return worst


def iqr_standardize(Z: np.ndarray) -> tuple[np.ndarray, Scaling]:
    """Centre each (period, pollutant) slice by its median and divide by its IQR.

    Quantiles use linear interpolation between order statistics.
    """
    Z = np.asarray(Z, dtype=float)
    if Z.ndim != 3:
        raise InputError("exposures must be an n x m x q tensor")
    q25, med, q75 = np.percentile(Z, [25, 50, 75], axis=0)
    iqr = q75 - q25
    zero = np.argwhere(~(iqr > 0))
    if zero.size:
        t, j = zero[0]
        raise InputError(f"zero IQR in exposure slice (pollutant {j + 1}, period {t + 1})")
    return (Z - med) / iqr, Scaling(med, iqr)


def make_design(Z: np.ndarray, lambda_star: np.ndarray, frozen_weights=None) -> DesignCache:
    return DesignCache(expand_exposures(Z), lambda_star, frozen_weights)
