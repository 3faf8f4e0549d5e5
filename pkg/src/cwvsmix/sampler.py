"""Gibbs / Metropolis-within-Gibbs sampler.

One sweep updates, in this order,

    w -> beta -> lambda* -> phi_lambda -> delta1 -> A11 -> gamma -> gamma*
      -> delta2 -> A21 -> A22 -> phi1 -> phi2

so that every cache (G, G*, X beta, G alpha) is current before a dependent
update reads it. Given the Polya-Gamma latents the logistic likelihood is
Gaussian in the linear predictor l: up to terms free of l it contributes

    sum_i kappa_i l_i - w_i l_i^2 / 2,   kappa_i = y_i - 1/2,

which equals -(zeta - l)' Omega (zeta - l) / 2 with zeta_i = kappa_i / w_i.
All Metropolis targets below use that form and are evaluated in log space.
"""

from __future__ import annotations

import math
import time
from dataclasses import asdict, dataclass, field

import numpy as np
from scipy.special import expit, log_ndtr

from .covariance import ExpCorrMatrix, build_exp_corr, safe_cholesky
from .errors import InputError, NumericalError
from .model import ChainState, ExposureDataset, Priors, RiskProcessState, audit_state, make_design
from .rng import RngStream, draw_mvn_precision, draw_polya_gamma, draw_truncated_normal
from .weights import LatentWeightField, n_components, transform_rows

METROPOLIS_PARAMS = ("log_A11", "A21", "log_A22", "psi1", "psi2", "psi_lambda")


@dataclass
class SweepConfig:
    """Run lengths, proposal scales and adaptation settings.

    Step sizes are random-walk standard deviations on the working scale
    (the log scale for positive parameters). During burn-in each scale is
    adapted by Robbins-Monro toward ``target_accept``; kept draws use the
    frozen values.
    """

    n_burn: int = 10_000
    n_keep: int = 1_000
    thin: int = 10
    step_log_A11: float = 0.1
    step_A21: float = 0.5
    step_log_A22: float = 0.5
    step_psi1: float = 0.8
    step_psi2: float = 0.8
    step_psi_lambda: float = 0.8
    step_lambda: float = 0.5  # in units of the conditional prior SD of lambda_star(t)
    adapt: bool = True
    target_accept: float = 0.35
    audit_every: int = 0
    # exclude alpha from the likelihood; the chain then samples the prior
    disconnect_risk: bool = False

    def __post_init__(self):
        if self.n_burn < 0 or self.n_keep < 0 or self.thin < 1:
            raise InputError("burn-in and kept counts must be non-negative, thin >= 1")
        steps = [getattr(self, f"step_{p}") for p in METROPOLIS_PARAMS] + [self.step_lambda]
        if not all(s > 0 for s in steps):
            raise InputError("Metropolis step sizes must be positive")
        if not 0 < self.target_accept < 1:
            raise InputError("target acceptance must lie in (0, 1)")

    @classmethod
    def simulation_preset(cls, **kw) -> "SweepConfig":
        """10,000 burn-in, then 10,000 sweeps thinned by 10."""
        return cls(n_burn=10_000, n_keep=1_000, thin=10, **kw)

    @classmethod
    def application_preset(cls, **kw) -> "SweepConfig":
        """10,000 burn-in, then 100,000 sweeps thinned by 10."""
        return cls(n_burn=10_000, n_keep=10_000, thin=10, **kw)

    def to_dict(self) -> dict:
        return asdict(self)


@dataclass
class ChainSamples:
    """Thinned posterior draws; leading axis indexes kept draws."""

    beta: np.ndarray
    lambda_star: np.ndarray
    weights: np.ndarray
    alpha: np.ndarray
    gamma: np.ndarray
    theta: np.ndarray
    eta: np.ndarray
    delta1: np.ndarray
    delta2: np.ndarray
    phi_lambda: np.ndarray
    phi1: np.ndarray
    phi2: np.ndarray
    A11: np.ndarray
    A21: np.ndarray
    A22: np.ndarray
    acceptance: dict = field(default_factory=dict)
    steps: dict = field(default_factory=dict)
    manifest: dict = field(default_factory=dict)
    pollutants: tuple[str, ...] = ()
    covariates: tuple[str, ...] = ()
    wall_seconds: float = 0.0

    @property
    def n_draws(self) -> int:
        return self.alpha.shape[0]

    @property
    def m(self) -> int:
        return self.alpha.shape[1]

    @property
    def q(self) -> int:
        return len(self.pollutants)

    def scalar_traces(self) -> dict[str, np.ndarray]:
        """Flat name -> trace map of every scalar quantity (1-based periods)."""
        out = {}
        for j, name in enumerate(self.covariates):
            out[f"beta[{name}]"] = self.beta[:, j]
        for name in ("phi_lambda", "phi1", "phi2", "A11", "A21", "A22"):
            out[name] = getattr(self, name)
        for t in range(self.m):
            out[f"alpha[{t + 1}]"] = self.alpha[:, t]
            out[f"theta[{t + 1}]"] = self.theta[:, t]
            out[f"eta[{t + 1}]"] = self.eta[:, t]
            out[f"gamma[{t + 1}]"] = self.gamma[:, t].astype(float)
        return out


# --------------------------------------------------------------------------
# log targets and full-conditional moments (shared with the tests)
# --------------------------------------------------------------------------


def pg_loglik(lin: np.ndarray, kappa: np.ndarray, w: np.ndarray) -> float:
    """Augmented Gaussian log-likelihood of the linear predictor, up to a constant."""
    return float(lin @ (kappa - 0.5 * w * lin))


def log_target_log_A11(log_a11: float, state: ChainState, data: ExposureDataset, priors: Priors) -> float:
    u = state.Gstar @ state.risk.delta1
    lin = state.xb + math.exp(log_a11) * u
    return pg_loglik(lin, data.y - 0.5, state.w) - log_a11**2 / (2.0 * priors.sigma2_A)


def log_target_A21(a21: float, risk: RiskProcessState, priors: Priors) -> float:
    res = risk.gamma_star - a21 * risk.delta1 - risk.A22 * risk.delta2
    return -0.5 * float(res @ res) - a21**2 / (2.0 * priors.sigma2_A)


def log_target_log_A22(log_a22: float, risk: RiskProcessState, priors: Priors) -> float:
    res = risk.gamma_star - risk.A21 * risk.delta1 - math.exp(log_a22) * risk.delta2
    return -0.5 * float(res @ res) - log_a22**2 / (2.0 * priors.sigma2_A)


def _log_gamma_prior_psi(psi: float, priors: Priors) -> float:
    return priors.alpha_phi * psi - priors.beta_phi * math.exp(psi)


def log_target_psi(psi: float, delta: np.ndarray, priors: Priors, corr: ExpCorrMatrix | None = None) -> float:
    """Log target of psi = ln(phi) for one risk process delta_j."""
    corr = corr if corr is not None else build_exp_corr(delta.size, math.exp(psi))
    return -0.5 * corr.log_det - 0.5 * corr.quad_form(delta) + _log_gamma_prior_psi(psi, priors)


def log_target_psi_lambda(
    psi: float, lambda_star: np.ndarray, priors: Priors, corr: ExpCorrMatrix | None = None
) -> float:
    m, r = lambda_star.shape
    corr = corr if corr is not None else build_exp_corr(m, math.exp(psi))
    quad = float(np.sum(lambda_star * (corr.inverse @ lambda_star)))
    return -0.5 * r * corr.log_det - 0.5 * quad + _log_gamma_prior_psi(psi, priors)


def log_target_lambda_star(lambda_star: np.ndarray, state: ChainState, data: ExposureDataset) -> float:
    """Full latent-weight target at an arbitrary field (used for oracle checks)."""
    w_all = transform_rows(lambda_star, data.q)
    G = np.einsum("itc,tc->it", state.design.expanded, w_all)
    lin = state.xb + G @ state.effective_alpha()
    quad = float(np.sum(lambda_star * (state.corr_lambda.inverse @ lambda_star)))
    return pg_loglik(lin, data.y - 0.5, state.w) - 0.5 * quad


def beta_conditional(state: ChainState, data: ExposureDataset, priors: Priors):
    """Precision Cholesky factor and linear term of the beta full conditional."""
    Xw = data.X * state.w[:, None]
    prec = data.X.T @ Xw + np.eye(data.p) / priors.sigma2_beta
    lin = data.X.T @ ((data.y - 0.5) - state.w * state.galpha)
    return safe_cholesky(prec), lin


def delta1_conditional(state: ChainState, data: ExposureDataset):
    r = state.risk
    Gs = state.Gstar
    prec = (r.A11**2) * (Gs.T @ (Gs * state.w[:, None])) + (r.A21**2) * np.eye(data.m) + state.corr1.inverse
    lin = r.A11 * (Gs.T @ ((data.y - 0.5) - state.w * state.xb)) + r.A21 * (r.gamma_star - r.A22 * r.delta2)
    return safe_cholesky(prec), lin


def delta2_conditional(state: ChainState):
    r = state.risk
    m = r.delta2.size
    prec = (r.A22**2) * np.eye(m) + state.corr2.inverse
    lin = r.A22 * (r.gamma_star - r.A21 * r.delta1)
    return safe_cholesky(prec), lin


def moments_from_precision(chol: np.ndarray, lin: np.ndarray):
    """Mean Q^-1 b and covariance Q^-1 from the precision factor."""
    from scipy.linalg import cho_solve

    cov = cho_solve((chol, True), np.eye(lin.size))
    return cho_solve((chol, True), lin), cov


def gamma_log_odds(state: ChainState, data: ExposureDataset, t: int) -> float:
    """Log odds of gamma(t) = 1 given everything else."""
    r = state.risk
    eta = r.A21 * r.delta1[t] + r.A22 * r.delta2[t]
    prior = log_ndtr(eta) - log_ndtr(-eta)
    if state.disconnected:
        return float(prior)
    g = state.design.G[:, t]
    u = g * r.theta[t]
    base = state.lin_pred - g * r.alpha[t]
    kappa = data.y - 0.5
    return float(u @ (kappa - state.w * base) - 0.5 * (state.w * u) @ u + prior)


# --------------------------------------------------------------------------
# initial states
# --------------------------------------------------------------------------


def init_state(
    data: ExposureDataset,
    rng: RngStream,
    frozen_weights: np.ndarray | None = None,
    disconnected: bool = False,
) -> ChainState:
    """Neutral start: beta = 0, deltas = 0, A = I, decay rates 1, latent fields from their priors."""
    gen = rng.gen
    m, r = data.m, n_components(data.q)
    corr = build_exp_corr(m, 1.0)
    lam = corr.chol @ gen.standard_normal((m, r))
    gamma_star = gen.standard_normal(m)
    gamma_star[gamma_star == 0.0] = -0.0
    risk = RiskProcessState(
        delta1=np.zeros(m),
        delta2=np.zeros(m),
        gamma=(gamma_star > 0).astype(np.int64),
        gamma_star=gamma_star,
    )
    beta = np.zeros(data.p)
    return ChainState(
        beta=beta,
        weight_field=LatentWeightField(lam),
        phi_lambda=1.0,
        risk=risk,
        w=np.full(data.n, 0.25),
        design=make_design(data.Z, lam, frozen_weights),
        corr_lambda=corr,
        corr1=corr,
        corr2=corr,
        xb=data.X @ beta,
        disconnected=disconnected,
    )


def draw_prior_state(
    data: ExposureDataset, priors: Priors, rng: RngStream, disconnected: bool = False
) -> ChainState:
    """Exact draw of every parameter from the prior (exposures and X held fixed)."""
    gen = rng.gen
    m, r = data.m, n_components(data.q)
    sd_a = math.sqrt(priors.sigma2_A)

    def decay():
        return float(gen.gamma(priors.alpha_phi, 1.0 / priors.beta_phi))

    phi_l, phi1, phi2 = decay(), decay(), decay()
    corr_l, corr1, corr2 = (build_exp_corr(m, p) for p in (phi_l, phi1, phi2))
    beta = math.sqrt(priors.sigma2_beta) * gen.standard_normal(data.p)
    lam = corr_l.chol @ gen.standard_normal((m, r))
    delta1 = corr1.chol @ gen.standard_normal(m)
    delta2 = corr2.chol @ gen.standard_normal(m)
    A11 = math.exp(sd_a * gen.standard_normal())
    A21 = sd_a * gen.standard_normal()
    A22 = math.exp(sd_a * gen.standard_normal())
    eta = A21 * delta1 + A22 * delta2
    gamma_star = eta + gen.standard_normal(m)
    risk = RiskProcessState(
        delta1=delta1,
        delta2=delta2,
        gamma=(gamma_star > 0).astype(np.int64),
        gamma_star=gamma_star,
        A11=A11,
        A21=A21,
        A22=A22,
        phi1=phi1,
        phi2=phi2,
    )
    return ChainState(
        beta=beta,
        weight_field=LatentWeightField(lam),
        phi_lambda=phi_l,
        risk=risk,
        w=np.full(data.n, 0.25),
        design=make_design(data.Z, lam),
        corr_lambda=corr_l,
        corr1=corr1,
        corr2=corr2,
        xb=data.X @ beta,
        disconnected=disconnected,
    )


def simulate_outcomes(state: ChainState, rng: RngStream) -> np.ndarray:
    """Y_i ~ Bernoulli(logit^-1(l_i)) at the state's linear predictor."""
    return (rng.gen.random(state.xb.size) < expit(state.lin_pred)).astype(float)


# --------------------------------------------------------------------------
# the transition kernel
# --------------------------------------------------------------------------


class Sampler:
    """Transition kernel bound to one dataset; owns proposal scales and counters."""

    def __init__(self, data: ExposureDataset, priors: Priors, config: SweepConfig, ew: bool = False):
        self.data = data
        self.priors = priors
        self.config = config
        self.ew = ew
        self.kappa = data.y - 0.5
        self.steps = {p: float(getattr(config, f"step_{p}")) for p in METROPOLIS_PARAMS}
        self.lambda_steps = np.full(data.m, float(config.step_lambda))
        self.reset_counters()

    def reset_counters(self):
        self.accepts = {p: 0 for p in METROPOLIS_PARAMS}
        self.lambda_accepts = np.zeros(self.data.m, dtype=np.int64)
        self.n_sweeps = 0

    def set_data(self, data: ExposureDataset):
        """Swap in new outcomes (same X and exposures); used by the joint-distribution test."""
        self.data = data
        self.kappa = data.y - 0.5

    # -- adaptation --------------------------------------------------------

    def _adapt(self, name: str, accepted: bool, k: int | None):
        if k is None:
            return
        gain = 1.0 / (k + 1) ** 0.6
        self.steps[name] *= math.exp(gain * (float(accepted) - self.config.target_accept))

    def _mh(self, log_ratio: float, gen: np.random.Generator) -> bool:
        if not math.isfinite(log_ratio):
            return log_ratio > 0
        return log_ratio >= 0 or math.log(gen.random()) < log_ratio

    # -- Gibbs blocks --------------------------------------------------------

    def update_pg_latents(self, state: ChainState, rng: RngStream):
        state.w = draw_polya_gamma(state.lin_pred, rng)

    def update_beta(self, state: ChainState, rng: RngStream):
        chol, lin = beta_conditional(state, self.data, self.priors)
        state.beta = draw_mvn_precision(lin, chol, rng)
        state.xb = self.data.X @ state.beta

    def update_delta1(self, state: ChainState, rng: RngStream):
        chol, lin = delta1_conditional(state, self.data)
        state.risk.delta1 = draw_mvn_precision(lin, chol, rng)
        state.refresh_predictor()

    def update_delta2(self, state: ChainState, rng: RngStream):
        chol, lin = delta2_conditional(state)
        state.risk.delta2 = draw_mvn_precision(lin, chol, rng)

    def update_gamma(self, state: ChainState, rng: RngStream):
        gen = rng.gen
        r = state.risk
        eta = r.eta
        prior = log_ndtr(eta) - log_ndtr(-eta)
        theta = r.theta
        w, kappa = state.w, self.kappa
        G = state.design.G
        galpha = state.galpha
        gamma = r.gamma.copy()
        for t in range(self.data.m):
            if state.disconnected:
                lo = prior[t]
            else:
                g = G[:, t]
                u = g * theta[t]
                base = state.xb + galpha - u * gamma[t]
                lo = u @ (kappa - w * base) - 0.5 * (w * u) @ u + prior[t]
            new = int(gen.random() < expit(lo))
            if new != gamma[t] and not state.disconnected:
                galpha = galpha + (new - gamma[t]) * u
            gamma[t] = new
        r.gamma = gamma
        state.galpha = galpha if not state.disconnected else state.galpha

    def update_gamma_star(self, state: ChainState, rng: RngStream):
        r = state.risk
        r.gamma_star = draw_truncated_normal(r.eta, 1.0, r.gamma == 1, rng)

    # -- Metropolis blocks -------------------------------------------------

    def update_lambda_star(self, state: ChainState, rng: RngStream, k: int | None = None):
        if self.ew:
            return
        gen = rng.gen
        L = state.weight_field.lambda_star
        P = state.corr_lambda.inverse
        q = self.data.q
        alpha = state.effective_alpha()
        w, kappa = state.w, self.kappa
        expanded = state.design.expanded
        lin = state.xb + state.galpha
        # proposals are scaled by the conditional prior SD given the other
        # periods, so the tuned step stays sensible as phi_lambda moves
        cond_sd = 1.0 / np.sqrt(np.diag(P))
        for t in range(self.data.m):
            old = L[t]
            step = self.lambda_steps[t] * cond_sd[t]
            prop = old + step * gen.standard_normal(old.size)
            diff = prop - old
            cross = P[t] @ L - P[t, t] * old
            log_ratio = -0.5 * (P[t, t] * (prop @ prop - old @ old) + 2.0 * diff @ cross)
            w_t = transform_rows(prop, q)
            col = None
            if alpha[t] != 0.0:
                col = expanded[:, t, :] @ w_t
                dl = (col - state.design.G[:, t]) * alpha[t]
                log_ratio += dl @ (kappa - w * lin - 0.5 * w * dl)
            accepted = self._mh(log_ratio, gen)
            if accepted:
                L[t] = prop
                state.design.set_column(t, w_t, col)
                if col is not None:
                    lin = lin + dl
                self.lambda_accepts[t] += 1
            if k is not None:
                gain = 1.0 / (k + 1) ** 0.6
                self.lambda_steps[t] *= math.exp(gain * (float(accepted) - self.config.target_accept))
        state.galpha = lin - state.xb

    def _update_decay(self, name: str, current_phi: float, log_target, rng: RngStream, k):
        gen = rng.gen
        psi = math.log(current_phi)
        prop = psi + self.steps[name] * gen.standard_normal()
        accepted = False
        new_corr = None
        try:
            new_corr = build_exp_corr(self.data.m, math.exp(prop))
        except (InputError, NumericalError, OverflowError):
            new_corr = None
        if new_corr is not None:
            log_ratio = log_target(prop, new_corr) - log_target(psi, None)
            accepted = self._mh(log_ratio, gen)
        if accepted:
            self.accepts[name] += 1
        self._adapt(name, accepted, k)
        return new_corr if accepted else None

    def update_phi_lambda(self, state: ChainState, rng: RngStream, k=None):
        if self.ew:
            return
        L = state.lambda_star

        def target(psi, corr):
            corr = corr if corr is not None else state.corr_lambda
            return log_target_psi_lambda(psi, L, self.priors, corr)

        corr = self._update_decay("psi_lambda", state.phi_lambda, target, rng, k)
        if corr is not None:
            state.corr_lambda = corr
            state.phi_lambda = corr.phi

    def update_phi(self, state: ChainState, rng: RngStream, which: int, k=None):
        r = state.risk
        delta = r.delta1 if which == 1 else r.delta2
        cur = state.corr1 if which == 1 else state.corr2

        def target(psi, corr):
            return log_target_psi(psi, delta, self.priors, corr if corr is not None else cur)

        corr = self._update_decay(f"psi{which}", r.phi1 if which == 1 else r.phi2, target, rng, k)
        if corr is not None:
            if which == 1:
                state.corr1, r.phi1 = corr, corr.phi
            else:
                state.corr2, r.phi2 = corr, corr.phi

    def update_A11(self, state: ChainState, rng: RngStream, k=None):
        gen = rng.gen
        r = state.risk
        u = state.Gstar @ r.delta1
        base = self.kappa - state.w * state.xb
        s1 = float(u @ base)
        s2 = float((state.w * u) @ u)
        cur = math.log(r.A11)
        prop = cur + self.steps["log_A11"] * gen.standard_normal()

        def target(la):
            a = math.exp(la)
            return a * s1 - 0.5 * a * a * s2 - la * la / (2.0 * self.priors.sigma2_A)

        accepted = self._mh(target(prop) - target(cur), gen)
        if accepted:
            r.A11 = math.exp(prop)
            state.refresh_predictor()
            self.accepts["log_A11"] += 1
        self._adapt("log_A11", accepted, k)

    def update_A21(self, state: ChainState, rng: RngStream, k=None):
        gen = rng.gen
        r = state.risk
        prop = r.A21 + self.steps["A21"] * gen.standard_normal()
        log_ratio = log_target_A21(prop, r, self.priors) - log_target_A21(r.A21, r, self.priors)
        accepted = self._mh(log_ratio, gen)
        if accepted:
            r.A21 = prop
            self.accepts["A21"] += 1
        self._adapt("A21", accepted, k)

    def update_A22(self, state: ChainState, rng: RngStream, k=None):
        gen = rng.gen
        r = state.risk
        cur = math.log(r.A22)
        prop = cur + self.steps["log_A22"] * gen.standard_normal()
        log_ratio = log_target_log_A22(prop, r, self.priors) - log_target_log_A22(cur, r, self.priors)
        accepted = self._mh(log_ratio, gen)
        if accepted:
            r.A22 = math.exp(prop)
            self.accepts["log_A22"] += 1
        self._adapt("log_A22", accepted, k)

    # -- sweep -------------------------------------------------------------

    def sweep(self, state: ChainState, rng: RngStream, adapt_index: int | None = None):
        """One full pass; ``adapt_index`` (burn-in sweep number) enables adaptation."""
        k = adapt_index if self.config.adapt else None
        self.update_pg_latents(state, rng)
        self.update_beta(state, rng)
        self.update_lambda_star(state, rng, k)
        self.update_phi_lambda(state, rng, k)
        self.update_delta1(state, rng)
        self.update_A11(state, rng, k)
        self.update_gamma(state, rng)
        self.update_gamma_star(state, rng)
        self.update_delta2(state, rng)
        self.update_A21(state, rng, k)
        self.update_A22(state, rng, k)
        self.update_phi(state, rng, 1, k)
        self.update_phi(state, rng, 2, k)
        self.n_sweeps += 1
        every = self.config.audit_every
        if every and self.n_sweeps % every == 0:
            audit_state(state, self.data)

    def acceptance_rates(self) -> dict:
        n = max(self.n_sweeps, 1)
        out = {p: self.accepts[p] / n for p in METROPOLIS_PARAMS if not (self.ew and p == "psi_lambda")}
        if not self.ew:
            out["lambda_star"] = (self.lambda_accepts / n).tolist()
        return out


def ew_weights(m: int, q: int) -> np.ndarray:
    r = n_components(q)
    return np.full((m, r), 2.0 / (q * (q + 1)))


def run_chain(
    data: ExposureDataset,
    priors: Priors,
    config: SweepConfig,
    rng: RngStream,
    ew: bool = False,
    state: ChainState | None = None,
) -> ChainSamples:
    """Burn in, then keep every ``thin``-th of ``n_keep * thin`` sweeps.

    With ``ew=True`` the latent-weight updates are switched off and every
    weight is frozen at 2 / (q (q + 1)).
    """
    started = time.perf_counter()
    kernel = Sampler(data, priors, config, ew=ew)
    if state is None:
        frozen = ew_weights(data.m, data.q) if ew else None
        state = init_state(data, rng, frozen_weights=frozen, disconnected=config.disconnect_risk)

    for k in range(config.n_burn):
        kernel.sweep(state, rng, adapt_index=k)
    burn_rates = kernel.acceptance_rates()
    kernel.reset_counters()

    K, m, p = config.n_keep, data.m, data.p
    r = n_components(data.q)
    rec = {
        "beta": np.empty((K, p)),
        "lambda_star": np.empty((K, m, r)),
        "weights": np.empty((K, m, r)),
        "alpha": np.empty((K, m)),
        "gamma": np.empty((K, m), dtype=np.int8),
        "theta": np.empty((K, m)),
        "eta": np.empty((K, m)),
        "delta1": np.empty((K, m)),
        "delta2": np.empty((K, m)),
        **{name: np.empty(K) for name in ("phi_lambda", "phi1", "phi2", "A11", "A21", "A22")},
    }
    for d in range(K):
        for _ in range(config.thin):
            kernel.sweep(state, rng)
        rk = state.risk
        rec["beta"][d] = state.beta
        rec["lambda_star"][d] = state.lambda_star
        rec["weights"][d] = state.design.weights
        rec["alpha"][d] = rk.alpha
        rec["gamma"][d] = rk.gamma
        rec["theta"][d] = rk.theta
        rec["eta"][d] = rk.eta
        rec["delta1"][d] = rk.delta1
        rec["delta2"][d] = rk.delta2
        rec["phi_lambda"][d] = state.phi_lambda
        rec["phi1"][d] = rk.phi1
        rec["phi2"][d] = rk.phi2
        rec["A11"][d] = rk.A11
        rec["A21"][d] = rk.A21
        rec["A22"][d] = rk.A22

    return ChainSamples(
        **rec,
        acceptance={"burn_in": burn_rates, "kept": kernel.acceptance_rates()},
        steps={**kernel.steps, "lambda_star": kernel.lambda_steps.tolist()},
        manifest={
            "seed": rng.seed,
            "stream_id": rng.stream_id,
            "path": list(rng.path),
            "method": "ew" if ew else "cwvsmix",
            "sweeps": config.n_burn + config.n_keep * config.thin,
        },
        pollutants=tuple(data.pollutants),
        covariates=tuple(data.covariates),
        wall_seconds=time.perf_counter() - started,
    )
