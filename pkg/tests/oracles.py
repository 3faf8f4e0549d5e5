"""Dense brute-force reference implementations of every full conditional and log target.

Everything here is written from the model definition with explicit loops,
dense Kronecker products and generic inverses, sharing no code with the
package beyond the state container.
"""

import copy
import math

import numpy as np
from scipy.special import expit
from scipy.stats import norm

from cwvsmix.covariance import build_exp_corr
from cwvsmix.model import Priors
from cwvsmix.rng import RngStream
from cwvsmix.sampler import Sampler, SweepConfig
from conftest import make_dataset, random_state


def weights_row(lam, q):
    pairs = [(j, k) for j in range(q) for k in range(j + 1, q)]
    num = [max(lam[j], 0.0) for j in range(q)]
    for c, (j, k) in enumerate(pairs):
        num.append(max(lam[q + c], 0.0) if lam[j] > 0 and lam[k] > 0 else 0.0)
    d = sum(num)
    return [x / d if d > 0 else 0.0 for x in num]


def dense_G(Z, lam):
    n, m, q = Z.shape
    pairs = [(j, k) for j in range(q) for k in range(j + 1, q)]
    G = np.zeros((n, m))
    for t in range(m):
        w = weights_row(lam[t], q)
        for i in range(n):
            z = Z[i, t]
            g = sum(w[j] * z[j] for j in range(q))
            g += sum(w[q + c] * z[j] * z[k] for c, (j, k) in enumerate(pairs))
            G[i, t] = g
    return G


def corr(m, phi):
    return np.array([[math.exp(-phi * abs(t - s)) for s in range(m)] for t in range(m)])


def aug_loglik(lin, data, w):
    zeta = (data.y - 0.5) / w
    res = zeta - lin
    return -0.5 * res @ np.diag(w) @ res


class Oracle:
    def __init__(self, state, data, priors):
        self.s, self.d, self.p = state, data, priors
        self.r = state.risk

    # pieces
    def G(self, lam=None):
        return dense_G(self.d.Z, self.s.lambda_star if lam is None else lam)

    def Gstar(self):
        return self.G() * self.r.gamma[None, :]

    def alpha(self):
        return self.r.A11 * self.r.delta1 * self.r.gamma

    # Gibbs moments
    def beta(self):
        X, W = self.d.X, np.diag(self.s.w)
        zeta = (self.d.y - 0.5) / self.s.w
        cov = np.linalg.inv(X.T @ W @ X + np.eye(X.shape[1]) / self.p.sigma2_beta)
        return cov @ X.T @ W @ (zeta - self.G() @ self.alpha()), cov

    def delta1(self):
        r, W = self.r, np.diag(self.s.w)
        zeta = (self.d.y - 0.5) / self.s.w
        Gs = self.Gstar()
        S1 = np.linalg.inv(corr(self.d.m, r.phi1))
        prec = r.A11**2 * Gs.T @ W @ Gs + r.A21**2 * np.eye(self.d.m) + S1
        cov = np.linalg.inv(prec)
        mean = cov @ (r.A11 * Gs.T @ W @ (zeta - self.d.X @ self.s.beta) + r.A21 * (r.gamma_star - r.A22 * r.delta2))
        return mean, cov

    def delta2(self):
        r = self.r
        S2 = np.linalg.inv(corr(self.d.m, r.phi2))
        cov = np.linalg.inv(r.A22**2 * np.eye(self.d.m) + S2)
        return cov @ (r.A22 * (r.gamma_star - r.A21 * r.delta1)), cov

    def gamma_log_odds(self, t, gamma=None):
        r = self.r
        gamma = r.gamma if gamma is None else gamma
        G = self.G()
        out = []
        for g in (1, 0):
            gm = gamma.copy()
            gm[t] = g
            a = r.A11 * r.delta1 * gm
            out.append(aug_loglik(self.d.X @ self.s.beta + G @ a, self.d, self.s.w))
        eta = r.A21 * r.delta1[t] + r.A22 * r.delta2[t]
        return out[0] - out[1] + norm.logcdf(eta) - norm.logcdf(-eta)

    # Metropolis targets
    def log_A11(self, x):
        r = self.r
        lin = self.d.X @ self.s.beta + math.exp(x) * self.Gstar() @ r.delta1
        return aug_loglik(lin, self.d, self.s.w) - x * x / (2 * self.p.sigma2_A)

    def A21(self, a):
        r = self.r
        e = r.gamma_star - a * r.delta1 - r.A22 * r.delta2
        return -0.5 * e @ e - a * a / (2 * self.p.sigma2_A)

    def log_A22(self, x):
        r = self.r
        e = r.gamma_star - r.A21 * r.delta1 - math.exp(x) * r.delta2
        return -0.5 * e @ e - x * x / (2 * self.p.sigma2_A)

    def psi(self, psi, delta):
        S = corr(self.d.m, math.exp(psi))
        return (
            -0.5 * np.linalg.slogdet(S)[1]
            - 0.5 * delta @ np.linalg.inv(S) @ delta
            + self.p.alpha_phi * psi
            - self.p.beta_phi * math.exp(psi)
        )

    def psi_lambda(self, psi, lam=None):
        lam = self.s.lambda_star if lam is None else lam
        m, r = lam.shape
        K = np.kron(corr(m, math.exp(psi)), np.eye(r))
        v = lam.reshape(-1)
        return (
            -0.5 * np.linalg.slogdet(K)[1]
            - 0.5 * v @ np.linalg.inv(K) @ v
            + self.p.alpha_phi * psi
            - self.p.beta_phi * math.exp(psi)
        )

    def lambda_star(self, lam):
        m, r = lam.shape
        K = np.kron(corr(m, self.s.phi_lambda), np.eye(r))
        v = lam.reshape(-1)
        lin = self.d.X @ self.s.beta + self.G(lam) @ self.alpha()
        return aug_loglik(lin, self.d, self.s.w) - 0.5 * v @ np.linalg.inv(K) @ v


def random_case(seed, n=None, m=None, q=None, p=None):
    """Random tiny dataset and state with n <= 10, m <= 3, q <= 2."""
    gen = np.random.default_rng(seed)
    n = n or int(gen.integers(2, 11))
    m = m or int(gen.integers(1, 4))
    q = q or int(gen.integers(1, 3))
    p = p or int(gen.integers(1, 4))
    data = make_dataset(n, m, q, p=p, seed=seed)
    priors = Priors(
        sigma2_beta=float(gen.uniform(0.5, 4.0)),
        alpha_phi=float(gen.uniform(0.5, 3.0)),
        beta_phi=float(gen.uniform(0.5, 3.0)),
        sigma2_A=float(gen.uniform(0.3, 2.0)),
    )
    state = random_state(data, seed, priors)
    r = state.risk
    for name in ("phi1", "phi2"):
        setattr(r, name, float(gen.uniform(0.2, 3.0)))
    state.corr1, state.corr2 = build_exp_corr(m, r.phi1), build_exp_corr(m, r.phi2)
    state.phi_lambda = float(gen.uniform(0.2, 3.0))
    state.corr_lambda = build_exp_corr(m, state.phi_lambda)
    # random mixed inclusion, with gamma* consistent with gamma
    g = (gen.random(m) < 0.6).astype(np.int64)
    r.gamma = g
    r.gamma_star = np.where(g == 1, 1.0, -1.0) * np.abs(gen.standard_normal(m)) + np.where(g == 1, 1e-3, -1e-3)
    r.A11 = float(np.exp(gen.normal(0, 0.5)))
    state.refresh_predictor()
    return data, priors, state


def replay_accept(log_ratio, gen):
    """Mirror of the Metropolis decision: the uniform is only consumed when needed."""
    if not math.isfinite(log_ratio):
        return log_ratio > 0
    return log_ratio >= 0 or math.log(gen.random()) < log_ratio


def kernel(data, priors):
    return Sampler(data, priors, SweepConfig(n_burn=0, n_keep=0, adapt=False))


def replay_scalar(name, seed, data, priors, state):
    """Run one kernel move and predict its outcome independently; returns (kernel value, oracle value)."""
    ker = kernel(data, priors)
    orc = Oracle(copy.deepcopy(state), data, priors)
    gen = RngStream(seed).gen
    step = ker.steps[name]
    r = orc.r
    if name == "log_A11":
        cur = math.log(r.A11)
        prop = cur + step * gen.standard_normal()
        ok = replay_accept(orc.log_A11(prop) - orc.log_A11(cur), gen)
        expect = math.exp(prop) if ok else r.A11
        ker.update_A11(state, RngStream(seed))
        return state.risk.A11, expect
    if name == "A21":
        prop = r.A21 + step * gen.standard_normal()
        ok = replay_accept(orc.A21(prop) - orc.A21(r.A21), gen)
        ker.update_A21(state, RngStream(seed))
        return state.risk.A21, prop if ok else r.A21
    if name == "log_A22":
        cur = math.log(r.A22)
        prop = cur + step * gen.standard_normal()
        ok = replay_accept(orc.log_A22(prop) - orc.log_A22(cur), gen)
        ker.update_A22(state, RngStream(seed))
        return state.risk.A22, math.exp(prop) if ok else r.A22
    if name in ("psi1", "psi2"):
        which = int(name[-1])
        phi = r.phi1 if which == 1 else r.phi2
        delta = r.delta1 if which == 1 else r.delta2
        cur = math.log(phi)
        prop = cur + step * gen.standard_normal()
        ok = replay_accept(orc.psi(prop, delta) - orc.psi(cur, delta), gen)
        ker.update_phi(state, RngStream(seed), which)
        got = state.risk.phi1 if which == 1 else state.risk.phi2
        return got, math.exp(prop) if ok else phi
    if name == "psi_lambda":
        cur = math.log(orc.s.phi_lambda)
        prop = cur + step * gen.standard_normal()
        ok = replay_accept(orc.psi_lambda(prop) - orc.psi_lambda(cur), gen)
        ker.update_phi_lambda(state, RngStream(seed))
        return state.phi_lambda, math.exp(prop) if ok else orc.s.phi_lambda
    raise ValueError(name)


def replay_lambda(seed, data, priors, state):
    ker = kernel(data, priors)
    orc = Oracle(copy.deepcopy(state), data, priors)
    gen = RngStream(seed).gen
    lam = orc.s.lambda_star.copy()
    cond_sd = 1.0 / np.sqrt(np.diag(np.linalg.inv(corr(data.m, orc.s.phi_lambda))))
    for t in range(data.m):
        prop = lam.copy()
        prop[t] = lam[t] + ker.lambda_steps[t] * cond_sd[t] * gen.standard_normal(lam.shape[1])
        if replay_accept(orc.lambda_star(prop) - orc.lambda_star(lam), gen):
            lam = prop
    ker.update_lambda_star(state, RngStream(seed))
    return state.lambda_star, lam


def replay_gamma(seed, data, priors, state):
    ker = kernel(data, priors)
    orc = Oracle(copy.deepcopy(state), data, priors)
    gen = RngStream(seed).gen
    gamma = orc.r.gamma.copy()
    for t in range(data.m):
        gamma[t] = int(gen.random() < expit(orc.gamma_log_odds(t, gamma)))
    ker.update_gamma(state, RngStream(seed))
    return state.risk.gamma, gamma
