"""Decision rules, interpretation formulas and convergence diagnostics."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import InputError
from .sampler import ChainSamples
from .weights import pair_index

WINDOW_THRESHOLD = 0.50
MAIN_THRESHOLD = 0.50
INTERACTION_THRESHOLD = 0.125


@dataclass(frozen=True)
class WindowDecision:
    period: int  # 1-based
    pip: float
    or_mean: float
    ci_low: float
    ci_high: float
    verdict: str  # harmful | protective | null
    n_conditional: int

    @property
    def critical(self) -> bool:
        return self.verdict != "null"

    @property
    def no_conditional_draws(self) -> bool:
        return self.n_conditional == 0


def active_draws(samples: ChainSamples) -> np.ndarray:
    """Draws x periods mask of gamma(t) = 1 with a non-zero mixture row.

    A period whose latent weights are all non-positive has a zero mixture
    exposure, so alpha(t) there is unconstrained by the data. Conditional
    summaries skip those draws.
    """
    return (samples.gamma == 1) & (samples.weights.sum(axis=2) > 0)


def classify_window(pip: float, ci_low: float, ci_high: float, threshold: float = WINDOW_THRESHOLD) -> str:
    """Strict comparisons throughout: ties go to null."""
    if not pip > threshold:
        return "null"
    if ci_low > 1.0:
        return "harmful"
    if ci_high < 1.0:
        return "protective"
    return "null"


def decide_windows(
    samples: ChainSamples, ci_level: float = 0.90, threshold: float = WINDOW_THRESHOLD
) -> list[WindowDecision]:
    """Per-period PIP and the odds-ratio summary over active draws (see ``active_draws``)."""
    if not 0 < ci_level < 1:
        raise InputError("ci_level must lie in (0, 1)")
    lo_q, hi_q = (1 - ci_level) / 2, (1 + ci_level) / 2
    active = active_draws(samples)
    out = []
    for t in range(samples.m):
        pip = float((samples.gamma[:, t] == 1).mean()) if samples.n_draws else 0.0
        on = active[:, t]
        if on.any():
            odds = np.exp(samples.alpha[on, t])
            lo, hi = np.quantile(odds, [lo_q, hi_q])
            mean = float(odds.mean())
            verdict = classify_window(pip, lo, hi, threshold)
        else:
            lo = hi = mean = float("nan")
            verdict = "null"
        out.append(WindowDecision(t + 1, pip, mean, float(lo), float(hi), verdict, int(on.sum())))
    return out


def critical_set(decisions) -> set[int]:
    return {d.period for d in decisions if d.critical}


@dataclass(frozen=True)
class WeightSelection:
    """Inclusion probabilities and selection flags, shape m x q(q+1)/2."""

    prob: np.ndarray
    selected: np.ndarray
    q: int


def select_from_probs(
    prob: np.ndarray, q: int, main_threshold: float = MAIN_THRESHOLD, inter_threshold: float = INTERACTION_THRESHOLD
) -> np.ndarray:
    prob = np.atleast_2d(np.asarray(prob, dtype=float))
    sel = np.zeros(prob.shape, dtype=bool)
    sel[:, :q] = prob[:, :q] > main_threshold
    if q > 1:
        j, k = pair_index(q)
        sel[:, q:] = (prob[:, q:] > inter_threshold) & sel[:, j] & sel[:, k]
    return sel


def select_weights(
    samples: ChainSamples, main_threshold: float = MAIN_THRESHOLD, inter_threshold: float = INTERACTION_THRESHOLD
) -> WeightSelection:
    """Select mains above ``main_threshold``; interactions need both parents selected too."""
    q = samples.q
    prob = (samples.weights > 0).mean(axis=0) if samples.n_draws else np.zeros(samples.weights.shape[1:])
    return WeightSelection(prob, select_from_probs(prob, q, main_threshold, inter_threshold), q)


def conditional_weight_means(samples: ChainSamples) -> tuple[np.ndarray, np.ndarray]:
    """E{weight | gamma(t) = 1, non-zero row} per period and component.

    Periods with no such draws fall back to the unconditional mean; the
    returned boolean vector flags them.
    """
    m, r = samples.weights.shape[1:]
    out = np.zeros((m, r))
    fallback = np.zeros(m, dtype=bool)
    active = active_draws(samples)
    for t in range(m):
        on = active[:, t]
        if on.any():
            out[t] = samples.weights[on, t].mean(axis=0)
        else:
            fallback[t] = True
            out[t] = samples.weights[:, t].mean(axis=0) if samples.n_draws else 0.0
    return out, fallback


def conditional_odds_ratio_means(samples: ChainSamples) -> tuple[np.ndarray, np.ndarray]:
    """E[exp(alpha(t)) | gamma(t) = 1, non-zero row]; unconditional fallback flagged as above."""
    m = samples.m
    out = np.ones(m)
    fallback = np.zeros(m, dtype=bool)
    # a zero mixture row contributes nothing, so its effective odds ratio is 1
    odds = np.exp(np.where(samples.weights.sum(axis=2) > 0, samples.alpha, 0.0))
    active = active_draws(samples)
    for t in range(m):
        on = active[:, t]
        if on.any():
            out[t] = odds[on, t].mean()
        else:
            fallback[t] = True
            out[t] = odds[:, t].mean() if samples.n_draws else 1.0
    return out, fallback


# --------------------------------------------------------------------------
# interpretation
# --------------------------------------------------------------------------


def pollutant_effect(main, inter, alpha: float, z, j: int) -> float:
    """Log-odds change for a one-unit increase in pollutant j alone (0-based j)."""
    main = np.asarray(main, dtype=float)
    inter = np.asarray(inter, dtype=float)
    z = np.asarray(z, dtype=float)
    q = main.size
    a, b = pair_index(q)
    total = main[j]
    for c, (p1, p2) in enumerate(zip(a, b)):
        if p1 == j:
            total += inter[c] * z[p2]
        elif p2 == j:
            total += inter[c] * z[p1]
    return float(total * alpha)


def mixture_effect(inter, alpha: float, z) -> float:
    """Log-odds change when every pollutant rises by one unit."""
    inter = np.asarray(inter, dtype=float)
    z = np.asarray(z, dtype=float)
    a, b = pair_index(z.size)
    return float((1.0 + np.sum(inter * (z[a] + z[b]))) * alpha)


# --------------------------------------------------------------------------
# Geweke
# --------------------------------------------------------------------------


def spectral_density_zero(x: np.ndarray, lag_frac: float = 0.04) -> float:
    """Parzen lag-window estimate of the spectral density at frequency zero.

    Truncation lag is ``lag_frac`` of the segment length (at least 1).
    Returns the long-run variance, i.e. n * Var(mean) asymptotically.
    """
    x = np.asarray(x, dtype=float)
    n = x.size
    d = x - x.mean()
    lag = max(1, int(lag_frac * n))
    nfft = 1 << int(np.ceil(np.log2(2 * n)))
    f = np.fft.rfft(d, nfft)
    acov = np.fft.irfft(f * np.conj(f), nfft)[: lag + 1] / n
    u = np.arange(1, lag + 1) / (lag + 1)
    taper = np.where(u <= 0.5, 1.0 - 6.0 * u**2 + 6.0 * u**3, 2.0 * (1.0 - u) ** 3)
    return float(acov[0] + 2.0 * np.sum(taper * acov[1:]))


def geweke_diagnostic(chain, frac_a: float = 0.1, frac_b: float = 0.5) -> float:
    """z-score comparing the mean of the first ``frac_a`` to the last ``frac_b`` of a chain."""
    x = np.asarray(chain, dtype=float)
    if x.ndim != 1 or x.size < 100:
        raise InputError("chain too short for the Geweke diagnostic (need >= 100 draws)")
    if not (0 < frac_a and 0 < frac_b and frac_a + frac_b <= 1):
        raise InputError("segment fractions must be positive and sum to at most 1")
    n = x.size
    a = x[: int(frac_a * n)]
    b = x[n - int(frac_b * n):]
    var = spectral_density_zero(a) / a.size + spectral_density_zero(b) / b.size
    if not var > 0:
        raise InputError("zero variance")
    return float((a.mean() - b.mean()) / np.sqrt(var))


def summarize_traces(samples: ChainSamples, quantiles=(0.05, 0.5, 0.95)) -> list[dict]:
    rows = []
    for name, trace in samples.scalar_traces().items():
        row = {"parameter": name, "mean": float(np.mean(trace)), "sd": float(np.std(trace, ddof=1))}
        for qq, v in zip(quantiles, np.quantile(trace, quantiles)):
            row[f"q{qq:g}"] = float(v)
        try:
            row["geweke_z"] = geweke_diagnostic(trace)
        except InputError:
            row["geweke_z"] = float("nan")
        rows.append(row)
    return rows
