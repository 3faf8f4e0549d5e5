"""Synthetic benchmark: data generation under Settings 1-5 x Sub-Settings A-C, and scoring.

Setting s means s pollutants drive the mixture. Sub-Setting A keeps one
weight vector for every period, B keeps the important set but redraws the
non-zero weights per period, C redraws the important set, its interactions
and the weights per period (only the number of important mains is fixed).
"""

from __future__ import annotations

import json
import math
import traceback
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field
from pathlib import Path

import numpy as np
from scipy.special import expit

from .errors import InputError
from .inference import (
    conditional_odds_ratio_means,
    conditional_weight_means,
    critical_set,
    decide_windows,
    select_weights,
)
from .model import ExposureDataset, Priors, iqr_standardize
from .rng import RngStream, draw_dirichlet
from .sampler import ChainSamples, SweepConfig, run_chain
from .weights import expand_exposures, n_components, pair_index

METHODS = ("cwvsmix", "ew")


@dataclass
class SimScenario:
    setting: int = 1
    sub_setting: str = "A"
    n: int = 2534
    m: int = 20
    q: int = 5
    effect_size: float = 0.23
    max_window: int = 7
    interaction_prob: float = 0.5
    exposure: str = "ar1"  # "ar1" or "resample"
    ar1_lag1: float = 0.9
    ar1_cross: float = 0.6
    profiles_path: str | None = None
    profiles: np.ndarray | None = field(default=None, repr=False)

    def __post_init__(self):
        self.sub_setting = str(self.sub_setting).upper()
        if self.sub_setting not in ("A", "B", "C"):
            raise InputError(f"unknown sub-setting {self.sub_setting!r}")
        if not 1 <= self.setting <= self.q:
            raise InputError(f"setting {self.setting} needs 1..q important pollutants (q={self.q})")
        if self.setting == 1 and self.sub_setting == "B":
            raise InputError("Setting 1B is infeasible: a single important pollutant always has weight one")
        if self.n < 1 or self.m < 1 or self.q < 1 or self.max_window < 1:
            raise InputError("n, m, q and max_window must be positive")
        if self.exposure not in ("ar1", "resample"):
            raise InputError(f"unknown exposure source {self.exposure!r}")
        if not (-1 < self.ar1_lag1 < 1 and -1 / max(self.q - 1, 1) < self.ar1_cross < 1):
            raise InputError("AR(1) exposure correlations out of range")
        if not 0 <= self.interaction_prob <= 1:
            raise InputError("interaction probability must lie in [0, 1]")

    @property
    def label(self) -> str:
        return f"{self.setting}{self.sub_setting}"

    def to_dict(self) -> dict:
        d = asdict(self)
        d.pop("profiles")
        return d

    @classmethod
    def from_dict(cls, d: dict, base_dir: Path | None = None) -> "SimScenario":
        known = {f for f in cls.__dataclass_fields__ if f != "profiles"}
        unknown = set(d) - known
        if unknown:
            raise InputError(f"unknown scenario keys: {sorted(unknown)}")
        sc = cls(**d)
        if sc.exposure == "resample":
            if not sc.profiles_path:
                raise InputError("resample exposure needs profiles_path")
            path = Path(sc.profiles_path)
            if base_dir is not None and not path.is_absolute():
                path = base_dir / path
            sc.profiles = load_profiles(path, sc.m, sc.q)
        return sc

    @classmethod
    def from_json(cls, path) -> "SimScenario":
        path = Path(path)
        try:
            d = json.loads(path.read_text())
        except (OSError, json.JSONDecodeError) as exc:
            raise InputError(f"cannot read scenario file {path}: {exc}") from exc
        return cls.from_dict(d, base_dir=path.parent)


def load_profiles(path, m: int, q: int) -> np.ndarray:
    """Exposure profiles, one subject per row, columns period-major (z_1(1)..z_q(1), ..., z_q(m))."""
    try:
        arr = np.loadtxt(path, delimiter=",", ndmin=2)
    except (OSError, ValueError) as exc:
        raise InputError(f"cannot read exposure profiles {path}: {exc}") from exc
    if arr.shape[1] != m * q:
        raise InputError(f"profiles need {m * q} columns, found {arr.shape[1]}")
    return arr


@dataclass
class SimTruth:
    critical: np.ndarray  # bool, length m
    weights: np.ndarray  # m x r
    alpha: np.ndarray  # length m
    window_start: int  # 1-based
    window_length: int

    @property
    def critical_periods(self) -> set[int]:
        return {int(t) + 1 for t in np.flatnonzero(self.critical)}


@dataclass
class SimMetrics:
    cw_accuracy: float
    amse_lambda_cw: float
    amse_exp_alpha: float
    main_accuracy: float | None = None
    interaction_accuracy: float | None = None
    flagged: bool = False


# --------------------------------------------------------------------------
# generation
# --------------------------------------------------------------------------


def synthetic_exposures(n: int, m: int, q: int, lag1: float, cross: float, gen: np.random.Generator) -> np.ndarray:
    """Stationary AR(1) over periods with equicorrelated pollutant innovations."""
    corr = np.full((q, q), cross)
    np.fill_diagonal(corr, 1.0)
    chol = np.linalg.cholesky(corr)
    Z = np.empty((n, m, q))
    Z[:, 0] = gen.standard_normal((n, q)) @ chol.T
    scale = math.sqrt(1.0 - lag1 * lag1)
    for t in range(1, m):
        Z[:, t] = lag1 * Z[:, t - 1] + scale * (gen.standard_normal((n, q)) @ chol.T)
    return Z


def _draw_pattern(q: int, s: int, p_inter: float, gen) -> tuple[np.ndarray, np.ndarray]:
    """Important mains and the active interactions among them (strong hierarchy)."""
    mains = np.sort(gen.choice(q, size=s, replace=False))
    j, k = pair_index(q)
    eligible = np.isin(j, mains) & np.isin(k, mains)
    coin = gen.random(j.size) < p_inter
    return mains, np.flatnonzero(eligible & coin)


def _fill_weights(q: int, mains, inters, rng: RngStream) -> np.ndarray:
    comps = np.concatenate([np.asarray(mains), q + np.asarray(inters, dtype=int)]).astype(int)
    out = np.zeros(n_components(q))
    out[comps] = draw_dirichlet(np.ones(comps.size), rng)
    return out


def generate_weights(scenario: SimScenario, rng: RngStream) -> np.ndarray:
    q, m, s = scenario.q, scenario.m, scenario.setting
    gen = rng.gen
    W = np.zeros((m, n_components(q)))
    if scenario.sub_setting == "C":
        for t in range(m):
            mains, inters = _draw_pattern(q, s, scenario.interaction_prob, gen)
            W[t] = _fill_weights(q, mains, inters, rng)
        return W
    mains, inters = _draw_pattern(q, s, scenario.interaction_prob, gen)
    if scenario.sub_setting == "A":
        W[:] = _fill_weights(q, mains, inters, rng)
    else:
        for t in range(m):
            W[t] = _fill_weights(q, mains, inters, rng)
    return W


def generate_dataset(scenario: SimScenario, rng: RngStream) -> tuple[ExposureDataset, SimTruth]:
    gen = rng.gen
    n, m, q = scenario.n, scenario.m, scenario.q
    if scenario.exposure == "resample":
        if scenario.profiles is None:
            raise InputError("resample exposure needs loaded profiles")
        rows = gen.integers(0, scenario.profiles.shape[0], size=n)
        raw = scenario.profiles[rows].reshape(n, m, q)
    else:
        raw = synthetic_exposures(n, m, q, scenario.ar1_lag1, scenario.ar1_cross, gen)
    Z, scaling = iqr_standardize(raw)

    weights = generate_weights(scenario, rng)
    m0 = int(gen.integers(1, min(scenario.max_window, m) + 1))
    t0 = int(gen.integers(1, m - m0 + 2))
    critical = np.zeros(m, dtype=bool)
    critical[t0 - 1 : t0 - 1 + m0] = True
    alpha = np.where(critical, scenario.effect_size, 0.0)

    G = np.einsum("itc,tc->it", expand_exposures(Z), weights)
    y = (gen.random(n) < expit(G @ alpha)).astype(float)
    data = ExposureDataset(
        y=y,
        X=np.ones((n, 1)),
        Z=Z,
        scaling=scaling,
        pollutants=tuple(f"p{j + 1}" for j in range(q)),
        covariates=("intercept",),
    )
    return data, SimTruth(critical, weights, alpha, t0, m0)


# --------------------------------------------------------------------------
# scoring
# --------------------------------------------------------------------------


def score_cw_accuracy(truth: SimTruth, estimated) -> float:
    """Fraction of periods whose estimated membership matches the truth.

    ``estimated`` is a set of 1-based periods or a list of window decisions.
    """
    if not isinstance(estimated, (set, frozenset)):
        estimated = critical_set(estimated)
    est = np.zeros(truth.critical.size, dtype=bool)
    for t in estimated:
        if not 1 <= t <= est.size:
            raise InputError(f"period {t} out of range")
        est[t - 1] = True
    return float(np.mean(est == truth.critical))


def score_amse_lambda(truth: SimTruth, estimate) -> float:
    """Mean squared weight error over true critical periods and all components.

    ``estimate`` is ChainSamples (conditional posterior means), an m x r
    array, or a scalar applied to every component (the EW constant).
    """
    if isinstance(estimate, ChainSamples):
        estimate, _ = conditional_weight_means(estimate)
    est = np.broadcast_to(np.asarray(estimate, dtype=float), truth.weights.shape)
    cw = truth.critical
    if not cw.any():
        return 0.0
    return float(np.mean((truth.weights[cw] - est[cw]) ** 2))


def score_amse_exp_alpha(truth: SimTruth, estimate) -> float:
    if isinstance(estimate, ChainSamples):
        estimate, _ = conditional_odds_ratio_means(estimate)
    est = np.broadcast_to(np.asarray(estimate, dtype=float), truth.alpha.shape)
    return float(np.mean((np.exp(truth.alpha) - est) ** 2))


def score_weight_selection(truth: SimTruth, selection) -> tuple[float, float | None]:
    """Classification accuracy of selected vs truly non-zero weights on true critical periods."""
    sel = selection.selected if hasattr(selection, "selected") else np.asarray(selection, dtype=bool)
    q = int(round((math.sqrt(8 * truth.weights.shape[1] + 1) - 1) / 2))
    cw = truth.critical
    if not cw.any():
        return float("nan"), None
    hit = sel[cw] == (truth.weights[cw] > 0)
    main = float(hit[:, :q].mean())
    inter = float(hit[:, q:].mean()) if q > 1 else None
    return main, inter


def score_method(truth: SimTruth, samples: ChainSamples, method: str, ci_level: float = 0.90) -> SimMetrics:
    decisions = decide_windows(samples, ci_level)
    _, fb_w = conditional_weight_means(samples)
    _, fb_a = conditional_odds_ratio_means(samples)
    flagged = bool(fb_w[truth.critical].any() or fb_a.any())
    if method == "ew":
        q = samples.q
        amse_l = score_amse_lambda(truth, 2.0 / (q * (q + 1)))
        main = inter = None
    else:
        amse_l = score_amse_lambda(truth, samples)
        main, inter = score_weight_selection(truth, select_weights(samples))
    return SimMetrics(
        cw_accuracy=score_cw_accuracy(truth, decisions),
        amse_lambda_cw=amse_l,
        amse_exp_alpha=score_amse_exp_alpha(truth, samples),
        main_accuracy=main,
        interaction_accuracy=inter,
        flagged=flagged,
    )


# --------------------------------------------------------------------------
# methods and the study driver
# --------------------------------------------------------------------------


def run_ew_baseline(data: ExposureDataset, priors: Priors, config: SweepConfig, rng: RngStream) -> ChainSamples:
    """The risk model on the equally weighted exposure (weights frozen at 2/(q(q+1)))."""
    return run_chain(data, priors, config, rng, ew=True)


def run_method(method: str, data, priors, config, rng) -> ChainSamples:
    if method == "cwvsmix":
        return run_chain(data, priors, config, rng)
    if method == "ew":
        return run_ew_baseline(data, priors, config, rng)
    raise InputError(f"unknown method {method!r}; available: {', '.join(METHODS)}")


def _replicate(args) -> list[dict]:
    scenario, index, methods, priors, config, rng, ci_level = args
    rep_rng = rng.child(index)
    out = []
    try:
        data, truth = generate_dataset(scenario, rep_rng.child(0))
    except Exception as exc:  # flagged, study continues
        return [{"replicate": index, "method": mth, "failed": True, "error": repr(exc)} for mth in methods]
    for method in methods:
        chain_rng = rep_rng.child(1 + METHODS.index(method))
        rec = {
            "replicate": index,
            "method": method,
            "seed": chain_rng.seed,
            "stream_id": chain_rng.stream_id,
            "path": list(chain_rng.path),
            "window_start": truth.window_start,
            "window_length": truth.window_length,
            "prevalence": float(data.y.mean()),
        }
        try:
            samples = run_method(method, data, priors, config, chain_rng)
            rec.update(asdict(score_method(truth, samples, method, ci_level)))
            rec["failed"] = False
        except Exception as exc:
            rec.update(failed=True, error=repr(exc), trace=traceback.format_exc(limit=3))
        out.append(rec)
    return out


@dataclass
class StudyResult:
    scenario: SimScenario
    records: list[dict]
    summary: dict  # method -> metric -> {"mean", "se", "n"}

    def table_rows(self) -> list[dict]:
        rows = []
        for method, metrics in self.summary.items():
            for metric, stats in metrics.items():
                rows.append({"method": method, "metric": metric, **stats})
        return rows


SUMMARY_METRICS = ("cw_accuracy", "amse_lambda_cw", "amse_exp_alpha", "main_accuracy", "interaction_accuracy")


def summarize_records(records: list[dict], methods) -> dict:
    summary = {}
    for method in methods:
        ok = [r for r in records if r["method"] == method and not r.get("failed")]
        stats = {}
        for metric in SUMMARY_METRICS:
            vals = np.array([r[metric] for r in ok if r.get(metric) is not None], dtype=float)
            vals = vals[np.isfinite(vals)]
            if vals.size == 0:
                continue
            se = float(vals.std(ddof=1) / math.sqrt(vals.size)) if vals.size > 1 else None
            stats[metric] = {"mean": float(vals.mean()), "se": se, "n": int(vals.size)}
        summary[method] = stats
    return summary


def run_study(
    scenario: SimScenario,
    n_replicates: int,
    methods,
    rng: RngStream,
    config: SweepConfig | None = None,
    priors: Priors | None = None,
    workers: int = 1,
    ci_level: float = 0.90,
) -> StudyResult:
    """Generate ``n_replicates`` datasets, then fit and score each method on every one.

    Replicate i uses ``rng.child(i)``; results do not depend on ``workers``.
    """
    methods = list(methods)
    for mth in methods:
        if mth not in METHODS:
            raise InputError(f"unknown method {mth!r}; available: {', '.join(METHODS)}")
    if n_replicates < 1:
        raise InputError("need at least one replicate")
    config = config or SweepConfig.simulation_preset()
    priors = priors or Priors()
    jobs = [(scenario, i, methods, priors, config, rng, ci_level) for i in range(n_replicates)]
    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            chunks = list(pool.map(_replicate, jobs))
    else:
        chunks = [_replicate(j) for j in jobs]
    records = [rec for chunk in chunks for rec in chunk]
    return StudyResult(scenario, records, summarize_records(records, methods))
