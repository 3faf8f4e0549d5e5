"""Acceptance suite: one test per criterion, each printing a PASS/FAIL line.

Run alone with ``pytest tests/test_acceptance.py -v`` or ``python tests/test_acceptance.py``.
The desk benchmark (criterion 6) dominates the runtime, roughly 20 minutes on one core.
"""

import copy
import json
import math
import sys
import tempfile
import time
from pathlib import Path

import numpy as np
import pytest

sys.path.insert(0, str(Path(__file__).parent))

from conftest import make_dataset  # noqa: E402
from oracles import Oracle, random_case, replay_gamma, replay_lambda, replay_scalar  # noqa: E402

from cwvsmix.cli import main as cli_main  # noqa: E402
from cwvsmix.inference import geweke_diagnostic  # noqa: E402
from cwvsmix.model import ExposureDataset, Priors  # noqa: E402
from cwvsmix.rng import (  # noqa: E402
    RngStream,
    draw_dirichlet,
    draw_polya_gamma,
    draw_truncated_normal,
)
from cwvsmix.sampler import (  # noqa: E402
    Sampler,
    SweepConfig,
    beta_conditional,
    delta1_conditional,
    delta2_conditional,
    draw_prior_state,
    gamma_log_odds,
    log_target_A21,
    log_target_lambda_star,
    log_target_log_A11,
    log_target_log_A22,
    log_target_psi,
    log_target_psi_lambda,
    moments_from_precision,
    run_chain,
    simulate_outcomes,
)
from cwvsmix.simulation import SimScenario, run_study  # noqa: E402
from cwvsmix.weights import n_components, pair_index, transform_rows  # noqa: E402

RESULTS: list[str] = []


def report(k: int, title: str, ok: bool, detail: str, seconds: float):
    line = f"CRITERION {k} [{'PASS' if ok else 'FAIL'}] {title}: {detail} ({seconds:.1f} s)"
    RESULTS.append(line)
    print(line)
    return ok


def batch_se(x: np.ndarray, n_batches: int = 50) -> np.ndarray:
    """Batch-means standard error of the mean, column-wise."""
    x = x[: x.shape[0] // n_batches * n_batches]
    means = x.reshape(n_batches, -1, *x.shape[1:]).mean(axis=1)
    return means.std(axis=0, ddof=1) / math.sqrt(n_batches)


# --------------------------------------------------------------------------
# 1. joint-distribution test
# --------------------------------------------------------------------------


def _scalars(st) -> dict:
    r = st.risk
    out = {f"beta[{j}]": st.beta[j] for j in range(st.beta.size)}
    out.update(A11=r.A11, A21=r.A21, A22=r.A22, phi_lambda=st.phi_lambda, phi1=r.phi1, phi2=r.phi2)
    for t in range(r.delta1.size):
        out[f"delta1[{t + 1}]"] = r.delta1[t]
        out[f"delta2[{t + 1}]"] = r.delta2[t]
        out[f"gamma[{t + 1}]"] = r.gamma[t]
        out[f"gamma_star[{t + 1}]"] = r.gamma_star[t]
        out[f"alpha[{t + 1}]"] = r.alpha[t]
    L = st.lambda_star
    for t in range(L.shape[0]):
        for c in range(L.shape[1]):
            out[f"lambda_star[{t + 1},{c + 1}]"] = L[t, c]
    return out


def test_criterion_1_joint_distribution():
    start = time.perf_counter()
    n, m, q, draws, thin = 30, 4, 2, 5000, 5
    gen = np.random.default_rng(0)
    X = np.column_stack([np.ones(n), gen.standard_normal(n)])
    Z = gen.standard_normal((n, m, q))
    frame = ExposureDataset(y=np.zeros(n), X=X, Z=Z)
    # a unit-variance intercept prior keeps simulated outcomes from saturating
    priors = Priors(sigma2_beta=1.0)

    rng = RngStream(1, 1)
    marginal = [_scalars(draw_prior_state(frame, priors, rng)) for _ in range(draws)]
    names = list(marginal[0])
    A = np.array([[d[k] for k in names] for d in marginal])

    rng = RngStream(1, 2)
    st = draw_prior_state(frame, priors, rng)
    kernel = Sampler(
        ExposureDataset(y=simulate_outcomes(st, rng), X=X, Z=Z), priors, SweepConfig(n_burn=0, n_keep=0, adapt=False)
    )
    successive = []
    for _ in range(draws):
        for _ in range(thin):
            kernel.sweep(st, rng)
            kernel.set_data(ExposureDataset(y=simulate_outcomes(st, rng), X=X, Z=Z))
        successive.append(_scalars(st))
    B = np.array([[d[k] for k in names] for d in successive])

    # first and second moments of every scalar
    A, B = np.hstack([A, A**2]), np.hstack([B, B**2])
    labels = names + [f"{k}^2" for k in names]
    se = np.sqrt(A.var(axis=0, ddof=1) / draws + batch_se(B) ** 2)
    z = (A.mean(axis=0) - B.mean(axis=0)) / se
    worst = int(np.argmax(np.abs(z)))
    elapsed = time.perf_counter() - start
    ok = bool(np.all(np.abs(z) < 4)) and elapsed < 600
    report(1, "joint-distribution test", ok,
           f"{len(labels)} moments, max |z| = {abs(z[worst]):.2f} at {labels[worst]}", elapsed)
    assert ok


# --------------------------------------------------------------------------
# 2. sampler moment suite
# --------------------------------------------------------------------------


def test_criterion_2_sampler_moments():
    start = time.perf_counter()
    checks = []
    for c in (0.0, 0.5, 1.0, 2.0, 5.0):
        x = draw_polya_gamma(np.full(100_000, c), RngStream(21, int(10 * c)))
        exact = 0.25 if c == 0 else math.tanh(c / 2) / (2 * c)
        checks.append((f"PG(1,{c:g}) mean", abs(x.mean() / exact - 1), 0.01))
        if c == 0:
            checks.append(("PG(1,0) variance", abs(x.var(ddof=1) * 24 - 1), 0.03))
    rng = RngStream(22)
    tn = draw_truncated_normal(np.zeros(100_000), 1.0, True, rng)
    checks.append(("half-normal mean", abs(tn.mean() / math.sqrt(2 / math.pi) - 1), 0.01))
    tn5 = draw_truncated_normal(np.full(100_000, 5.0), 1.0, True, rng)
    checks.append(("N(5,1) above zero mean", abs(tn5.mean() / 5 - 1) + (0 if np.all(tn5 > 0) else 1), 0.01))
    tnl = draw_truncated_normal(np.zeros(100_000), 1.0, False, rng)
    checks.append(("upper truncation side", 0.0 if np.all(tnl <= 0) else 1.0, 0.5))
    d = np.array([draw_dirichlet(np.ones(3), rng) for _ in range(100_000)])
    checks.append(("Dirichlet(1,1,1) means", float(np.abs(d.mean(axis=0) - 1 / 3).max()), 0.01))
    checks.append(("Dirichlet sums", float(np.abs(d.sum(axis=1) - 1).max()), 1e-12))
    elapsed = time.perf_counter() - start
    bad = [name for name, err, tol in checks if not err <= tol]
    ok = not bad and elapsed < 60
    report(2, "sampler moment suite", ok, f"{len(checks)} checks, failing: {bad or 'none'}", elapsed)
    assert ok


# --------------------------------------------------------------------------
# 3. oracle equivalence
# --------------------------------------------------------------------------


def _err(a, b) -> float:
    """Excess over the combined tolerance 1e-8 (abs) + 1e-8 (rel); <= 0 means within tolerance."""
    a, b = np.asarray(a, dtype=float), np.asarray(b, dtype=float)
    return float(np.max(np.abs(a - b) - 1e-8 * (1 + np.abs(b))))


def test_criterion_3_oracle_equivalence():
    start = time.perf_counter()
    worst: dict[str, float] = {}
    mismatched: dict[str, int] = {}

    def note(name, e):
        worst[name] = max(worst.get(name, -np.inf), e)

    for seed in range(200):
        data, priors, st = random_case(10_000 + seed)
        orc = Oracle(st, data, priors)
        for name, got, ref in (
            ("beta", moments_from_precision(*beta_conditional(st, data, priors)), orc.beta()),
            ("delta1", moments_from_precision(*delta1_conditional(st, data)), orc.delta1()),
            ("delta2", moments_from_precision(*delta2_conditional(st)), orc.delta2()),
        ):
            note(f"{name} mean", _err(got[0], ref[0]))
            note(f"{name} cov", _err(got[1], ref[1]))
        for t in range(data.m):
            note("gamma log odds", _err(gamma_log_odds(st, data, t), orc.gamma_log_odds(t)))
        gen = np.random.default_rng(seed)
        a, b = gen.normal(0, 1, 2)
        pa, pb = gen.uniform(-1.5, 1.0, 2)
        L = st.lambda_star
        L2 = L + gen.normal(0, 0.7, L.shape)
        pairs = {
            "log A11": (log_target_log_A11(a, st, data, priors) - log_target_log_A11(b, st, data, priors),
                        orc.log_A11(a) - orc.log_A11(b)),
            "A21": (log_target_A21(a, st.risk, priors) - log_target_A21(b, st.risk, priors), orc.A21(a) - orc.A21(b)),
            "log A22": (log_target_log_A22(a, st.risk, priors) - log_target_log_A22(b, st.risk, priors),
                        orc.log_A22(a) - orc.log_A22(b)),
            "psi1": (log_target_psi(pa, st.risk.delta1, priors) - log_target_psi(pb, st.risk.delta1, priors),
                     orc.psi(pa, st.risk.delta1) - orc.psi(pb, st.risk.delta1)),
            "psi2": (log_target_psi(pa, st.risk.delta2, priors) - log_target_psi(pb, st.risk.delta2, priors),
                     orc.psi(pa, st.risk.delta2) - orc.psi(pb, st.risk.delta2)),
            "psi_lambda": (log_target_psi_lambda(pa, L, priors) - log_target_psi_lambda(pb, L, priors),
                           orc.psi_lambda(pa) - orc.psi_lambda(pb)),
            "lambda*": (log_target_lambda_star(L2, st, data) - log_target_lambda_star(L, st, data),
                        orc.lambda_star(L2) - orc.lambda_star(L)),
        }
        for name, (got, ref) in pairs.items():
            note(f"target {name}", _err(got, ref))
        # the kernel's own accept/reject decisions, replayed against the dense targets
        for name in ("log_A11", "A21", "log_A22", "psi1", "psi2", "psi_lambda"):
            d2, p2, s2 = data, priors, copy.deepcopy(st)
            got, ref = replay_scalar(name, 20_000 + seed, d2, p2, s2)
            if got != pytest.approx(ref, rel=1e-12):
                mismatched[name] = mismatched.get(name, 0) + 1
        got, ref = replay_lambda(30_000 + seed, data, priors, copy.deepcopy(st))
        if not np.allclose(got, ref, rtol=1e-12, atol=0):
            mismatched["lambda*"] = mismatched.get("lambda*", 0) + 1
        got, ref = replay_gamma(40_000 + seed, data, priors, copy.deepcopy(st))
        if not np.array_equal(got, ref):
            mismatched["gamma"] = mismatched.get("gamma", 0) + 1
    elapsed = time.perf_counter() - start
    over = {k: v for k, v in worst.items() if v > 0}
    ok = not over and not mismatched and elapsed < 120
    report(3, "oracle equivalence", ok,
           f"200 cases x {len(worst)} formulas within 1e-8, 8 kernel replays; "
           f"out of tolerance: {over or 'none'}, replay mismatches: {mismatched or 'none'}", elapsed)
    assert ok


# --------------------------------------------------------------------------
# 4. weight-transform invariants
# --------------------------------------------------------------------------


def test_criterion_4_weight_invariants():
    start = time.perf_counter()
    problems = []
    gen = np.random.default_rng(4)
    for q in range(1, 7):
        n = 10_000
        lam = gen.standard_normal((n, n_components(q)))
        w = transform_rows(lam, q)
        s = w.sum(axis=1)
        if not np.all((s == 0) | (np.abs(s - 1) <= 1e-12)):
            problems.append(f"q={q} sum")
        if q > 1:
            j, k = pair_index(q)
            if np.any((w[:, q:] > 0) & ~((w[:, j] > 0) & (w[:, k] > 0))):
                problems.append(f"q={q} hierarchy")
        p = 2.0**-q
        zero = float(np.mean(s == 0))
        if abs(zero - p) > 3 * math.sqrt(p * (1 - p) / n):
            problems.append(f"q={q} zero-frequency {zero:.4f} vs {p:.4f}")
    elapsed = time.perf_counter() - start
    ok = not problems and elapsed < 30
    report(4, "weight-transform invariants", ok, f"10^4 draws for each q in 1..6; problems: {problems or 'none'}", elapsed)
    assert ok


# --------------------------------------------------------------------------
# 5. prior recovery
# --------------------------------------------------------------------------


def test_criterion_5_prior_recovery():
    start = time.perf_counter()
    data = make_dataset(200, 5, 2, seed=3)
    config = SweepConfig(n_burn=2000, n_keep=5000, thin=10, disconnect_risk=True)
    s = run_chain(data, Priors(), config, RngStream(11))
    # Gamma(1, 1) decay prior: E[exp(-phi)] = 1/2 is the expected lag-1 correlation
    lines, ok = [], True
    for name, arr in (("delta1", s.delta1), ("delta2", s.delta2), ("lambda*", s.lambda_star)):
        a = arr.reshape(s.n_draws, s.m, -1)
        for label, trace, target in (
            ("mean", a.mean(axis=(1, 2)), 0.0),
            ("variance", (a**2).mean(axis=(1, 2)), 1.0),
            ("lag-1", (a[:, 1:] * a[:, :-1]).mean(axis=(1, 2)), 0.5),
        ):
            z = (trace.mean() - target) / batch_se(trace)
            ok &= abs(z) < 3
            lines.append(f"{name} {label} {trace.mean():.3f} (z={z:+.2f})")
    elapsed = time.perf_counter() - start
    ok = ok and elapsed < 300
    report(5, "prior recovery", ok, "; ".join(lines), elapsed)
    assert ok


# --------------------------------------------------------------------------
# 6. desk-scale benchmark
# --------------------------------------------------------------------------


def test_criterion_6_desk_benchmark():
    start = time.perf_counter()
    scenario = SimScenario(setting=1, sub_setting="A", n=1000, m=10, q=3, effect_size=0.23)
    config = SweepConfig(n_burn=5000, n_keep=1000, thin=5)
    result = run_study(scenario, 20, ["cwvsmix", "ew"], RngStream(2024), config)
    cw, ew = result.summary["cwvsmix"], result.summary["ew"]
    failed = sum(1 for r in result.records if r.get("failed"))
    acc_c, acc_e = cw["cw_accuracy"]["mean"], ew["cw_accuracy"]["mean"]
    amse_c, amse_e = cw["amse_lambda_cw"]["mean"], ew["amse_lambda_cw"]["mean"]
    elapsed = time.perf_counter() - start
    ok = failed == 0 and acc_c >= 0.85 and acc_c >= acc_e and amse_c < amse_e and elapsed < 4 * 3600
    report(6, "desk-scale benchmark", ok,
           f"CW accuracy CWVSmix {acc_c:.4f} (SE {cw['cw_accuracy']['se']:.4f}) vs EW {acc_e:.4f}; "
           f"AMSE(lambda_cw) CWVSmix {amse_c:.4f} vs EW {amse_e:.4f}; failed replicates {failed}", elapsed)
    assert ok


# --------------------------------------------------------------------------
# 7. determinism
# --------------------------------------------------------------------------


def _snapshot(d: Path) -> dict:
    return {p.name: p.read_bytes() for p in sorted(d.iterdir()) if p.name != "timing.json"}


def test_criterion_7_determinism():
    start = time.perf_counter()
    with tempfile.TemporaryDirectory() as tmp:
        tmp = Path(tmp)
        sc = tmp / "scenario.json"
        sc.write_text(json.dumps({"setting": 2, "sub_setting": "A", "n": 200, "m": 5, "q": 2}))
        codes = []
        for tag in ("a", "b"):
            root = tmp / tag
            codes.append(cli_main(["simulate", "--scenario", str(sc), "--out", str(root / "sim"), "--seed", "3"]))
            codes.append(cli_main(["fit", "--data", str(tmp / "a" / "sim" / "data.csv"), "--out", str(root / "fit"),
                                   "--seed", "4", "--burn", "300", "--keep", "200", "--thin", "2"]))
            codes.append(cli_main(["diagnose", "--samples", str(root / "fit")]))
            codes.append(cli_main(["benchmark", "--scenario", str(sc), "--replicates", "2", "--methods", "cwvsmix,ew",
                                   "--out", str(root / "bench"), "--seed", "5",
                                   "--burn", "100", "--keep", "50", "--thin", "2"]))
        same = {sub: _snapshot(tmp / "a" / sub) == _snapshot(tmp / "b" / sub) for sub in ("sim", "fit", "bench")}
        n_files = sum(len(_snapshot(tmp / "a" / sub)) for sub in same)
    elapsed = time.perf_counter() - start
    ok = all(c == 0 for c in codes) and all(same.values()) and elapsed < 60
    report(7, "determinism", ok, f"{n_files} files across simulate/fit/diagnose/benchmark, identical: {same}", elapsed)
    assert ok


# --------------------------------------------------------------------------
# 8. Geweke calibration
# --------------------------------------------------------------------------


def test_criterion_8_geweke_calibration():
    start = time.perf_counter()
    gen = np.random.default_rng(8)
    z = np.array([geweke_diagnostic(gen.standard_normal(10_000)) for _ in range(1000)])
    rate = float(np.mean(np.abs(z) > 1.96))
    x = gen.standard_normal(10_000)
    x[5000:] += 2.0
    shift = abs(geweke_diagnostic(x))
    elapsed = time.perf_counter() - start
    ok = 0.03 <= rate <= 0.07 and shift > 5 and elapsed < 60
    report(8, "Geweke calibration", ok, f"rejection rate {100 * rate:.1f}% over 1000 iid chains; shifted chain |z| = {shift:.1f}", elapsed)
    assert ok


if __name__ == "__main__":
    sys.exit(pytest.main([__file__, "-q", "-s"]))
