"""Command line front end: ``cwvsmix {fit,simulate,benchmark,diagnose}``.

Exit codes: 0 success, 2 input error, 3 numerical failure. Every artifact
except ``timing.json`` is a deterministic function of the inputs and seed.
"""

from __future__ import annotations

import argparse
import logging
import platform
import sys
import time
from dataclasses import asdict
from pathlib import Path

import numpy as np
import scipy

from . import __version__
from .errors import InputError, NumericalError
from .inference import (
    INTERACTION_THRESHOLD,
    MAIN_THRESHOLD,
    WINDOW_THRESHOLD,
    decide_windows,
    geweke_diagnostic,
    select_weights,
)
from .io import (
    ingest_csv,
    read_draws,
    write_chain_summary,
    write_csv,
    write_dataset_csv,
    write_draws,
    write_json,
    write_plot_long,
    write_weights,
    write_windows,
)
from .model import Priors
from .rng import RngStream
from .sampler import SweepConfig, run_chain
from .simulation import METHODS, SUMMARY_METRICS, SimScenario, generate_dataset, run_study

log = logging.getLogger("cwvsmix")


def _versions() -> dict:
    return {"cwvsmix": __version__, "numpy": np.__version__, "scipy": scipy.__version__, "python": platform.python_version()}


def _threshold(text: str) -> float:
    v = float(text)
    if not 0 < v < 1:
        raise argparse.ArgumentTypeError("thresholds must lie in (0, 1)")
    return v


def _add_sweep_args(p: argparse.ArgumentParser, burn: int, keep: int, thin: int):
    p.add_argument("--burn", type=int, default=burn, help="burn-in sweeps")
    p.add_argument("--keep", type=int, default=keep, help="kept draws after thinning")
    p.add_argument("--thin", type=int, default=thin)
    p.add_argument("--sigma-beta", type=float, default=100.0, help="prior SD of beta (variance is its square)")
    p.add_argument("--alpha-phi", type=float, default=1.0)
    p.add_argument("--beta-phi", type=float, default=1.0)
    p.add_argument("--sigma2-a", type=float, default=1.0)


def _config(args) -> tuple[Priors, SweepConfig]:
    priors = Priors.with_beta_sd(args.sigma_beta, alpha_phi=args.alpha_phi, beta_phi=args.beta_phi, sigma2_A=args.sigma2_a)
    return priors, SweepConfig(n_burn=args.burn, n_keep=args.keep, thin=args.thin)


def _out_dir(path) -> Path:
    out = Path(path)
    try:
        out.mkdir(parents=True, exist_ok=True)
        probe = out / ".write-test"
        probe.write_text("")
        probe.unlink()
    except OSError as exc:
        raise InputError(f"output directory {out} is not writable: {exc}") from exc
    return out


def cmd_fit(args) -> int:
    started = time.perf_counter()
    data = ingest_csv(args.data, standardize=not args.no_standardize)
    priors, config = _config(args)
    out = _out_dir(args.out)
    rng = RngStream(args.seed)
    log.info("fitting n=%d m=%d q=%d p=%d", data.n, data.m, data.q, data.p)
    samples = run_chain(data, priors, config, rng, ew=args.method == "ew")
    decisions = decide_windows(samples, args.ci, args.window_threshold)
    selection = select_weights(samples, args.main_threshold, args.interaction_threshold)

    write_windows(out / "windows.csv", decisions)
    write_weights(out / "weights.csv", samples, selection)
    write_chain_summary(out / "chain_summary.csv", samples)
    write_plot_long(out / "plot_long.csv", decisions, samples)
    write_draws(out / "draws.csv", samples)
    scaling = None
    if data.scaling is not None:
        scaling = {"median": data.scaling.median, "iqr": data.scaling.iqr, "layout": "period x pollutant"}
    write_json(
        out / "manifest.json",
        {
            "subcommand": "fit",
            "data": str(args.data),
            "method": args.method,
            "seed": args.seed,
            "rng": samples.manifest,
            "priors": asdict(priors),
            "sweep": config.to_dict(),
            "ci_level": args.ci,
            "thresholds": {
                "window": args.window_threshold,
                "main": args.main_threshold,
                "interaction": args.interaction_threshold,
            },
            "standardized": data.scaling is not None,
            "scaling": scaling,
            "dims": {"n": data.n, "m": data.m, "q": data.q, "p": data.p},
            "pollutants": list(data.pollutants),
            "covariates": list(data.covariates),
            "acceptance": samples.acceptance,
            "final_steps": samples.steps,
            "versions": _versions(),
        },
    )
    write_json(out / "timing.json", {"wall_clock_seconds": time.perf_counter() - started})
    crit = [d.period for d in decisions if d.critical]
    print(f"critical periods: {crit if crit else 'none'}")
    return 0


def cmd_simulate(args) -> int:
    started = time.perf_counter()
    scenario = SimScenario.from_json(args.scenario)
    out = _out_dir(args.out)
    data, truth = generate_dataset(scenario, RngStream(args.seed))
    write_dataset_csv(out / "data.csv", data)
    write_json(
        out / "truth.json",
        {
            "critical_periods": sorted(truth.critical_periods),
            "window_start": truth.window_start,
            "window_length": truth.window_length,
            "alpha": truth.alpha,
            "weights": truth.weights,
            "prevalence": float(data.y.mean()),
        },
    )
    write_json(
        out / "manifest.json",
        {"subcommand": "simulate", "scenario": scenario.to_dict(), "seed": args.seed, "versions": _versions()},
    )
    write_json(out / "timing.json", {"wall_clock_seconds": time.perf_counter() - started})
    print(f"wrote {data.n} subjects to {out / 'data.csv'}; critical periods {sorted(truth.critical_periods)}")
    return 0


def cmd_benchmark(args) -> int:
    started = time.perf_counter()
    scenario = SimScenario.from_json(args.scenario)
    methods = [m.strip() for m in args.methods.split(",") if m.strip()]
    for mth in methods:
        if mth not in METHODS:
            raise InputError(f"unknown method {mth!r}; available: {', '.join(METHODS)}")
    priors, config = _config(args)
    out = _out_dir(args.out)
    result = run_study(
        scenario, args.replicates, methods, RngStream(args.seed), config, priors, workers=args.workers, ci_level=args.ci
    )
    write_csv(
        out / "results.csv",
        ["method", "metric", "mean", "se", "n"],
        ([r["method"], r["metric"], r["mean"], r["se"], r["n"]] for r in result.table_rows()),
    )
    cols = ["replicate", "method", "failed", "seed", "stream_id", "path", "window_start", "window_length",
            "prevalence", *SUMMARY_METRICS, "flagged", "error"]
    write_csv(
        out / "replicates.csv",
        cols,
        ([("/".join(map(str, r[c])) if c == "path" and c in r else r.get(c)) for c in cols] for r in result.records),
    )
    write_json(
        out / "manifest.json",
        {
            "subcommand": "benchmark",
            "scenario": scenario.to_dict(),
            "replicates": args.replicates,
            "methods": methods,
            "seed": args.seed,
            "priors": asdict(priors),
            "sweep": config.to_dict(),
            "ci_level": args.ci,
            "versions": _versions(),
        },
    )
    write_json(out / "timing.json", {"wall_clock_seconds": time.perf_counter() - started, "workers": args.workers})
    for r in result.table_rows():
        se = "" if r["se"] is None else f" (SE {r['se']:.4f})"
        print(f"{r['method']:8s} {r['metric']:22s} {r['mean']:.4f}{se}")
    failed = sum(1 for r in result.records if r.get("failed"))
    if failed:
        print(f"{failed} replicate fits failed; see replicates.csv", file=sys.stderr)
    return 0


def cmd_diagnose(args) -> int:
    traces = read_draws(args.samples)
    rows = []
    for name, trace in traces.items():
        try:
            z = geweke_diagnostic(trace)
        except InputError:
            z = float("nan")
        rows.append([name, trace.size, float(np.mean(trace)), float(np.std(trace, ddof=1)), z])
    src = Path(args.samples)
    out = Path(args.out) if args.out else (src if src.is_dir() else src.parent)
    _out_dir(out)
    write_csv(out / "diagnostics.csv", ["parameter", "n", "mean", "sd", "geweke_z"], rows)
    flagged = [r[0] for r in rows if np.isfinite(r[4]) and abs(r[4]) > 1.96]
    print(f"{len(rows)} traces; |Geweke z| > 1.96 for {len(flagged)}")
    for name in flagged:
        print(f"  {name}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="cwvsmix", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=__version__)
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("fit", help="fit the model to a dataset CSV")
    p.add_argument("--data", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--seed", type=int, required=True)
    _add_sweep_args(p, 10_000, 1_000, 10)
    p.add_argument("--ci", type=_threshold, default=0.90)
    p.add_argument("--window-threshold", type=_threshold, default=WINDOW_THRESHOLD)
    p.add_argument("--main-threshold", type=_threshold, default=MAIN_THRESHOLD)
    p.add_argument("--interaction-threshold", type=_threshold, default=INTERACTION_THRESHOLD)
    p.add_argument("--method", choices=METHODS, default="cwvsmix")
    p.add_argument("--no-standardize", action="store_true", help="use exposures as given")
    p.set_defaults(func=cmd_fit)

    p = sub.add_parser("simulate", help="generate one synthetic dataset from a scenario file")
    p.add_argument("--scenario", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--seed", type=int, required=True)
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("benchmark", help="simulation study over replicates")
    p.add_argument("--scenario", required=True)
    p.add_argument("--replicates", type=int, required=True)
    p.add_argument("--methods", default="cwvsmix,ew")
    p.add_argument("--out", required=True)
    p.add_argument("--seed", type=int, required=True)
    p.add_argument("--workers", type=int, default=1)
    p.add_argument("--ci", type=_threshold, default=0.90)
    _add_sweep_args(p, 10_000, 1_000, 10)
    p.set_defaults(func=cmd_benchmark)

    p = sub.add_parser("diagnose", help="Geweke diagnostics for a fit's draws.csv")
    p.add_argument("--samples", required=True, help="fit output directory or a draws.csv")
    p.add_argument("--out", default=None)
    p.set_defaults(func=cmd_diagnose)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s %(message)s")
    try:
        if getattr(args, "seed", 0) is not None and getattr(args, "seed", 0) < 0:
            raise InputError("seed must be non-negative")
        return args.func(args)
    except InputError as exc:
        print(f"input error: {exc}", file=sys.stderr)
        return 2
    except (NumericalError, np.linalg.LinAlgError, FloatingPointError) as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
