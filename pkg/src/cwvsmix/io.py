"""CSV ingestion and the run artifacts written by the command line front end.

Dataset CSV: a header row with ``y``, any covariate columns, and exposure
columns ``z_<pollutant>_<period>`` with 1-based periods. An ``intercept``
column of ones is prepended unless one is present. Every floating value
written here uses 17 significant digits so files re-read bit-exactly.
"""

from __future__ import annotations

import csv
import json
import re
from pathlib import Path

import numpy as np

from .errors import InputError
from .inference import (
    WindowDecision,
    WeightSelection,
    conditional_weight_means,
    summarize_traces,
)
from .model import ExposureDataset, iqr_standardize
from .sampler import ChainSamples
from .weights import component_labels

_EXPOSURE = re.compile(r"^z_(.+)_(-?\d+)$")


def fmt(x) -> str:
    if x is None:
        return ""
    if isinstance(x, (bool, np.bool_)):
        return str(int(x))
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    if isinstance(x, (float, np.floating)):
        return format(float(x), ".17g")
    return str(x)


def write_csv(path: Path, header: list[str], rows) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        out = csv.writer(fh, lineterminator="\n")
        out.writerow(header)
        for row in rows:
            out.writerow([fmt(v) for v in row])


def write_json(path: Path, obj) -> None:
    Path(path).write_text(json.dumps(obj, indent=2, sort_keys=True, default=_json_default) + "\n", encoding="utf-8")


def _json_default(o):
    if isinstance(o, np.ndarray):
        return o.tolist()
    if isinstance(o, (np.integer,)):
        return int(o)
    if isinstance(o, (np.floating,)):
        return float(o)
    if isinstance(o, Path):
        return str(o)
    raise TypeError(f"not JSON serialisable: {type(o).__name__}")


# --------------------------------------------------------------------------
# datasets
# --------------------------------------------------------------------------


def _parse_header(header: list[str]):
    if "y" not in header:
        raise InputError("missing column 'y'")
    if len(set(header)) != len(header):
        raise InputError("duplicate column names in header")
    expo = {}
    covs = []
    for col, name in enumerate(header):
        if name == "y":
            continue
        hit = _EXPOSURE.match(name)
        if hit:
            pol, period = hit.group(1), int(hit.group(2))
            if period < 1:
                raise InputError(f"period index out of range in column {name!r} (periods are 1-based)")
            expo[(pol, period)] = col
        else:
            covs.append((name, col))
    if not expo:
        raise InputError("no exposure columns (expected z_<pollutant>_<period>)")
    pollutants = list(dict.fromkeys(p for p, _ in expo))
    m = max(t for _, t in expo)
    for pol in pollutants:
        for t in range(1, m + 1):
            if (pol, t) not in expo:
                raise InputError(f"missing column 'z_{pol}_{t}'")
    return pollutants, m, expo, covs


def ingest_csv(path, standardize: bool = True) -> ExposureDataset:
    """Read and validate a dataset CSV, streaming rows; errors name row and column."""
    path = Path(path)
    try:
        fh = open(path, newline="", encoding="utf-8")
    except OSError as exc:
        raise InputError(f"cannot open {path}: {exc}") from exc
    with fh:
        reader = csv.reader(fh)
        try:
            header = [h.strip() for h in next(reader)]
        except StopIteration:
            raise InputError(f"{path} is empty") from None
        pollutants, m, expo, covs = _parse_header(header)
        q = len(pollutants)
        y_col = header.index("y")
        z_cols = [expo[(pol, t)] for t in range(1, m + 1) for pol in pollutants]
        cov_cols = [c for _, c in covs]
        ys, xs, zs = [], [], []
        for row_no, row in enumerate(reader, start=1):
            if not row or all(not c.strip() for c in row):
                continue
            if len(row) != len(header):
                raise InputError(f"ragged row {row_no}: {len(row)} fields, header has {len(header)}")
            try:
                vals = [float(c) for c in row]
            except ValueError:
                bad = next(i for i, c in enumerate(row) if not _is_float(c))
                raise InputError(f"non-numeric cell at row {row_no}, column {header[bad]!r}") from None
            if vals[y_col] not in (0.0, 1.0):
                raise InputError(f"non-binary outcome at row {row_no}")
            ys.append(vals[y_col])
            xs.append([vals[c] for c in cov_cols])
            zs.append([vals[c] for c in z_cols])
    if not ys:
        raise InputError(f"{path} has no data rows")
    n = len(ys)
    X = np.asarray(xs, dtype=float).reshape(n, len(cov_cols))
    cov_names = [name for name, _ in covs]
    if "intercept" not in cov_names:
        X = np.column_stack([np.ones(n), X])
        cov_names = ["intercept", *cov_names]
    Z = np.asarray(zs, dtype=float).reshape(n, m, q)
    scaling = None
    if standardize:
        Z, scaling = iqr_standardize(Z)
    return ExposureDataset(
        y=np.asarray(ys), X=X, Z=Z, scaling=scaling, pollutants=tuple(pollutants), covariates=tuple(cov_names)
    )


def _is_float(s: str) -> bool:
    try:
        float(s)
    except ValueError:
        return False
    return True


def write_dataset_csv(path, data: ExposureDataset) -> None:
    """Inverse of :func:`ingest_csv` (without standardisation)."""
    cov_idx = [j for j, c in enumerate(data.covariates) if c != "intercept"]
    header = ["y"] + [data.covariates[j] for j in cov_idx]
    header += [f"z_{pol}_{t + 1}" for t in range(data.m) for pol in data.pollutants]
    z_flat = data.Z.reshape(data.n, data.m * data.q)
    rows = (
        [int(data.y[i])] + [data.X[i, j] for j in cov_idx] + list(z_flat[i])
        for i in range(data.n)
    )
    write_csv(Path(path), header, rows)


# --------------------------------------------------------------------------
# run outputs
# --------------------------------------------------------------------------


def write_windows(path, decisions: list[WindowDecision]) -> None:
    write_csv(
        Path(path),
        ["period", "pip", "or_mean", "ci_low", "ci_high", "verdict", "n_conditional"],
        ([d.period, d.pip, d.or_mean, d.ci_low, d.ci_high, d.verdict, d.n_conditional] for d in decisions),
    )


def write_weights(path, samples: ChainSamples, selection: WeightSelection) -> None:
    labels = component_labels(samples.pollutants)
    cond, fallback = conditional_weight_means(samples)
    rows = []
    for t in range(samples.m):
        for c, label in enumerate(labels):
            rows.append(
                [t + 1, label, selection.prob[t, c], bool(selection.selected[t, c]), cond[t, c], bool(fallback[t])]
            )
    write_csv(
        Path(path),
        ["period", "component", "inclusion_prob", "selected", "conditional_mean", "unconditional_fallback"],
        rows,
    )


def write_chain_summary(path, samples: ChainSamples) -> None:
    rows = summarize_traces(samples)
    header = ["parameter", "mean", "sd", "q0.05", "q0.5", "q0.95", "geweke_z"]
    write_csv(Path(path), header, ([r[h] for h in header] for r in rows))


def write_plot_long(path, decisions: list[WindowDecision], samples: ChainSamples) -> None:
    """Long format (panel, period, component, quantity, value) for external plotting."""
    labels = component_labels(samples.pollutants)
    cond, _ = conditional_weight_means(samples)
    rows = []
    for d in decisions:
        for quantity in ("pip", "or_mean", "ci_low", "ci_high"):
            rows.append(["risk", d.period, "", quantity, getattr(d, quantity)])
    for t in range(samples.m):
        for c, label in enumerate(labels):
            rows.append(["weights", t + 1, label, "conditional_mean", cond[t, c]])
    write_csv(Path(path), ["panel", "period", "component", "quantity", "value"], rows)


def draw_columns(samples: ChainSamples) -> tuple[list[str], np.ndarray]:
    traces = samples.scalar_traces()
    names = list(traces)
    cols = [traces[k] for k in names]
    labels = component_labels(samples.pollutants)
    for t in range(samples.m):
        for c, label in enumerate(labels):
            names.append(f"weight[{t + 1},{label}]")
            cols.append(samples.weights[:, t, c])
    mat = np.column_stack(cols) if cols and samples.n_draws else np.zeros((samples.n_draws, len(names)))
    return names, mat


def write_draws(path, samples: ChainSamples) -> None:
    names, mat = draw_columns(samples)
    write_csv(Path(path), ["draw", *names], ([d + 1, *mat[d]] for d in range(mat.shape[0])))


def read_draws(path) -> dict[str, np.ndarray]:
    path = Path(path)
    if path.is_dir():
        path = path / "draws.csv"
    try:
        with open(path, newline="", encoding="utf-8") as fh:
            reader = csv.reader(fh)
            header = next(reader)
            rows = [[float(v) for v in row] for row in reader if row]
    except (OSError, StopIteration, ValueError) as exc:
        raise InputError(f"cannot read draws from {path}: {exc}") from exc
    mat = np.asarray(rows, dtype=float).reshape(len(rows), len(header))
    return {name: mat[:, j] for j, name in enumerate(header) if name != "draw"}
