"""CSV writers. Floats are written with 9 significant digits; column order is fixed."""

from __future__ import annotations

import csv
from collections import defaultdict
from pathlib import Path

import numpy as np

TRACE_HEADER = ("policy", "seed", "t", "x_index", "y", "f_xt", "f_star", "r_t", "R_t", "reset", "psi", "kappa")
SUMMARY_HEADER = ("policy", "mean_RT", "std_RT", "mean_resets")
CURVES_HEADER = ("policy", "t", "mean_R_t", "std_R_t", "mean_avg_regret", "std_avg_regret", "reset_fraction")
STOPPING_HEADER = ("seed", "tau", "censored")
HISTOGRAM_HEADER = ("tau", "count")
STOPPING_SUMMARY_HEADER = (
    "epsilon", "n_runs", "n_censored", "mean_tau", "median_tau",
    "quantile_delta", "tau_bar", "fraction_below_tau_bar", "quantile_check",
)
BOUND_HEADER = ("t", "beta_t", "phi_t", "gamma_surrogate_lower", "bound", "R_t")


def fmt(value) -> str:
    if isinstance(value, str):
        return value
    if isinstance(value, (bool, np.bool_)):
        return str(int(value))
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    if value is None or (isinstance(value, float) and np.isnan(value)):
        return ""
    return format(float(value), ".9g")


def _write(path: Path, header, rows) -> Path:
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        for row in rows:
            w.writerow([fmt(v) for v in row])
    return path


def trace_rows(traces):
    for tr in sorted(traces, key=lambda tr: (tr.policy, tr.seed)):
        R = tr.R
        for k in range(tr.horizon):
            yield (
                tr.policy, tr.seed, k + 1, tr.x_index[k], tr.y[k], tr.f_xt[k], tr.f_star[k],
                tr.f_star[k] - tr.f_xt[k], R[k], bool(tr.reset[k]), tr.psi[k], tr.kappa[k],
            )


def summarize(traces) -> list[tuple]:
    """Per policy: mean and population std of R_T over seeds, and mean reset count."""
    by_policy = defaultdict(list)
    for tr in traces:
        by_policy[tr.policy].append(tr)
    rows = []
    for policy in sorted(by_policy):
        RT = np.array([tr.R_T for tr in by_policy[policy]])
        resets = np.array([tr.n_resets for tr in by_policy[policy]], dtype=float)
        rows.append((policy, RT.mean(), RT.std(), resets.mean()))
    return rows


def curve_rows(traces):
    by_policy = defaultdict(list)
    for tr in traces:
        by_policy[tr.policy].append(tr)
    for policy in sorted(by_policy):
        R = np.stack([tr.R for tr in by_policy[policy]])
        resets = np.stack([tr.reset for tr in by_policy[policy]]).astype(float)
        t = np.arange(1, R.shape[1] + 1)
        avg = R / t
        for k in range(R.shape[1]):
            yield (policy, k + 1, R[:, k].mean(), R[:, k].std(), avg[:, k].mean(), avg[:, k].std(), resets[:, k].mean())


def emit_csv(traces, out_dir) -> dict[str, Path]:
    """Write ``trace.csv``, ``summary.csv`` and ``curves.csv`` into ``out_dir``."""
    out = Path(out_dir)
    return {
        "trace": _write(out / "trace.csv", TRACE_HEADER, trace_rows(traces)),
        "summary": _write(out / "summary.csv", SUMMARY_HEADER, summarize(traces)),
        "curves": _write(out / "curves.csv", CURVES_HEADER, curve_rows(traces)),
    }


def emit_stopping_times(result, out_dir) -> dict[str, Path]:
    out = Path(out_dir)
    per_run = ((s, int(t), t > result.horizon) for s, t in zip(result.seeds, result.taus))
    summary = [(
        result.epsilon, len(result.taus), int(result.censored.sum()), result.mean, result.median,
        result.quantile_delta, result.tau_bar, result.fraction_below_tau_bar, result.quantile_check(),
    )]
    return {
        "runs": _write(out / "stopping_times.csv", STOPPING_HEADER, per_run),
        "histogram": _write(out / "stopping_histogram.csv", HISTOGRAM_HEADER, result.histogram()),
        "summary": _write(out / "stopping_summary.csv", STOPPING_SUMMARY_HEADER, summary),
    }


def emit_bound(rows, out_dir) -> Path:
    data = ((r.t, r.beta_t, r.phi_t, r.gamma_surrogate_lower, r.bound, r.R_t) for r in rows)
    return _write(Path(out_dir) / "bound.csv", BOUND_HEADER, data)


def read_csv(path) -> list[dict]:
    with open(path, newline="", encoding="utf-8") as fh:
        return list(csv.DictReader(fh))
