"""Shared plumbing for the Monte-Carlo experiments."""
import json
import math
from functools import lru_cache
from importlib import resources

import numpy as np

from ..harness import ExperimentReport, TrialFailure, derive_seed, map_trials, utc_now
from ..sampler import SamplerConfig, sample_uniform
from ..spectral import full_spectrum

GRAPH_LABEL = "graph"


def sampler_config(cfg, trial):
    return SamplerConfig(cfg.n, cfg.d, derive_seed(cfg.seed, trial, GRAPH_LABEL),
                         cfg.get("burn_in"), cfg.get("thinning"))


def trial_graph(cfg, trial):
    return sample_uniform(sampler_config(cfg, trial))


def trial_spectra(cfg, threads=None):
    """Full descending adjacency spectrum of every trial graph (or a failure)."""
    return map_trials(lambda t: full_spectrum(trial_graph(cfg, t)), cfg.trials, threads)


def describe(values):
    """Location/scale summary of the finite entries of ``values``."""
    v = np.asarray([x for x in values if x is not None], dtype=float)
    v = v[np.isfinite(v)]
    if v.size == 0:
        return {"count": 0}
    q = np.quantile(v, [0.5, 0.9, 0.99])
    return {
        "count": int(v.size),
        "mean": float(v.mean()),
        "sd": float(v.std(ddof=1)) if v.size > 1 else 0.0,
        "min": float(v.min()),
        "q50": float(q[0]),
        "q90": float(q[1]),
        "q99": float(q[2]),
        "max": float(v.max()),
    }


def column(rows, columns, name):
    idx = columns.index(name)
    return [r[idx] for r in rows]


def failure_row(columns, trial, seed, failure):
    row = [None] * len(columns)
    row[0], row[1] = trial, seed
    row[columns.index("status")] = failure.error
    return row


def is_failure(x):
    return isinstance(x, TrialFailure)


def make_report(cfg, columns, rows, summary, started, tables=None):
    failures = sum(1 for r in rows if r[columns.index("status")] != "ok") if "status" in columns else 0
    summary = dict(summary)
    summary["failures"] = failures
    summary["warnings"] = list(cfg.warnings)
    return ExperimentReport(cfg.kind, cfg.to_dict(), list(columns), rows, summary, failures,
                            tables or {}, started, utc_now())


def ceil_sig(x, digits=2):
    """Round ``x > 0`` up to ``digits`` significant digits."""
    if x <= 0 or not math.isfinite(x):
        return x
    e = math.floor(math.log10(x)) - digits + 1
    return round(math.ceil(x / 10**e - 1e-9) * 10**e, -e)


@lru_cache(maxsize=1)
def calibration():
    """Frozen constants from ``data/calibration.json`` (empty if absent)."""
    path = resources.files("regspec") / "data" / "calibration.json"
    if not path.is_file():
        return {}
    return json.loads(path.read_text())
