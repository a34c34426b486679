"""Edge rigidity and the Ramanujan property on sampled graphs."""
import math

import numpy as np

from ..harness import derive_seed, utc_now
from ..spectral import EdgeSample, q_param
from .common import (GRAPH_LABEL, calibration, column, describe, failure_row, is_failure,
                     make_report, trial_spectra)

RIGIDITY_COLUMNS = [
    "trial", "seed", "lambda_1", "lambda_2", "lambda_k", "lambda_n", "lambda_n_minus_k", "q",
    "edge_top", "edge_bottom", "rigidity_max", "rigidity_sum", "scaled_radius",
    "window_top", "window_bottom", "status",
]

RAMANUJAN_COLUMNS = [
    "trial", "seed", "lambda_2", "lambda_n", "max_abs", "ramanujan", "margin", "margin_top",
    "margin_bottom", "predicted_margin", "sign_match", "status",
]


def _seed(cfg, t):
    return derive_seed(cfg.seed, t, GRAPH_LABEL)


def run_rigidity(cfg, spectra=None, threads=None):
    """N^{2/3}-scaled edge deviations and empty-window counts per trial.

    ``spectra`` may hold precomputed per-trial spectra for the same
    (N, d, seed, burn_in, thinning), e.g. shared with :func:`run_ramanujan`.
    """
    started = utc_now()
    spectra = trial_spectra(cfg, threads) if spectra is None else spectra
    n, d, k = cfg.n, cfg.d, cfg["k"]
    delta, hi = cfg["delta"], cfg["window_hi"]
    lo = 2 + n ** (-2 / 3 + delta)
    rows = []
    for t, w in enumerate(spectra):
        if is_failure(w):
            rows.append(failure_row(RIGIDITY_COLUMNS, t, _seed(cfg, t), w))
            continue
        es = EdgeSample.from_spectrum(w, n, d, k, seed=_seed(cfg, t))
        scaled = np.asarray(w[1:]) / es.q
        win_top = int(np.count_nonzero((scaled >= lo) & (scaled <= hi)))
        win_bot = int(np.count_nonzero((scaled <= -lo) & (scaled >= -hi)))
        rows.append([t, es.seed, es.lambda_1, es.lambda_2, es.lambda_k, es.lambda_n,
                     es.lambda_n_minus_k, es.q, es.edge_top, es.edge_bottom, es.rigidity_max,
                     es.rigidity_sum, float(np.max(np.abs(scaled))), win_top, win_bot, "ok"])
    ok = [r for r in rows if r[-1] == "ok"]
    rmax = column(ok, RIGIDITY_COLUMNS, "rigidity_max")
    wins = column(ok, RIGIDITY_COLUMNS, "window_top")
    cal = calibration().get("rigidity", {})
    summary = {
        "statistic": "N^(2/3) * max(|l2/q - 2|, |lk/q - 2|, |lN/q + 2|)",
        "rigidity_max": describe(rmax),
        "rigidity_sum": describe(column(ok, RIGIDITY_COLUMNS, "rigidity_sum")),
        "edge_top": describe(column(ok, RIGIDITY_COLUMNS, "edge_top")),
        "edge_bottom": describe(column(ok, RIGIDITY_COLUMNS, "edge_bottom")),
        "scaled_radius": describe(column(ok, RIGIDITY_COLUMNS, "scaled_radius")),
        "window": [lo, hi],
        "window_empty_fraction": (sum(1 for x in wins if x == 0) / len(wins)) if wins else None,
        "calibrated_threshold": cal.get("threshold"),
    }
    if cal.get("threshold") is not None and rmax:
        summary["within_threshold"] = bool(max(rmax) <= cal["threshold"])
    return make_report(cfg, RIGIDITY_COLUMNS, rows, summary, started)


def ramanujan_prediction(n, d):
    """Leading-order value of ``2 sqrt(d-1) - lambda_2``."""
    return -(2 - 2 * d * d / n) / (q_param(n, d) + math.sqrt(d - 1))


def run_ramanujan(cfg, spectra=None, threads=None):
    started = utc_now()
    spectra = trial_spectra(cfg, threads) if spectra is None else spectra
    n, d = cfg.n, cfg.d
    bound = 2 * math.sqrt(d - 1) if d >= 1 else 0.0
    pred = ramanujan_prediction(n, d) if 1 <= d <= n - 1 else float("nan")
    rows = []
    for t, w in enumerate(spectra):
        if is_failure(w):
            rows.append(failure_row(RAMANUJAN_COLUMNS, t, _seed(cfg, t), w))
            continue
        l2, ln = float(w[1]), float(w[-1])
        mx = max(abs(ln), l2)
        top = bound - l2
        rows.append([t, _seed(cfg, t), l2, ln, mx, mx < bound, bound - mx, top, bound - abs(ln),
                     pred, bool(np.sign(top) == np.sign(pred)), "ok"])
    ok = [r for r in rows if r[-1] == "ok"]
    flags = column(ok, RAMANUJAN_COLUMNS, "ramanujan")
    summary = {
        "bound": bound,
        "bound_formula": "2 * sqrt(d - 1)",
        "fraction_ramanujan": (sum(flags) / len(flags)) if flags else None,
        "margin": describe(column(ok, RAMANUJAN_COLUMNS, "margin")),
        "margin_top": describe(column(ok, RAMANUJAN_COLUMNS, "margin_top")),
        "margin_bottom": describe(column(ok, RAMANUJAN_COLUMNS, "margin_bottom")),
        "predicted_margin": pred,
        "predicted_formula": "-(2 - 2 d^2 / N) / (sqrt(d (N - d) / N) + sqrt(d - 1))",
        "sign_agreement": (sum(column(ok, RAMANUJAN_COLUMNS, "sign_match")) / len(ok)) if ok else None,
        "ramanujan_regime": {"2d <= N": 2 * d <= n, "N < d^(3/2)": n < d**1.5},
    }
    return make_report(cfg, RAMANUJAN_COLUMNS, rows, summary, started)
