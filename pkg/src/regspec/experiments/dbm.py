"""Paired comparison of the graph (t = 0) and the interpolated matrix (t = t*).

Each trial uses one graph and one constrained GOE draw for both times, so
``L(X_{t*}) - L(X_0)`` is a paired statistic. The graph seeds coincide with
the rigidity experiment's, hence the t = 0 column reproduces it exactly.
"""
import math

import numpy as np
from scipy.special import expit

from ..ensembles import dbm_path
from ..harness import derive_seed, map_trials, trial_rng, utc_now
from ..spectral import SpectralDomain, q_param, semicircle_m
from .common import GRAPH_LABEL, calibration, column, describe, is_failure, make_report, trial_graph
from .local_law import bound_avg

GOE_LABEL = "goe"
BOOTSTRAP_LABEL = "bootstrap"

# committed family of smooth test functions: logistic sigmoids (slope, center)
TEST_FUNCTIONS = {
    "L1": (1.0, math.pi / 2),
    "L2": (2.0, math.pi / 2),
    "L3": (4.0, math.pi / 4),
}


def apply_l(name, x):
    slope, center = TEST_FUNCTIONS[name]
    return expit(slope * (np.asarray(x, dtype=float) - center))


COLUMNS = [
    "trial", "graph_seed", "goe_seed", "xi2_0", "xi2_star", "edge_0", "edge_star",
    "x0_re", "x0_im", "xstar_re", "xstar_im",
    *[f"{name}_{when}" for name in TEST_FUNCTIONS for when in ("0", "star")],
    "law_ratio_star", "status",
]


def t_star(cfg):
    return cfg["t_star"] if cfg.get("t_star") is not None else cfg.n ** (-1 / 3 + cfg["mu"])


def bootstrap_se(diffs, reps, rng):
    diffs = np.asarray(diffs, dtype=float)
    if diffs.size < 2:
        return float("nan"), (float("nan"), float("nan"))
    idx = rng.integers(0, diffs.size, size=(reps, diffs.size))
    means = diffs[idx].mean(axis=1)
    lo, hi = np.quantile(means, [0.025, 0.975])
    return float(means.std(ddof=1)), (float(lo), float(hi))


def run_dbm(cfg, threads=None):
    started = utc_now()
    n, d = cfg.n, cfg.d
    ts = t_star(cfg)
    scale = n ** (2 / 3)
    law_grid = SpectralDomain.edge(n, 0.1).points

    def one(t):
        g = trial_graph(cfg, t)
        path = dbm_path(g, [0.0, ts], trial_rng(cfg.seed, t, GOE_LABEL), mu=cfg["mu"],
                        kappa_const=cfg["kappa_const"], nodes=cfg["nodes"])
        eigs = path.eigs[1]
        law = max(abs(np.sum(1 / (eigs - p.z)) / n - semicircle_m(p.z)) / bound_avg(n, d, p.kappa, p.eta)
                  for p in law_grid)
        return path, law

    results = map_trials(one, cfg.trials, threads)
    rows = []
    for t, res in enumerate(results):
        gs, ws = derive_seed(cfg.seed, t, GRAPH_LABEL), derive_seed(cfg.seed, t, GOE_LABEL)
        if is_failure(res):
            row = [t, gs, ws] + [None] * (len(COLUMNS) - 4) + [res.error]
            rows.append(row)
            continue
        path, law = res
        x0, xs = path.x_t
        lvals = []
        for name in TEST_FUNCTIONS:
            lvals += [float(apply_l(name, x0.imag)), float(apply_l(name, xs.imag))]
        rows.append([t, gs, ws, float(path.xi2[0]), float(path.xi2[1]),
                     scale * abs(path.xi2[0] - 2), scale * abs(path.xi2[1] - 2),
                     x0.real, x0.imag, xs.real, xs.imag, *lvals, float(law), "ok"])
    ok = [r for r in rows if r[-1] == "ok"]
    cal = calibration()
    budgets = cal.get("dbm", {}).get("budgets", {})
    threshold = cal.get("rigidity", {}).get("threshold")
    boot_rng = trial_rng(cfg.seed, 0, BOOTSTRAP_LABEL)
    functionals = {}
    for name in TEST_FUNCTIONS:
        a = np.asarray(column(ok, COLUMNS, f"{name}_0"), dtype=float)
        b = np.asarray(column(ok, COLUMNS, f"{name}_star"), dtype=float)
        diff = b - a
        se, ci = bootstrap_se(diff, cfg["bootstrap"], boot_rng)
        delta_hat = float(diff.mean()) if diff.size else float("nan")
        entry = {"slope_center": list(TEST_FUNCTIONS[name]), "delta_hat": delta_hat,
                 "bootstrap_se": se, "ci95": list(ci), "budget": budgets.get(name)}
        if budgets.get(name) is not None and diff.size:
            entry["within_budget"] = bool(abs(delta_hat) <= 3 * se + budgets[name])
        functionals[name] = entry
    edge_star = column(ok, COLUMNS, "edge_star")
    summary = {
        "t_star": ts,
        "mu": cfg["mu"],
        "q": q_param(n, d),
        "x_window": {"kappa": cfg["kappa_const"] * n ** (-2 / 3), "upper": n ** (-2 / 3 + cfg["mu"]),
                     "eta": n ** (-2 / 3 - cfg["mu"])},
        "edge_0": describe(column(ok, COLUMNS, "edge_0")),
        "edge_star": describe(edge_star),
        "rigidity_threshold": threshold,
        "edge_star_within_threshold": (bool(max(edge_star) <= threshold)
                                       if threshold is not None and edge_star else None),
        "law_ratio_star": describe(column(ok, COLUMNS, "law_ratio_star")),
        "law_ratio_formula": "|Gbar(t*) - m| / (1/(N eta) + d^(-1/2) + (kappa+eta)^(1/6)/(N eta)^(2/3))",
        "functionals": functionals,
    }
    return make_report(cfg, COLUMNS, rows, summary, started)
