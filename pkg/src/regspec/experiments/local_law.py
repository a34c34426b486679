"""Local-law observables on the bulk and near-edge grids, with bound ratios."""
import math

import numpy as np

from ..harness import derive_seed, map_trials, utc_now
from ..spectral import GreenEvaluator, SpectralDomain, delocalization, semicircle_m
from .common import GRAPH_LABEL, calibration, describe, is_failure, make_report, trial_graph

# name -> (bound formula, observed quantity, grid); every ratio column is observed / bound
BOUNDS = {
    "avg": ("1/(N eta) + d^(-1/2) + (kappa+eta)^(1/6) / (N eta)^(2/3)", "|Gbar - m|", "all"),
    "avg_edge": ("1/(N(kappa+eta)) + 1/(d (kappa+eta)^(1/2)) + 1/(N^2 (kappa+eta)^(5/2))"
                 " + 1/((N eta)^2 (kappa+eta)^(1/2)) + 1/(N^(2/3) (kappa+eta)^(1/2))", "|Gbar - m|", "edge"),
    "entry": ("(N eta)^(-1/2) + d^(-1/2)", "max_ij |G_ij - delta_ij m|", "all"),
    "entry_weak": ("(N eta)^(-1/4) + d^(-1/4)", "max_ij |G_ij - delta_ij m|", "all"),
    "p_entry": ("(1+phi)^3 sqrt((phi + Im m)/(N eta) + 1/d), phi = observed max_ij |G_ij - delta_ij m|",
                "max_ij |delta_ij + z G_ij + Gbar G_ij|", "all"),
    "q_avg": ("E1 + E1^(1/4) E2^(1/2) (psi + |z+2m|)^(1/2) + d^(-1/2) psi, E2 = (psi + Im m)/(N eta),"
              " E1 = E2 + 1/d, psi = observed |Gbar - m| clipped to [1/N, 1]", "|1 + z Gbar + Gbar^2|", "all"),
}
RATIOS = tuple(BOUNDS)

COLUMNS = [
    "trial", "seed", "domain", "E", "eta", "kappa", "avg_err", "entry_err", "p_res", "q_res",
    "ward_rel", "colsum", *[f"ratio_{r}" for r in RATIOS], "status",
]
GRAPH_COLUMNS = ["trial", "seed", "delocalization", "deloc_ratio", "window_count", "status"]


def bound_avg(n, d, kappa, eta):
    return 1 / (n * eta) + d**-0.5 + (kappa + eta) ** (1 / 6) / (n * eta) ** (2 / 3)


def bound_avg_edge(n, d, kappa, eta):
    s = kappa + eta
    return (1 / (n * s) + 1 / (d * math.sqrt(s)) + 1 / (n**2 * s**2.5)
            + 1 / ((n * eta) ** 2 * math.sqrt(s)) + 1 / (n ** (2 / 3) * math.sqrt(s)))


def bound_entry(n, d, eta):
    return (n * eta) ** -0.5 + d**-0.5


def bound_entry_weak(n, d, eta):
    return (n * eta) ** -0.25 + d**-0.25


def bound_p(n, d, eta, phi, im_m):
    return (1 + phi) ** 3 * math.sqrt((phi + im_m) / (n * eta) + 1 / d)


def bound_q(n, d, z, eta, psi, m):
    e2 = (psi + m.imag) / (n * eta)
    e1 = e2 + 1 / d
    return e1 + e1**0.25 * e2**0.5 * (psi + abs(z + 2 * m)) ** 0.5 + d**-0.5 * psi


def grid(cfg):
    n, delta = cfg.n, cfg["delta"]
    bulk = SpectralDomain.bulk(n, delta, cfg["n_energy"], cfg["n_eta"])
    edge = SpectralDomain.edge(n, delta, cfg["n_edge_energy"], cfg["n_edge_eta"])
    return [("bulk", p) for p in bulk.points] + [("edge", p) for p in edge.points]


def point_observables(ge, p, domain):
    """Observed quantities and bound ratios at one spectral point."""
    n, d = ge.n, ge.d
    z, eta, kappa = p.z, p.eta, p.kappa
    m = semicircle_m(z)
    g = ge.matrix(z)
    gbar = ge.gbar(z)
    diag = np.diagonal(g).copy()
    avg_err = abs(gbar - m)
    g[np.diag_indices(n)] -= m
    entry_err = float(np.max(np.abs(g)))
    g[np.diag_indices(n)] = diag
    colnorm = np.sum(g.real**2 + g.imag**2, axis=0)
    ward = np.abs(colnorm - diag.imag / eta) / (diag.imag / eta + 1)
    colsum = float(np.max(np.abs(g.sum(axis=0))))
    g *= z + gbar
    g[np.diag_indices(n)] += 1.0
    p_res = float(np.max(np.abs(g)))
    q_res = abs(1 + z * gbar + gbar * gbar)
    phi = max(entry_err, 1 / n)
    psi = min(max(avg_err, 1 / n), 1.0)
    ratios = {
        "avg": avg_err / bound_avg(n, d, kappa, eta),
        "avg_edge": avg_err / bound_avg_edge(n, d, kappa, eta) if domain == "edge" else None,
        "entry": entry_err / bound_entry(n, d, eta),
        "entry_weak": entry_err / bound_entry_weak(n, d, eta),
        "p_entry": p_res / bound_p(n, d, eta, phi, m.imag),
        "q_avg": q_res / bound_q(n, d, z, eta, psi, m),
    }
    return [p.energy, eta, kappa, avg_err, entry_err, p_res, q_res, float(ward.max()), colsum,
            *[ratios[r] for r in RATIOS]]


def run_local_law(cfg, threads=None):
    started = utc_now()
    n, delta = cfg.n, cfg["delta"]
    points = grid(cfg)
    lo, hi = 2 + n ** (-2 / 3 + delta), 1 / delta
    deloc_bound = cfg["deloc_const"] * math.sqrt(math.log(n) / n)

    def one(t):
        ge = GreenEvaluator(trial_graph(cfg, t))
        per_point = [[dom] + point_observables(ge, p, dom) for dom, p in points]
        dl = delocalization(ge)
        win = int(np.count_nonzero((ge.eigenvalues >= lo) & (ge.eigenvalues <= hi)))
        return per_point, dl, win

    results = map_trials(one, cfg.trials, threads)
    rows, graph_rows = [], []
    for t, res in enumerate(results):
        seed = derive_seed(cfg.seed, t, GRAPH_LABEL)
        if is_failure(res):
            graph_rows.append([t, seed, None, None, None, res.error])
            rows.append([t, seed] + [None] * (len(COLUMNS) - 3) + [res.error])
            continue
        per_point, dl, win = res
        graph_rows.append([t, seed, dl, dl / deloc_bound, win, "ok"])
        rows.extend([t, seed, *vals, "ok"] for vals in per_point)
    ok = [r for r in rows if r[-1] == "ok"]
    gok = [r for r in graph_rows if r[-1] == "ok"]
    consts = calibration().get("local_law", {}).get("constants", {})
    ratio_summary = {}
    for r in RATIOS:
        idx = COLUMNS.index(f"ratio_{r}")
        vals = [row[idx] for row in ok if row[idx] is not None]
        formula, observed, where = BOUNDS[r]
        entry = {"formula": formula, "observed": observed, "grid": where,
                 "max": max(vals) if vals else None, "constant": consts.get(r)}
        if consts.get(r) is not None and vals:
            entry["within_constant"] = bool(max(vals) <= consts[r])
        ratio_summary[r] = entry
    wins = [r[4] for r in gok]
    dls = [r[3] for r in gok]
    summary = {
        "grid_points": len(points),
        "ratios": ratio_summary,
        "ward_rel_max": max((r[COLUMNS.index("ward_rel")] for r in ok), default=None),
        "colsum_max": max((r[COLUMNS.index("colsum")] for r in ok), default=None),
        "window": [lo, hi],
        "window_empty_fraction": (sum(1 for w in wins if w == 0) / len(wins)) if wins else None,
        "delocalization_bound": deloc_bound,
        "delocalization_formula": f"{cfg['deloc_const']} * sqrt(log N / N)",
        "delocalization_ratio": describe(dls),
        "delocalization_within_bound": bool(max(dls) <= 1.0) if dls else None,
    }
    return make_report(cfg, COLUMNS, rows, summary, started,
                       tables={"graphs": (GRAPH_COLUMNS, graph_rows)})
