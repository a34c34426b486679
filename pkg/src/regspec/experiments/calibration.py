"""One-time calibration run that freezes the Monte-Carlo acceptance constants.

Each constant is ``ceil_sig(1.5 * observed max)`` over a dedicated seed that
no acceptance test reuses; drift budgets are ``ceil_sig(2 |delta_hat|)``.
The generating configs and raw maxima are stored next to the constants.
"""
import json
import math
from pathlib import Path

import numpy as np

from ..ensembles import dbm_path
from ..graph import power_row_deviation
from ..harness import VERSION, parse_config, trial_rng, utc_now
from ..spectral import GreenEvaluator, power_green_check
from .common import calibration, ceil_sig, trial_graph
from .dbm import run_dbm
from .local_law import RATIOS, run_local_law
from .rigidity import run_rigidity

CALIBRATION_SEED = 20240917
DEFAULT_PATH = Path(__file__).resolve().parent.parent / "data" / "calibration.json"
SAFETY = 1.5


def _quiet(cfg_dict, kind):
    return parse_config(cfg_dict, kind=kind)


def calibrate_rigidity(threads=None, trials=200):
    cfg = _quiet({"N": 1000, "d": 300, "k": 3, "trials": trials, "seed": CALIBRATION_SEED}, "rigidity")
    rep = run_rigidity(cfg, threads=threads)
    observed = rep.summary["rigidity_max"]["max"]
    return {"config": cfg.to_dict(), "observed_max": observed,
            "threshold": ceil_sig(SAFETY * observed),
            "window_empty_fraction": rep.summary["window_empty_fraction"]}


def calibrate_power_green(trials=20, r=3, z=complex(2, 0.01)):
    cfg = _quiet({"N": 1000, "d": 300, "trials": trials, "seed": CALIBRATION_SEED}, "rigidity")
    ratios = [power_green_check(GreenEvaluator(trial_graph(cfg, t)), z, r) for t in range(trials)]
    return {"config": {**cfg.to_dict(), "r": r, "z": [z.real, z.imag]},
            "observed_max": max(ratios), "constant": ceil_sig(SAFETY * max(ratios))}


def power_deviation_ratios(cfg, r=2, rows=10):
    """``sum_j |(A^r)_ij - d^r/N| / (d^(r-1) sqrt N)`` for the first ``rows`` vertices of each trial."""
    scale = cfg.d ** (r - 1) * math.sqrt(cfg.n)
    return [power_row_deviation(trial_graph(cfg, t), r, i).deviation / scale
            for t in range(cfg.trials) for i in range(rows)]


def calibrate_power_deviation(trials=20, r=2, rows=10):
    cfg = _quiet({"N": 1000, "d": 300, "trials": trials, "seed": CALIBRATION_SEED}, "rigidity")
    ratios = power_deviation_ratios(cfg, r, rows)
    return {"config": {**cfg.to_dict(), "r": r, "rows": rows},
            "observed_max": max(ratios), "constant": ceil_sig(SAFETY * max(ratios))}


def calibrate_local_law(threads=None, trials=100):
    cfg = _quiet({"N": 2000, "d": 500, "trials": trials, "seed": CALIBRATION_SEED}, "local-law")
    rep = run_local_law(cfg, threads=threads)
    ratios = rep.summary["ratios"]
    return {"config": cfg.to_dict(),
            "observed_max": {r: ratios[r]["max"] for r in RATIOS},
            "constants": {r: ceil_sig(SAFETY * ratios[r]["max"]) for r in RATIOS},
            "delocalization_ratio_max": rep.summary["delocalization_ratio"].get("max")}


def continuity_jumps(n=1000, d=300, paths=5, dt=1e-3, t_max=0.05, root=CALIBRATION_SEED):
    """Largest ``|xi_2(t + dt) - xi_2(t)|`` along fine time grids."""
    cfg = _quiet({"N": n, "d": d, "trials": paths, "seed": root}, "dbm")
    times = np.arange(0.0, t_max + dt / 2, dt)
    worst = 0.0
    for t in range(paths):
        path = dbm_path(trial_graph(cfg, t), times, trial_rng(root, t, "goe"))
        worst = max(worst, float(np.max(np.abs(np.diff(path.xi2)))))
    return worst


def calibrate_dbm(threads=None, trials=200):
    cfg = _quiet({"N": 1000, "d": 300, "mu": 0.1, "trials": trials, "seed": CALIBRATION_SEED}, "dbm")
    rep = run_dbm(cfg, threads=threads)
    funcs = rep.summary["functionals"]
    jump = continuity_jumps()
    return {"config": cfg.to_dict(),
            "delta_hat": {k: v["delta_hat"] for k, v in funcs.items()},
            "bootstrap_se": {k: v["bootstrap_se"] for k, v in funcs.items()},
            "budgets": {k: ceil_sig(2 * abs(v["delta_hat"])) for k, v in funcs.items()},
            "edge_star_max": rep.summary["edge_star"].get("max"),
            "continuity": {"dt": 1e-3, "t_max": 0.05, "paths": 5, "observed_max_jump": jump,
                           "jump_threshold": ceil_sig(SAFETY * jump)}}


PARTS = {
    "rigidity": calibrate_rigidity,
    "power_green": lambda threads=None: calibrate_power_green(),
    "power_deviation": lambda threads=None: calibrate_power_deviation(),
    "local_law": calibrate_local_law,
    "dbm": calibrate_dbm,
}


def run_calibration(parts=None, path=DEFAULT_PATH, threads=None, log=print):
    """Run the selected parts and merge their results into ``path``."""
    path = Path(path)
    data = {}
    for name in parts or PARTS:
        started = utc_now()
        result = PARTS[name](threads=threads)
        result["started"], result["finished"] = started, utc_now()
        # re-read so concurrent runs of different parts do not clobber each other
        data = json.loads(path.read_text()) if path.is_file() else {}
        data[name] = result
        data["seed"], data["version"], data["safety_factor"] = CALIBRATION_SEED, VERSION, SAFETY
        path.write_text(json.dumps(data, indent=2, sort_keys=True) + "\n")
        log(f"{name}: done")
    calibration.cache_clear()
    return data
