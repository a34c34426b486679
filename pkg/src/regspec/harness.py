"""Configuration, seeding, trial scheduling and report persistence.

Seeds: ``derive_seed(root, trial, label)`` is the first 8 bytes (little
endian) of SHA-256 over the ASCII string ``"{root}:{trial}:{label}"``.
The scheme is identified as ``regspec-sha256-v1`` in every manifest and
must never change for existing labels.

Output: ``trials.csv`` (one row per trial), optional extra tables,
``report.json`` (config, summary, digests) and ``manifest.json``
(provenance with timestamps). Floats are written with ``repr`` so they
round-trip exactly; everything except the manifest is byte-identical
across re-runs of the same config.
"""
from __future__ import annotations

import csv
import hashlib
import io
import json
import math
import os
import warnings
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from datetime import datetime, timezone
from pathlib import Path

import numpy as np

from .errors import ConfigError, RegspecError

SEED_SCHEME = "regspec-sha256-v1"
VERSION = "0.1.0"


class RegimeWarning(UserWarning):
    """Parameters outside the regime where the asymptotic statements apply."""


def derive_seed(root, trial, label):
    digest = hashlib.sha256(f"{int(root)}:{int(trial)}:{label}".encode("ascii")).digest()
    return int.from_bytes(digest[:8], "little")


def trial_rng(root, trial, label):
    return np.random.Generator(np.random.PCG64(derive_seed(root, trial, label)))


# ---------------------------------------------------------------- config

KINDS = ("rigidity", "ramanujan", "universality", "local-law", "dbm", "verify-switching")

_COMMON = {
    "N": (int, None),
    "d": (int, None),
    "trials": (int, None),
    "seed": (int, 0),
    "burn_in": ((int, type(None)), None),
    "thinning": ((int, type(None)), None),
    "check_regime": (bool, True),
}

_KNOBS = {
    "rigidity": {"k": (int, 3), "delta": (float, 0.1), "window_hi": (float, 10.0)},
    "ramanujan": {"k": (int, 3)},
    "universality": {"goe_samples": (int, 20000), "min_trials": (int, 200)},
    "local-law": {
        "delta": (float, 0.1),
        "n_energy": (int, 8),
        "n_eta": (int, 5),
        "n_edge_energy": (int, 5),
        "n_edge_eta": (int, 4),
        "deloc_const": (float, 10.0),
    },
    "dbm": {
        "k": (int, 3),
        "mu": (float, 0.1),
        "kappa_const": (float, 1.0),
        "t_star": ((float, type(None)), None),
        "bootstrap": (int, 1000),
        "nodes": (int, 64),
    },
    "verify-switching": {"n_functionals": (int, 20), "max_power": (int, 4), "taylor_order": (int, 1)},
}

_TRIALS_DEFAULT = {"verify-switching": 0}


@dataclass(frozen=True)
class ExperimentConfig:
    kind: str
    n: int
    d: int
    trials: int
    seed: int
    params: dict = field(default_factory=dict)
    warnings: tuple = ()

    def __getitem__(self, key):
        return self.params[key]

    def get(self, key, default=None):
        return self.params.get(key, default)

    def to_dict(self):
        out = {"kind": self.kind, "N": self.n, "d": self.d, "trials": self.trials, "seed": self.seed}
        out.update(self.params)
        return out


def _type_ok(value, types):
    types = types if isinstance(types, tuple) else (types,)
    if isinstance(value, bool) and bool not in types:
        return False
    if float in types and isinstance(value, int) and not isinstance(value, bool):
        return True
    return isinstance(value, types)


def _type_name(types):
    types = types if isinstance(types, tuple) else (types,)
    return " or ".join("null" if t is type(None) else t.__name__ for t in types)


def parse_config(source=None, kind=None, overrides=None):
    """Validate a config given as a JSON path, a dict, or nothing (flags only).

    ``overrides`` (e.g. CLI flags) win over file values; ``None`` entries are
    ignored. Raises :class:`ConfigError` listing every violation.
    """
    if source is None:
        raw = {}
    elif isinstance(source, dict):
        raw = dict(source)
    else:
        path = Path(source)
        try:
            raw = json.loads(path.read_text())
        except OSError as exc:
            raise ConfigError([f"{path}: cannot read ({exc.strerror})"]) from exc
        except json.JSONDecodeError as exc:
            raise ConfigError([f"{path}: invalid JSON ({exc.msg} at line {exc.lineno})"]) from exc
        if not isinstance(raw, dict):
            raise ConfigError([f"{path}: top level must be an object"])
    for key, value in (overrides or {}).items():
        if value is not None:
            raw[key] = value

    problems = []
    file_kind = raw.pop("kind", None)
    if kind is None:
        kind = file_kind
    elif file_kind is not None and file_kind != kind:
        problems.append(f"kind: config says {file_kind!r} but the command is {kind!r}")
    if kind not in KINDS:
        raise ConfigError(problems + [f"kind: must be one of {', '.join(KINDS)} (got {kind!r})"])

    schema = dict(_COMMON)
    schema.update(_KNOBS[kind])
    unknown = sorted(set(raw) - set(schema))
    if unknown:
        problems.append(f"unknown keys {unknown}; accepted keys: {sorted(schema)}")
    values = {}
    for key, (types, default) in schema.items():
        if key in raw:
            v = raw[key]
            if not _type_ok(v, types):
                problems.append(f"{key}: expected {_type_name(types)}, got {type(v).__name__}")
                continue
            if isinstance(v, int) and not isinstance(v, bool) and float in (types if isinstance(types, tuple) else (types,)):
                v = float(v)
            values[key] = v
        elif key == "trials" and kind in _TRIALS_DEFAULT:
            values[key] = _TRIALS_DEFAULT[kind]
        elif default is None and key in ("N", "d", "trials"):
            problems.append(f"{key}: required")
        else:
            values[key] = default

    notes = []
    n, d = values.get("N"), values.get("d")
    if isinstance(n, int) and isinstance(d, int):
        if n < 1:
            problems.append("N: must be >= 1")
        if not 0 <= d <= n - 1:
            problems.append(f"d: must lie in [0, N-1] (got d={d}, N={n})")
        if (n * d) % 2:
            problems.append(f"N*d must be even (got N={n}, d={d})")
        if kind != "verify-switching" and values.get("check_regime", True):
            if 2 * d > n:
                problems.append(f"regime: d <= N/2 is required (got d={d}, N={n})")
            if d < 3:
                notes.append(f"d={d} < 3: far outside the dense regime")
            elif d <= n ** (2 / 3):
                notes.append(f"d={d} <= N^(2/3)={n ** (2 / 3):.1f}: below the dense regime")
    if isinstance(values.get("trials"), int) and values["trials"] < 0:
        problems.append("trials: must be >= 0")
    seed = values.get("seed")
    if isinstance(seed, int) and not 0 <= seed < 2**64:
        problems.append("seed: must be a 64-bit unsigned integer")
    for key in ("burn_in",):
        if isinstance(values.get(key), int) and values[key] < 0:
            problems.append(f"{key}: must be >= 0")
    if isinstance(values.get("thinning"), int) and values["thinning"] < 1:
        problems.append("thinning: must be >= 1")
    if "k" in values and isinstance(values["k"], int) and not 1 <= values["k"] <= 16:
        problems.append("k: must lie in [1, 16]")
    if "delta" in values and isinstance(values["delta"], float) and not 0 < values["delta"] < 1:
        problems.append("delta: must lie in (0, 1)")
    if kind == "dbm":
        mu = values.get("mu")
        if isinstance(mu, float) and not 0 < mu < 1 / 3:
            problems.append("mu: must lie in (0, 1/3) so that t* <= 1")
        ts = values.get("t_star")
        if isinstance(ts, float) and not 0 < ts <= 1:
            problems.append("t_star: must lie in (0, 1]")
        if isinstance(values.get("bootstrap"), int) and values["bootstrap"] < 1:
            problems.append("bootstrap: must be >= 1")
    for key in ("n_energy", "n_eta", "n_edge_energy", "n_edge_eta", "goe_samples", "n_functionals"):
        if isinstance(values.get(key), int) and values[key] < 1:
            problems.append(f"{key}: must be >= 1")
    if kind == "verify-switching" and isinstance(values.get("max_power"), int) and not 1 <= values["max_power"] <= 8:
        problems.append("max_power: must lie in [1, 8]")
    if problems:
        raise ConfigError(problems)
    for note in notes:
        warnings.warn(note, RegimeWarning, stacklevel=2)
    params = {k: values[k] for k in sorted(values) if k not in ("N", "d", "trials", "seed")}
    return ExperimentConfig(kind, n, d, values["trials"], values["seed"], params, tuple(notes))


# ---------------------------------------------------------------- trials

def thread_count():
    raw = os.environ.get("REGSPEC_THREADS", "1")
    try:
        return max(1, int(raw))
    except ValueError:
        raise ConfigError([f"REGSPEC_THREADS must be an integer (got {raw!r})"]) from None


@dataclass(frozen=True)
class TrialFailure:
    index: int
    error: str


def map_trials(fn, n_trials, threads=None):
    """Run ``fn(index)`` for every trial; results come back in index order.

    Package errors and LAPACK failures become :class:`TrialFailure` values
    so one bad trial never aborts the run.
    """
    threads = thread_count() if threads is None else threads

    def guarded(i):
        try:
            return fn(i)
        except (RegspecError, np.linalg.LinAlgError, FloatingPointError) as exc:
            return TrialFailure(i, f"{type(exc).__name__}: {exc}")

    if threads <= 1 or n_trials <= 1:
        return [guarded(i) for i in range(n_trials)]
    with ThreadPoolExecutor(max_workers=threads) as pool:
        return list(pool.map(guarded, range(n_trials)))


# ---------------------------------------------------------------- reports

@dataclass
class ExperimentReport:
    kind: str
    config: dict
    columns: list
    rows: list
    summary: dict
    failures: int = 0
    tables: dict = field(default_factory=dict)
    started: str | None = None
    finished: str | None = None


@dataclass(frozen=True)
class RunManifest:
    config: dict
    root_seed: int
    seed_scheme: str
    version: str
    started: str | None
    finished: str | None
    digests: dict

    def to_dict(self):
        return {
            "config": self.config,
            "root_seed": self.root_seed,
            "seed_scheme": self.seed_scheme,
            "version": self.version,
            "started": self.started,
            "finished": self.finished,
            "digests": self.digests,
        }


def utc_now():
    return datetime.now(timezone.utc).isoformat(timespec="seconds")


def format_value(v):
    """Round-trip-safe text for one CSV cell."""
    if v is None:
        return ""
    if isinstance(v, (bool, np.bool_)):
        return "1" if v else "0"
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    if isinstance(v, (float, np.floating)):
        return repr(float(v))
    return str(v)


def parse_value(text):
    if text == "":
        return None
    try:
        return int(text)
    except ValueError:
        pass
    try:
        return float(text)
    except ValueError:
        return text


def jsonable(obj):
    """Plain-JSON copy: numpy scalars unwrapped, non-finite floats -> null."""
    if isinstance(obj, dict):
        return {str(k): jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return [jsonable(v) for v in obj.tolist()]
    if isinstance(obj, (bool, np.bool_)):
        return bool(obj)
    if isinstance(obj, (int, np.integer)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        f = float(obj)
        return f if math.isfinite(f) else None
    return obj


def _csv_bytes(columns, rows):
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(columns)
    for row in rows:
        w.writerow([format_value(v) for v in row])
    return buf.getvalue().encode("utf-8")


def _json_bytes(obj):
    return (json.dumps(jsonable(obj), indent=2, sort_keys=True, allow_nan=False) + "\n").encode("utf-8")


def sha256_hex(data):
    return hashlib.sha256(data).hexdigest()


def _write(path, data):
    try:
        path.write_bytes(data)
    except OSError as exc:
        raise OSError(exc.errno, f"cannot write {path}: {exc.strerror}") from exc


def emit_report(report, out_dir):
    """Write the report files; returns ``{name: path}``."""
    out = Path(out_dir)
    try:
        out.mkdir(parents=True, exist_ok=True)
    except OSError as exc:
        raise OSError(exc.errno, f"cannot create {out}: {exc.strerror}") from exc
    files = {"trials.csv": _csv_bytes(report.columns, report.rows)}
    for name in sorted(report.tables):
        cols, rows = report.tables[name]
        files[f"{name}.csv"] = _csv_bytes(cols, rows)
    digests = {name: sha256_hex(data) for name, data in files.items()}
    body = {
        "kind": report.kind,
        "config": report.config,
        "summary": report.summary,
        "failures": report.failures,
        "columns": report.columns,
        "tables": {name: list(report.tables[name][0]) for name in sorted(report.tables)},
        "digests": digests,
        "seed_scheme": SEED_SCHEME,
        "version": VERSION,
    }
    files["report.json"] = _json_bytes(body)
    manifest = RunManifest(
        config=report.config,
        root_seed=int(report.config.get("seed", 0)),
        seed_scheme=SEED_SCHEME,
        version=VERSION,
        started=report.started,
        finished=report.finished,
        digests={name: sha256_hex(data) for name, data in files.items()},
    )
    files["manifest.json"] = _json_bytes(manifest.to_dict())
    paths = {}
    for name, data in files.items():
        _write(out / name, data)
        paths[name] = out / name
    return paths


def _read_csv(path):
    with open(path, newline="") as fh:
        rows = list(csv.reader(fh))
    if not rows:
        return [], []
    return rows[0], [[parse_value(c) for c in r] for r in rows[1:]]


def load_report(out_dir):
    out = Path(out_dir)
    body = json.loads((out / "report.json").read_text())
    columns, rows = _read_csv(out / "trials.csv")
    tables = {name: _read_csv(out / f"{name}.csv") for name in body.get("tables", {})}
    manifest = json.loads((out / "manifest.json").read_text()) if (out / "manifest.json").exists() else {}
    return ExperimentReport(body["kind"], body["config"], columns, rows, body["summary"],
                            body.get("failures", 0), tables, manifest.get("started"),
                            manifest.get("finished"))


def verify_digests(out_dir):
    """True iff every digest in report.json and manifest.json matches the files."""
    out = Path(out_dir)
    body = json.loads((out / "report.json").read_text())
    manifest = json.loads((out / "manifest.json").read_text())
    for table in (body["digests"], manifest["digests"]):
        for name, digest in table.items():
            if sha256_hex((out / name).read_bytes()) != digest:
                return False
    return True
