"""Command-line entry point: ``regspec <subcommand>``.

Exit codes: 0 success, 2 configuration error, 3 numerical failure,
4 resource guard exceeded.
"""
import argparse
import csv
import json
import sys
import warnings
from pathlib import Path

import numpy as np

from . import __version__
from .errors import ConfigError, DomainError, InfeasibleError, RegspecError
from .harness import _COMMON, _KNOBS, KINDS, RegimeWarning, emit_report, parse_config, thread_count

EXIT_CONFIG, EXIT_NUMERICAL, EXIT_RESOURCE = 2, 3, 4


def _flag(key):
    return "--" + key.replace("_", "-")


def _bool(text):
    low = text.lower()
    if low in ("1", "true", "yes"):
        return True
    if low in ("0", "false", "no"):
        return False
    raise argparse.ArgumentTypeError(f"expected true/false, got {text!r}")


def _num(kind):
    def conv(text):
        if text.lower() in ("none", "null"):
            return None
        return kind(text)

    conv.__name__ = kind.__name__
    return conv


def _add_schema_flags(p, kind):
    schema = {**_COMMON, **_KNOBS[kind]}
    for key, (types, _) in schema.items():
        types = types if isinstance(types, tuple) else (types,)
        base = next(t for t in types if t is not type(None))
        conv = _bool if base is bool else _num(base)
        p.add_argument(_flag(key), dest=f"opt_{key}", type=conv, default=None, metavar=base.__name__.upper())
    p.add_argument("--config", type=Path, help="JSON config; flags override its values")
    p.add_argument("--out", type=Path, default=None, help="output directory (default out/<kind>)")
    p.add_argument("--threads", type=int, default=None, help="worker count (default REGSPEC_THREADS or 1)")


def _overrides(args):
    return {k[4:]: v for k, v in vars(args).items() if k.startswith("opt_") and v is not None}


def _run_experiment(args):
    from .experiments import RUNNERS

    kind = args.command
    with warnings.catch_warnings(record=True) as caught:
        warnings.simplefilter("always", RegimeWarning)
        cfg = parse_config(args.config, kind=kind, overrides=_overrides(args))
    for w in caught:
        print(f"warning: {w.message}", file=sys.stderr)
    threads = args.threads if args.threads is not None else thread_count()
    runner = RUNNERS[kind]
    report = runner(cfg) if kind == "verify-switching" else runner(cfg, threads=threads)
    out = args.out or Path("out") / kind
    paths = emit_report(report, out)
    print(f"{kind}: {len(report.rows)} rows, {report.failures} failures -> {paths['report.json']}")
    return 0


# -- utility subcommands ---------------------------------------------------------

def _sample(args):
    from .graph import write_graphs
    from .sampler import SamplerConfig, SwitchSampler

    sampler = SwitchSampler(SamplerConfig(args.n, args.d, args.seed, args.burn_in, args.thinning))
    graphs = sampler.samples(args.count)
    if args.out:
        write_graphs(args.out, graphs)
    else:
        from .graph import format_graph

        sys.stdout.write("".join(format_graph(g) for g in graphs))
    return 0


def _load_graph(args):
    from .graph import read_graphs
    from .sampler import SamplerConfig, sample_uniform

    if args.input:
        graphs = read_graphs(args.input)
        if len(graphs) != 1:
            raise DomainError(f"{args.input}: expected one graph, found {len(graphs)}")
        return graphs[0]
    if args.n is None or args.d is None:
        raise ConfigError(["either --in or both --n and --d are required"])
    return sample_uniform(SamplerConfig(args.n, args.d, args.seed))


def _spectrum(args):
    from .spectral import extreme_eigs, full_spectrum

    g = _load_graph(args)
    if args.k:
        top, bottom = extreme_eigs(g, args.k)
        out = {"top": top.tolist(), "bottom": bottom.tolist()}
    else:
        out = {"eigenvalues": full_spectrum(g, method=args.method).tolist()}
    print(json.dumps(out))
    return 0


def _green(args):
    from .spectral import GreenEvaluator, semicircle_m

    g = _load_graph(args)
    ge = GreenEvaluator(g)
    z = complex(args.re, args.im)
    out = {"z": [z.real, z.imag], "gbar": [ge.gbar(z).real, ge.gbar(z).imag],
           "m": [semicircle_m(z).real, semicircle_m(z).imag]}
    if args.entry:
        v = ge.entry(z, *args.entry)
        out["entry"] = {"index": args.entry, "value": [v.real, v.imag]}
    print(json.dumps(out))
    return 0


def _write_csv(path, header, rows):
    if path is None:
        writer = csv.writer(sys.stdout, lineterminator="\n")
        writer.writerow(header)
        writer.writerows(rows)
        return
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(header)
        writer.writerows(rows)


def _goe(args):
    from .ensembles import goe_edge_sample
    from .harness import derive_seed, format_value, trial_rng

    scale = args.n ** (2 / 3)
    header = ["sample", "seed", *[f"top_{i + 1}" for i in range(args.k)],
              *[f"bottom_{i + 1}" for i in range(args.k)]]
    rows = []
    for i in range(args.trials):
        top, bottom = goe_edge_sample(args.n, args.k, trial_rng(args.seed, i, "goe-reference"))
        vals = [*(scale * (top - 2)), *(scale * (bottom + 2))]
        rows.append([i, derive_seed(args.seed, i, "goe-reference"), *(format_value(float(v)) for v in vals)])
    _write_csv(args.out, header, rows)
    return 0


def _times(text):
    try:
        return [float(t) for t in text.split(",") if t.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated times, got {text!r}") from None


def _dbm_path(args):
    from .ensembles import dbm_path
    from .harness import format_value, trial_rng

    g = _load_graph(args)
    times = np.array([t for chunk in args.times for t in chunk], dtype=float)
    path = dbm_path(g, times, trial_rng(args.seed, 0, "goe"), mu=args.mu)
    rows = [[format_value(float(t)), format_value(float(x2)), format_value(float(xt.real)),
             format_value(float(xt.imag))] for t, x2, xt in zip(path.times, path.xi2, path.x_t)]
    _write_csv(args.out, ["t", "xi2", "x_t_re", "x_t_im"], rows)
    return 0


def _dbm(args):
    return _dbm_path(args) if args.input else _run_experiment(args)


def _calibrate(args):
    from .experiments.calibration import PARTS, run_calibration

    parts = args.parts or list(PARTS)
    unknown = sorted(set(parts) - set(PARTS))
    if unknown:
        raise ConfigError([f"unknown calibration parts {unknown}; accepted: {sorted(PARTS)}"])
    kwargs = {"path": args.path} if args.path else {}
    run_calibration(parts, threads=args.threads, **kwargs)
    return 0


def _tw_table(args):
    from .tracy_widom import write_table

    args.out.mkdir(parents=True, exist_ok=True)
    write_table(args.out)
    print(f"wrote {args.out / 'tw1_table.csv'}")
    return 0


def _graph_source_flags(p):
    p.add_argument("--in", dest="input", type=Path, help="graph file (text format)")
    p.add_argument("--n", type=int)
    p.add_argument("--d", type=int)
    p.add_argument("--seed", type=int, default=0)


def build_parser():
    parser = argparse.ArgumentParser(prog="regspec", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"regspec {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("sample", help="draw graphs from the switch chain")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--d", type=int, required=True)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--count", type=int, default=1)
    p.add_argument("--burn-in", type=int, default=None)
    p.add_argument("--thinning", type=int, default=None)
    p.add_argument("--out", type=Path)
    p.set_defaults(func=_sample)

    p = sub.add_parser("spectrum", help="adjacency spectrum of one graph")
    _graph_source_flags(p)
    p.add_argument("--method", choices=("lapack", "householder-ql"), default="lapack")
    p.add_argument("--k", type=int, default=0, help="only the k extreme nontrivial eigenvalues")
    p.set_defaults(func=_spectrum)

    p = sub.add_parser("green", help="normalized resolvent at one spectral parameter")
    _graph_source_flags(p)
    p.add_argument("--re", type=float, required=True)
    p.add_argument("--im", type=float, required=True)
    p.add_argument("--entry", type=int, nargs=2, metavar=("I", "J"))
    p.set_defaults(func=_green)

    p = sub.add_parser("goe", help="rescaled GOE edge samples")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--k", type=int, default=2)
    p.add_argument("--trials", type=int, default=1)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", type=Path, help="CSV path (default stdout)")
    p.set_defaults(func=_goe)

    for kind in KINDS:
        p = sub.add_parser(kind, help=f"run the {kind} experiment")
        _add_schema_flags(p, kind)
        p.set_defaults(func=_run_experiment)
        if kind == "dbm":
            p.add_argument("--in", dest="input", type=Path,
                           help="path mode: evaluate one interpolation path for this graph")
            p.add_argument("--times", type=_times, nargs="+", default=[[0.0, 0.1]],
                           help="comma-separated times, e.g. 0,0.05,0.1 (path mode)")
            p.set_defaults(func=_dbm)

    p = sub.add_parser("calibrate", help="regenerate the frozen calibration constants")
    p.add_argument("--parts", nargs="+")
    p.add_argument("--path", type=Path)
    p.add_argument("--threads", type=int, default=None)
    p.set_defaults(func=_calibrate)

    p = sub.add_parser("tw-table", help="regenerate the TW1 CDF table")
    p.add_argument("--out", type=Path, required=True)
    p.set_defaults(func=_tw_table)
    return parser


def main(argv=None):
    args = build_parser().parse_args(argv)
    if args.command == "dbm" and args.input:
        args.seed = args.opt_seed or 0
        args.mu = args.opt_mu if args.opt_mu is not None else 0.1
        args.n = args.d = None
    try:
        return args.func(args)
    except ConfigError as exc:
        for v in exc.violations:
            print(f"config error: {v}", file=sys.stderr)
        return EXIT_CONFIG
    except (DomainError, InfeasibleError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except RegspecError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return exc.exit_code
    except np.linalg.LinAlgError as exc:
        print(f"numerical error: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL
    except OSError as exc:
        print(f"i/o error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
