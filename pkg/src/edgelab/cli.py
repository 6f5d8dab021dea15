"""Command-line entry point: ``python -m edgelab <subcommand> ...``.

Statistic subcommands (``moments``, ``ks``, ...) run the experiment pipeline for
one statistic with the given sizes and trial count, write the usual result
files to ``--out`` and print the summaries as JSON.  ``run`` takes a config file.
"""
from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from . import io as rio
from .constants import DEFAULT_PREFACTOR, constants_table, format_table, table_json
from .ensemble import build_centered_adjacency, evolve_exact, read_matrix, write_matrix
from .experiment import ConfigError, ExperimentConfig, load_config, run_experiment
from .graphs import read_edge_list, sample_regular_graph, write_edge_list
from .metrics import fit_rate

# subcommand -> statistic flag in ExperimentConfig
_STAT_COMMANDS = {
    "moments": "moments",
    "decorrelation": "decorrelation",
    "joint": "joint",
    "local-law": "local_law",
    "spacing": "spacing",
    "ks": "ks",
}


def _sizes(text):
    return [int(x) for x in text.split(",") if x.strip()]


def _add_experiment_args(p):
    p.add_argument("--sizes", type=_sizes, default=[500], help="comma-separated graph sizes")
    p.add_argument("--degree", "-d", type=int, default=3)
    p.add_argument("--epsilon", type=float, default=0.1)
    p.add_argument("--trials", type=int, default=1000)
    p.add_argument("--seed", type=int, default=0, help="base seed")
    p.add_argument("--times", default="0", help="comma-separated subset of 0, t*, or numbers")
    p.add_argument("--test-vectors", default="coordinate-difference")
    p.add_argument("--K", type=int, default=4)
    p.add_argument("--m", type=int, default=1)
    p.add_argument("--k-max", type=int, default=40)
    p.add_argument("--out", default="results")
    p.add_argument("--workers", type=int, default=None)


def _config_from_args(args, statistics) -> ExperimentConfig:
    k_max = args.k_max
    if "spacing" not in statistics:
        k_max = min(k_max, max(1, min(args.sizes) // 10))
    return ExperimentConfig(
        sizes=args.sizes,
        degree=args.degree,
        epsilon=args.epsilon,
        trials=args.trials,
        base_seed=args.seed,
        times=[t.strip() for t in args.times.split(",") if t.strip()],
        test_vectors=[t.strip() for t in args.test_vectors.split(",") if t.strip()],
        K=args.K,
        m=args.m,
        statistics=list(statistics),
        output_dir=args.out,
        k_max=k_max,
    )


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="edgelab", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("sample", help="sample a uniform d-regular graph as an edge list")
    p.add_argument("n", type=int)
    p.add_argument("-d", "--degree", type=int, default=3)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("-o", "--output", help="file to write (default stdout)")

    p = sub.add_parser("evolve", help="evolve a graph or matrix under the constrained flow to time t")
    src = p.add_mutually_exclusive_group(required=True)
    src.add_argument("--graph", help="edge-list file")
    src.add_argument("--matrix", help="matrix dump file")
    p.add_argument("-t", "--time", type=float, required=True)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("-o", "--output", help="file to write (default stdout)")

    p = sub.add_parser("overlaps", help="write per-trial overlaps to CSV")
    _add_experiment_args(p)
    for name in _STAT_COMMANDS:
        p = sub.add_parser(name, help=f"run the {name} statistic")
        _add_experiment_args(p)

    p = sub.add_parser("rate", help="fit log(statistic) against log(N) from summary JSON files")
    p.add_argument("files", nargs="+", help="summary JSON files")
    p.add_argument("--statistic", help="statistic_name to select (default: all in the files)")

    p = sub.add_parser("constants", help="evaluate the bound constants")
    p.add_argument("-d", "--degree", type=int, default=3)
    p.add_argument("--epsilon", type=float, default=0.01)
    p.add_argument("-N", "--n", type=float, default=None)
    p.add_argument("--prefactor", type=float, default=DEFAULT_PREFACTOR)
    p.add_argument("--json", action="store_true", help="print JSON only")

    p = sub.add_parser("run", help="run the full pipeline from a config file")
    p.add_argument("config")
    p.add_argument("--out", help="override output_dir")
    p.add_argument("--workers", type=int, default=None)
    return parser


def _emit(text, output):
    if output:
        Path(output).write_text(text)
    else:
        sys.stdout.write(text)


def _write_to(writer, obj, output):
    if output:
        writer(obj, output)
    else:
        writer(obj, sys.stdout)


def _cmd_rate(args):
    entries = []
    for f in args.files:
        data = json.loads(Path(f).read_text())
        entries.extend(data if isinstance(data, list) else [data])
    names = sorted({e["statistic_name"] for e in entries if args.statistic in (None, e["statistic_name"])})
    fits = []
    for name in names:
        pts = [(e["N"], abs(e["value"])) for e in entries if e["statistic_name"] == name]
        fit = fit_rate(pts)
        fits.append(dict(statistic_name=name, points=pts, exponent=fit.exponent, intercept=fit.intercept, residual=fit.residual))
    sys.stdout.write(rio.dumps(fits))


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        if args.command == "sample":
            _write_to(write_edge_list, sample_regular_graph(args.n, args.degree, args.seed), args.output)
        elif args.command == "evolve":
            h0 = build_centered_adjacency(read_edge_list(args.graph)) if args.graph else read_matrix(args.matrix)
            _write_to(write_matrix, evolve_exact(h0, args.time, seed=args.seed), args.output)
        elif args.command == "constants":
            table = constants_table(args.degree, args.epsilon, args.n, args.prefactor)
            if args.json:
                print(table_json(table))
            else:
                print(format_table(table))
                print(table_json(table))
        elif args.command == "rate":
            _cmd_rate(args)
        elif args.command == "run":
            cfg = load_config(args.config)
            if args.out:
                cfg.output_dir = args.out
            rec = run_experiment(cfg, workers=args.workers)
            print(f"wrote {len(rec.files)} files to {cfg.output_dir} (config {rec.config_hash[:12]})")
        else:
            stats = [] if args.command == "overlaps" else [_STAT_COMMANDS[args.command]]
            cfg = _config_from_args(args, stats)
            rec = run_experiment(cfg, workers=args.workers)
            sys.stdout.write(rio.dumps(rec.summaries))
    except ConfigError as exc:
        for key, msg in exc.problems.items():
            print(f"config error: {key}: {msg}", file=sys.stderr)
        return 2
    except (ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    return 0
