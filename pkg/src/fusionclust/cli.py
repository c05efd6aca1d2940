"""Command-line interface: CSV in, JSON or CSV out.

Subcommands: path, bmt, cluster, population, table1, simulate-modality,
simulate-k, simulate-scale, consistency.  JSON is the canonical output; CSV
is a flat projection for the tabular results.  Labels are reported in the
original row order of the input file.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import os
import sys

import numpy as np

from .bmt import BmtConfig, run_bmt, run_bmt_multivariate
from .experiments import (
    ExperimentSpec,
    run_consistency_check,
    run_k_experiment,
    run_modality_experiment,
    run_scale_experiment,
)
from .mixtures import parse_mixture, parse_mixture_columns
from .path import SortedSample, build_merge_path
from .population import find_population_split, population_table_row

__all__ = ["read_csv", "run_command", "main"]


def read_csv(path: str) -> np.ndarray:
    """Numeric n x p matrix from a CSV file, with an optional header row.

    The header is detected by a non-numeric first row.  Ragged or
    non-numeric data rows raise a parse error naming the 1-based line.
    """
    with open(path, newline="") as fh:
        rows = list(csv.reader(fh))
    rows = [(i + 1, row) for i, row in enumerate(rows) if any(f.strip() for f in row)]
    if not rows:
        raise ValueError(f"{path}: empty input")

    def parse_row(lineno, row):
        try:
            return [float(f) for f in row]
        except ValueError:
            raise ValueError(f"{path}: non-numeric field at line {lineno}") from None

    first_line, first = rows[0]
    try:
        parsed = [[float(f) for f in first]]
        start = 1
    except ValueError:
        parsed = []
        start = 1
        if len(rows) == 1:
            raise ValueError(f"{path}: no data rows") from None
    ncol = len(first)
    for lineno, row in rows[start:]:
        if len(row) != ncol:
            raise ValueError(
                f"{path}: expected {ncol} columns but found {len(row)} at line {lineno}"
            )
        parsed.append(parse_row(lineno, row))
    if not parsed:
        raise ValueError(f"{path}: no data rows")
    return np.asarray(parsed, dtype=float)


def _csv_from_rows(header, rows) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(header)
    writer.writerows(rows)
    return buf.getvalue()


def _summary_csv(summary_dict) -> str:
    hist = summary_dict.pop("k_histogram", {})
    header = list(summary_dict) + [f"k{k}" for k in sorted(hist, key=int)]
    row = list(summary_dict.values()) + [hist[k] for k in sorted(hist, key=int)]
    return _csv_from_rows(header, [row])


def _load_univariate(args) -> np.ndarray:
    data = read_csv(args.input)
    if data.shape[1] != 1:
        raise ValueError(f"{args.input}: expected a single column, found {data.shape[1]}")
    return data[:, 0]


def _cmd_path(args):
    x = _load_univariate(args)
    path = build_merge_path(SortedSample.from_data(x))
    events = [e.to_dict() for e in path.events]
    if args.format == "json":
        return {"n": path.sample.n, "events": events}
    header = ["lambda", "left_size", "right_size", "left_mean", "right_mean",
              "left_max", "right_min", "boundary"]
    return _csv_from_rows(header, [[e[h] for h in header] for e in events])


def _cmd_bmt(args):
    x = _load_univariate(args)
    res = run_bmt(SortedSample.from_data(x), BmtConfig(alpha=args.alpha))
    labels = np.searchsorted(np.asarray(res.split_points), x, side="right")
    if args.format == "json":
        out = res.to_dict()
        out["labels"] = labels.tolist()
        return out
    return _csv_from_rows(["row", "value", "label"],
                          [[i, v, int(l)] for i, (v, l) in enumerate(zip(x, labels))])


def _cmd_cluster(args):
    data = read_csv(args.input)
    res = run_bmt_multivariate(data, BmtConfig(alpha=args.alpha))
    if args.format == "json":
        return res.to_dict()
    p = data.shape[1]
    header = ["row"] + [f"label_dim{j}" for j in range(p)]
    return _csv_from_rows(header, [[i, *lbl] for i, lbl in enumerate(res.labels)])


def _cmd_population(args):
    model = parse_mixture(args.mixture)
    split = find_population_split(model, args.grid_step)
    out = split.to_dict()
    if args.format == "json":
        return out
    return _csv_from_rows(list(out), [list(out.values())])


def _cmd_table1(args):
    model = parse_mixture(args.mixture)
    row = population_table_row(model, args.grid_step)
    if args.format == "json":
        return row
    return _csv_from_rows(list(row), [list(row.values())])


def _spec_from_args(args) -> ExperimentSpec:
    models = parse_mixture_columns(args.mixture)
    mixture = models[0] if len(models) == 1 else models
    return ExperimentSpec(mixture=mixture, n=args.n, replicates=args.replicates,
                          alpha=args.alpha, base_seed=args.seed)


def _cmd_simulate(runner):
    def cmd(args):
        summary = runner(_spec_from_args(args), n_jobs=args.jobs)
        if args.format == "json":
            return summary.to_dict()
        return _summary_csv(summary.to_dict())

    return cmd


def _cmd_consistency(args):
    model = parse_mixture(args.mixture)
    sizes = [int(s) for s in args.sizes.split(",") if s.strip()]
    if not sizes:
        raise ValueError("--sizes must list at least one sample size")
    out = run_consistency_check(model, sizes, args.replicates, args.seed,
                                alpha=args.alpha)
    if args.format == "json":
        return out
    return _csv_from_rows(["n", "median_error"],
                          [[r["n"], r["median_error"]] for r in out["rows"]])


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="fusionclust",
        description="Univariate fusion-penalty clustering and its population analysis",
    )
    sub = parser.add_subparsers(dest="subcommand", required=True)

    def add_common(p, *, data=False, mixture=False, sim=False):
        p.add_argument("--format", choices=("json", "csv"), default="json")
        p.add_argument("--output", help="write output to this file instead of stdout")
        if data:
            p.add_argument("--input", required=True, help="CSV file of observations")
            p.add_argument("--alpha", type=float, default=0.1)
        if mixture:
            p.add_argument("--mixture", required=True,
                           help='e.g. "0.5*normal(-2,1)+0.5*normal(2,1)"')
        if sim:
            p.add_argument("--alpha", type=float, default=0.1)
            p.add_argument("--n", type=int, required=True)
            p.add_argument("--replicates", type=int, default=20)
            p.add_argument("--seed", type=int, default=0)
            p.add_argument("--jobs", type=int,
                           default=int(os.environ.get("FUSIONCLUST_JOBS", "1")))

    p = sub.add_parser("path", help="full merge path of a univariate sample")
    add_common(p, data=True)
    p.set_defaults(func=_cmd_path)

    p = sub.add_parser("bmt", help="post-processed clustering of one column")
    add_common(p, data=True)
    p.set_defaults(func=_cmd_bmt)

    p = sub.add_parser("cluster", help="independent per-column clustering of a matrix")
    add_common(p, data=True)
    p.set_defaults(func=_cmd_cluster)

    p = sub.add_parser("population", help="population split analysis of a mixture")
    add_common(p, mixture=True)
    p.add_argument("--grid-step", type=float, default=None, dest="grid_step")
    p.set_defaults(func=_cmd_population)

    p = sub.add_parser("table1", help="two-normal split analysis as a flat row")
    add_common(p, mixture=True)
    p.add_argument("--grid-step", type=float, default=None, dest="grid_step")
    p.set_defaults(func=_cmd_table1)

    p = sub.add_parser("simulate-modality", help="multimodality detection rate")
    add_common(p, mixture=True, sim=True)
    p.set_defaults(func=_cmd_simulate(run_modality_experiment))

    p = sub.add_parser("simulate-k", help="detected cluster count distribution")
    add_common(p, mixture=True, sim=True)
    p.set_defaults(func=_cmd_simulate(run_k_experiment))

    p = sub.add_parser("simulate-scale", help="clustering MSE vs the oracle partition")
    add_common(p, mixture=True, sim=True)
    p.set_defaults(func=_cmd_simulate(run_scale_experiment))

    p = sub.add_parser("consistency", help="split-recovery error trend over sample sizes")
    add_common(p, mixture=True)
    p.add_argument("--sizes", default="1000,10000,100000",
                   help="comma-separated sample sizes")
    p.add_argument("--replicates", type=int, default=20)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--alpha", type=float, default=0.1)
    p.set_defaults(func=_cmd_consistency)

    return parser


def run_command(argv) -> tuple[int, str]:
    """Parse arguments, dispatch, and return (exit_status, serialized output)."""
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0), ""
    try:
        result = args.func(args)
    except (ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1, ""
    text = result if isinstance(result, str) else json.dumps(result, indent=2, sort_keys=True)
    if args.output:
        with open(args.output, "w") as fh:
            fh.write(text if text.endswith("\n") else text + "\n")
        return 0, text
    return 0, text


def main(argv=None) -> int:
    status, text = run_command(sys.argv[1:] if argv is None else argv)
    if text and status == 0:
        sys.stdout.write(text if text.endswith("\n") else text + "\n")
    return status


if __name__ == "__main__":
    raise SystemExit(main())
