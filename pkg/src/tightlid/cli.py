"""``tightlid`` command line: generate, estimate, experiment, compare."""
from __future__ import annotations

import argparse
import json
import logging
import os
import sys
import warnings
from pathlib import Path

from tightlid import _backend, geometry
from tightlid.estimators import EstimatorSpec, GedStrategy, Method, estimate_batch
from tightlid.generators import FAMILIES, GeneratorSpec, generate
from tightlid.harness import ExperimentConfig, ExperimentReport, ReportSchemaError, run_experiment

log = logging.getLogger("tightlid")


class CliError(Exception):
    pass


def _threads_default():
    try:
        return int(os.environ.get("TIGHTLID_THREADS", "0") or 0)
    except ValueError:
        return 0


def cmd_generate(args):
    try:
        spec = GeneratorSpec(args.family, args.d, args.n, args.seed)
    except ValueError as exc:
        raise CliError(str(exc)) from None
    points = generate(spec)
    out = Path(args.out)
    geometry.write_csv(points, out, header=args.header)
    manifest = out.with_suffix(".json")
    manifest.write_text(json.dumps(spec.manifest(), indent=2, sort_keys=True) + "\n", encoding="utf-8")
    log.info("wrote %d x %d points to %s (+ %s)", points.n, points.dim, out, manifest.name)


def cmd_estimate(args):
    metric = geometry.Metric.FLAT_TORUS if args.torus else geometry.Metric.EUCLIDEAN
    try:
        points = geometry.read_csv(args.input, header=args.header, metric=metric)
        spec = EstimatorSpec(Method(args.method), args.k, args.theta, GedStrategy(args.ged_pair_strategy), args.tle_query_target)
        if spec.k >= points.n:
            raise ValueError(f"k={spec.k} must be smaller than the number of points ({points.n})")
    except ValueError as exc:
        raise CliError(str(exc)) from None
    batch = estimate_batch(points, spec)
    text = batch.to_csv()
    if args.out:
        Path(args.out).write_text(text, encoding="utf-8")
    else:
        sys.stdout.write(text)
    log.info("%s k=%d: %d estimates, %d degenerate", spec.name, spec.k, len(batch), int((~batch.ok_mask).sum()))


def cmd_experiment(args):
    try:
        config = ExperimentConfig.load(args.config)
    except (OSError, ValueError, KeyError, TypeError) as exc:
        raise CliError(f"bad config {args.config}: {exc}") from None
    report = run_experiment(config, keep_batches=bool(args.dump))
    report.to_csv(args.out)
    if args.dump:
        dump = Path(args.dump)
        dump.mkdir(parents=True, exist_ok=True)
        for (d, k, name, run), batch in sorted(report.batches.items()):
            batch.to_csv(dump / f"{config.family}_d{d}_k{k}_{name}_run{run}.csv")
    log.info("wrote %d report rows to %s", len(report.rows), args.out)


def _fmt(x):
    return "" if x is None else f"{x:.4f}"


def compare_rows(reports):
    """Pair aggregate rows on (family, d, k).

    One report: every estimator against the report's first estimator.
    Two reports: shared estimators pair with themselves; if a key has none in
    common, every cross pair is listed.
    """
    def index(rep):
        out = {}
        for row in rep.rows:
            if row.is_aggregate:
                out.setdefault((row.family, row.d, row.k), {})[row.estimator] = row
        return out

    pairs = []
    if len(reports) == 1:
        for key, ests in index(reports[0]).items():
            names = list(ests)
            for name in names[1:] or names:
                pairs.append((key, ests[names[0]], ests[name]))
        return pairs
    left, right = index(reports[0]), index(reports[1])
    for key in left:
        if key not in right:
            continue
        shared = [e for e in left[key] if e in right[key]]
        if shared:
            pairs.extend((key, left[key][e], right[key][e]) for e in shared)
        else:
            pairs.extend((key, a, b) for a in left[key].values() for b in right[key].values())
    return pairs


def cmd_compare(args):
    try:
        reports = [ExperimentReport.from_csv(p) for p in args.reports]
    except ReportSchemaError as exc:
        raise CliError(f"schema mismatch in column {exc.column!r}: {exc}") from None
    except OSError as exc:
        raise CliError(str(exc)) from None
    header = ["family", "d", "k", "estimator_a", "estimator_b", "mean_a", "mean_b", "delta_mean", "std_a", "std_b", "delta_std"]
    lines = [header]
    for (family, d, k), a, b in compare_rows(reports):
        dm = None if a.mean is None or b.mean is None else b.mean - a.mean
        ds = None if a.std is None or b.std is None else b.std - a.std
        lines.append([family, str(d), str(k), a.estimator, b.estimator,
                      _fmt(a.mean), _fmt(b.mean), _fmt(dm), _fmt(a.std), _fmt(b.std), _fmt(ds)])
    widths = [max(len(row[i]) for row in lines) for i in range(len(header))]
    for row in lines:
        sys.stdout.write("  ".join(cell.rjust(w) for cell, w in zip(row, widths)).rstrip() + "\n")


def build_parser():
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--threads", type=int, default=_threads_default(),
                        help="cap on kernel worker threads, 0 = auto (env TIGHTLID_THREADS)")

    parser = argparse.ArgumentParser(prog="tightlid", description="Local intrinsic dimensionality in tight neighborhoods.")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("generate", parents=[common], help="write a synthetic data set as CSV + JSON manifest")
    p.add_argument("--family", required=True, choices=FAMILIES)
    p.add_argument("--d", type=int, default=None, help="intrinsic dimension (i.i.d. families only)")
    p.add_argument("--n", type=int, default=10_000)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", required=True)
    p.add_argument("--header", action="store_true", help="write a header row")
    p.set_defaults(func=cmd_generate)

    p = sub.add_parser("estimate", parents=[common], help="per-point estimates for a CSV data set")
    p.add_argument("--in", dest="input", required=True)
    p.add_argument("--method", default="tle", choices=[m.value for m in Method])
    p.add_argument("--k", type=int, default=100)
    p.add_argument("--theta", type=float, default=0.025, help="LPCA eigenvalue threshold")
    p.add_argument("--ged-pair-strategy", default=GedStrategy.MAX_OVER_PAIRS.value, choices=[g.value for g in GedStrategy])
    p.add_argument("--tle-query-target", action="store_true", help="central TLE variants also measure the query as a target")
    p.add_argument("--header", action="store_true", help="input has a header row")
    p.add_argument("--torus", action="store_true", help="treat coordinates as points on the unit flat torus")
    p.add_argument("--out", default=None, help="output CSV (default: standard output)")
    p.set_defaults(func=cmd_estimate)

    p = sub.add_parser("experiment", parents=[common], help="run a JSON experiment config")
    p.add_argument("--config", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--dump", default=None, metavar="DIR", help="also write per-point estimate CSVs here")
    p.set_defaults(func=cmd_experiment)

    p = sub.add_parser("compare", parents=[common], help="side-by-side deltas of report CSVs")
    p.add_argument("reports", nargs="+")
    p.set_defaults(func=cmd_compare)
    return parser


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    if args.command == "compare" and len(args.reports) > 2:
        parser.error("compare takes one or two reports")
    logging.basicConfig(stream=sys.stderr, level=logging.INFO, format="%(message)s")
    warnings.simplefilter("once", geometry.ChartRadiusWarning)
    _backend.set_threads(args.threads)
    try:
        args.func(args)
    except CliError as exc:
        print(f"tightlid {args.command}: error: {exc}", file=sys.stderr)
        return 1
    except (OSError, ValueError) as exc:
        print(f"tightlid {args.command}: error: {exc}", file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
