"""Command-line front end.

Verbs: ``datagen`` (write a sample CSV), ``ustat`` (pairwise statistics of a
CSV), ``bootstrap`` (replicate set + summary), ``ci`` (bootstrap-t interval),
``verify`` (run an experiment config and write its report).

Exit codes: 0 success, 1 usage/input error, 2 failed verification assertion.
CSV format: UTF-8, one observation per row, d numeric columns with '.' decimal
separator; a header row is allowed and skipped.  The worker count of
``verify`` can be overridden with the UVBOOT_WORKERS environment variable.
"""

from __future__ import annotations

import argparse
import json
import os
import sys

import numpy as np

from ._version import __version__
from .boot import DegenerateNormalizerError, ReplicateEngine, bootstrap_ci
from .datagen import DistSpec, MixingSpec, ar1_sample, iid_sample
from .kernels import DimensionMismatchError, Sample, UnknownKernelError, get_kernel
from .mc import ExperimentConfig, ExperimentError, run_experiment
from .weights import derive_stream, draw_weights

__all__ = ["main", "read_sample_csv", "write_sample_csv"]


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


def _positive_int(text: str) -> int:
    value = int(text)
    if value < 1:
        raise argparse.ArgumentTypeError(f"must be a positive integer, got {text}")
    return value


def read_sample_csv(path) -> Sample:
    """Read one observation per row; malformed cells report row and column."""
    try:
        with open(path, "r", encoding="utf-8") as fh:
            lines = [line.strip() for line in fh]
    except OSError as exc:
        raise UsageError(f"cannot read {path}: {exc}") from exc
    rows = []
    width = None
    for lineno, line in enumerate(lines, start=1):
        if not line:
            continue
        cells = [c.strip() for c in line.split(",")]
        values = []
        bad_col = None
        for col, cell in enumerate(cells, start=1):
            try:
                values.append(float(cell))
            except ValueError:
                bad_col = col
                break
        if bad_col is not None:
            if not rows and width is None:
                continue  # header row
            raise UsageError(f"{path}: non-numeric cell at row {lineno}, column {bad_col}")
        if width is None:
            width = len(values)
        elif len(values) != width:
            raise UsageError(
                f"{path}: row {lineno} has {len(values)} columns, expected {width}"
            )
        rows.append(values)
    if not rows:
        raise UsageError(f"{path}: no data rows")
    return Sample(np.asarray(rows))


def write_sample_csv(path, sample: Sample) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        for row in sample.points:
            fh.write(",".join(repr(float(v)) for v in row) + "\n")


def _emit(payload: dict) -> None:
    print(json.dumps(payload, indent=2, sort_keys=True, allow_nan=False))


def _summary_of(values) -> dict:
    from .mc import _summary

    return _summary(np.asarray(values, dtype=float))


def _cmd_datagen(args) -> int:
    stream = derive_stream(args.seed, 1, 0)
    text = args.dist.strip().lower()
    if text.startswith("ar1"):
        if "(" not in text or ")" not in text:
            raise UsageError(f"cannot parse distribution spec {args.dist!r}")
        params = text[text.index("(") + 1 : text.index(")")].split(",")
        spec = MixingSpec(float(params[0]), float(params[1]) if len(params) > 1 else 1.0)
        sample = ar1_sample(spec, args.n, stream)
    else:
        sample = iid_sample(DistSpec.parse(args.dist), args.n, stream)
    write_sample_csv(args.out, sample)
    _emit({"path": args.out, "n": sample.n, "dim": sample.dim, "dist": text, "seed": args.seed})
    return 0


def _cmd_ustat(args) -> int:
    kernel = get_kernel(args.kernel)
    sample = read_sample_csv(args.infile)
    if sample.n < 2:
        raise UsageError("pairwise statistics need at least 2 observations")
    engine = ReplicateEngine(kernel, sample)
    if sample.n >= 3:
        sigma2, norm_const = engine.sigma2_hat, engine.jack.normalization
    else:
        sigma2, norm_const = None, None
    _emit(
        {
            "kernel": kernel.id,
            "n": sample.n,
            "dim": sample.dim,
            "u": engine.u_n,
            "v": engine.v_n,
            "sigma2_hat": sigma2,
            "jackknife_normalization": norm_const,
            "version": __version__,
        }
    )
    return 0


def _cmd_bootstrap(args) -> int:
    kernel = get_kernel(args.kernel)
    sample = read_sample_csv(args.infile)
    if sample.n < 3:
        raise UsageError("bootstrap with pivots needs at least 3 observations")
    engine = ReplicateEngine(kernel, sample)
    reps = []
    for r in range(args.replicates):
        w = draw_weights(sample.n, args.m, derive_stream(args.seed, 0, r))
        u_star, v_star, q = engine.stats(w)
        try:
            rep = engine.replicate(w)
            pivots = (rep.pivot_u, rep.pivot_v)
        except DegenerateNormalizerError:
            pivots = (None, None)
        reps.append((r, u_star, v_star, q, *pivots))
    if args.out_csv:
        with open(args.out_csv, "w", encoding="utf-8") as fh:
            fh.write("seed-index,u_star,v_star,q,pivot_u,pivot_v\n")
            for row in reps:
                fh.write(
                    ",".join("" if v is None else repr(v) if isinstance(v, float) else str(v) for v in row)
                    + "\n"
                )
    kept = [r for r in reps if r[4] is not None]
    _emit(
        {
            "kernel": kernel.id,
            "n": sample.n,
            "m": args.m,
            "replicates": args.replicates,
            "dropped": len(reps) - len(kept),
            "seed": args.seed,
            "u": engine.u_n,
            "v": engine.v_n,
            "sigma2_hat": engine.sigma2_hat,
            "u_star": _summary_of([r[1] for r in reps]),
            "v_star": _summary_of([r[2] for r in reps]),
            "q": _summary_of([r[3] for r in reps]),
            "pivot_u": _summary_of([r[4] for r in kept]),
            "pivot_v": _summary_of([r[5] for r in kept]),
            "version": __version__,
        }
    )
    return 0


def _cmd_ci(args) -> int:
    kernel = get_kernel(args.kernel)
    sample = read_sample_csv(args.infile)
    ci = bootstrap_ci(kernel, sample, args.m, args.replicates, args.level, derive_stream(args.seed, 0, 0))
    _emit(
        {
            "kernel": kernel.id,
            "n": sample.n,
            "m": ci.m,
            "level": ci.level,
            "lo": ci.lo,
            "hi": ci.hi,
            "u": ci.u_n,
            "se": ci.se,
            "sigma2_hat": ci.sigma2_hat,
            "replicates_used": ci.replicates_used,
            "replicates_dropped": ci.replicates_dropped,
            "seed": args.seed,
            "version": __version__,
        }
    )
    return 0


def _cmd_verify(args) -> int:
    try:
        config = ExperimentConfig.from_json_file(args.config)
    except OSError as exc:
        raise UsageError(f"cannot read {args.config}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise UsageError(f"{args.config}: invalid JSON ({exc})") from exc
    env_workers = os.environ.get("UVBOOT_WORKERS")
    if env_workers:
        config.workers = int(env_workers)
    report = run_experiment(config)
    text = report.to_json()
    if args.out:
        with open(args.out, "w", encoding="utf-8") as fh:
            fh.write(text + "\n")
    else:
        print(text)
    if args.raw_csv and report.raw:
        name, table = next(iter(report.raw.items()))
        with open(args.raw_csv, "w", encoding="utf-8") as fh:
            fh.write(",".join(table["columns"]) + "\n")
            for row in table["rows"]:
                fh.write(",".join(repr(v) if isinstance(v, float) else str(v) for v in row) + "\n")
    if report.passed is False:
        print(f"verification failed: {report.kind}", file=sys.stderr)
        return 2
    return 0


def _build_parser() -> _Parser:
    parser = _Parser(prog="uvboot", description="pairwise statistics, weighted bootstrap, asymptotics checks")
    parser.add_argument("--version", action="version", version=f"uvboot {__version__}")
    sub = parser.add_subparsers(dest="verb", required=True)

    p = sub.add_parser("datagen", help="write a seeded sample CSV")
    p.add_argument("--dist", required=True, help="normal(mu,sigma) | uniform(a,b) | exponential(rate) | pareto(alpha,xmin) | ar1(phi,sd)")
    p.add_argument("--n", type=_positive_int, required=True)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", required=True)
    p.set_defaults(func=_cmd_datagen)

    p = sub.add_parser("ustat", help="pairwise statistics of a CSV sample")
    p.add_argument("--kernel", required=True)
    p.add_argument("--in", dest="infile", required=True)
    p.set_defaults(func=_cmd_ustat)

    p = sub.add_parser("bootstrap", help="bootstrap replicate set and summary")
    p.add_argument("--kernel", required=True)
    p.add_argument("--in", dest="infile", required=True)
    p.add_argument("--m", type=_positive_int, required=True)
    p.add_argument("--replicates", type=_positive_int, required=True)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out-csv", default=None)
    p.set_defaults(func=_cmd_bootstrap)

    p = sub.add_parser("ci", help="bootstrap-t confidence interval")
    p.add_argument("--kernel", required=True)
    p.add_argument("--in", dest="infile", required=True)
    p.add_argument("--m", type=_positive_int, required=True)
    p.add_argument("--replicates", type=_positive_int, required=True)
    p.add_argument("--level", type=float, default=0.95)
    p.add_argument("--seed", type=int, default=0)
    p.set_defaults(func=_cmd_ci)

    p = sub.add_parser("verify", help="run an experiment config and write its report")
    p.add_argument("--config", required=True)
    p.add_argument("--out", default=None)
    p.add_argument("--raw-csv", default=None)
    p.set_defaults(func=_cmd_verify)

    return parser


def main(argv=None) -> int:
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
        return args.func(args)
    except UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except (
        UnknownKernelError,
        DimensionMismatchError,
        ExperimentError,
        DegenerateNormalizerError,
        ValueError,
    ) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
