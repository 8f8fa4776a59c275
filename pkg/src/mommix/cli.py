"""Command line front end: fit models on CSV data and run studies.

Two subcommands. ``fit`` reads a CSV file, builds a dataset from named
columns, runs one of the estimators (moment, em, or a plain ols
comparison) and renders a parameter table as text, JSON, or CSV. ``simulate``
drives the Monte Carlo harness and writes the aggregate report plus the
per-replicate estimates.
"""

from __future__ import annotations

import argparse
import csv
import json
import sys
from dataclasses import dataclass

import numpy as np
from scipy.stats import norm

from . import asymptotics, em, moments, numkit, simulation
from .errors import (
    ColumnNotFound,
    FileNotFound,
    InvalidData,
    MommixError,
    ParseError,
)

MISSING_MARKERS = frozenset({"", "na", "nan", "null"})
DEFAULT_N_LIST = "300,500,800,1000,1500,2000,3000"


@dataclass(frozen=True)
class ParamRow:
    """One reported parameter; se and interval are None when the
    estimator does not provide them."""

    name: str
    estimate: float
    se: float | None
    ci_low: float | None
    ci_high: float | None


@dataclass(frozen=True)
class FitReport:
    estimator: str
    n: int
    m: int
    level: float
    dropped_rows: int
    rows: tuple
    warnings: tuple


def _read_columns(path, response, covariates, delimiter):
    """Read the used columns from a CSV file.

    Returns (x matrix, y vector, dropped row count). Rows with a missing
    marker in any used column are dropped and counted; anything else
    that does not parse as a number is a ParseError naming the file line
    and column.
    """
    names = [response, *covariates]
    try:
        handle = open(path, "r", encoding="utf-8-sig", newline="")
    except OSError as exc:
        raise FileNotFound(f"cannot open {path}: {exc.strerror}") from exc
    with handle:
        reader = csv.reader(handle, delimiter=delimiter)
        try:
            header = next(reader)
        except StopIteration:
            raise ParseError(f"{path} is empty; a header row is required")
        header = [h.strip() for h in header]
        missing = [name for name in names if name not in header]
        if missing:
            raise ColumnNotFound(
                f"column(s) {', '.join(missing)} not in header {header}"
            )
        index = {name: header.index(name) for name in names}
        ys, xs = [], []
        dropped = 0
        for line_no, row in enumerate(reader, start=2):
            if not row:
                continue
            if len(row) != len(header):
                raise ParseError(
                    f"row has {len(row)} fields, header has {len(header)}",
                    row=line_no,
                )
            values = []
            keep = True
            for name in names:
                cell = row[index[name]].strip()
                if cell.lower() in MISSING_MARKERS:
                    keep = False
                    break
                try:
                    values.append(float(cell))
                except ValueError:
                    raise ParseError(
                        f"cannot parse {cell!r} as a number",
                        row=line_no,
                        column=name,
                    )
            if not keep:
                dropped += 1
                continue
            ys.append(values[0])
            xs.append(values[1:])
    if not ys:
        raise InvalidData("no usable rows after dropping missing values")
    return np.asarray(xs, dtype=float), np.asarray(ys, dtype=float), dropped


def _moment_rows(data, covariates, level):
    result = moments.fit(data)
    summary = asymptotics.summarize(data, result, level=level)
    z = norm.ppf(0.5 + level / 2.0)
    rows = []
    for j, name in enumerate(covariates):
        lo, hi = summary.ci_beta[j]
        rows.append(
            ParamRow(f"beta:{name}", float(result.beta[j]), float(summary.se_beta[j]),
                     float(lo), float(hi))
        )
    rows.append(
        ParamRow("p", result.p, summary.se_p, summary.ci_p[0], summary.ci_p[1])
    )
    se_mu1 = summary.se_lambda2 / 2.0
    rows.append(
        ParamRow("mu1", result.mu1, se_mu1,
                 result.mu1 - z * se_mu1, result.mu1 + z * se_mu1)
    )
    for j, name in enumerate(covariates):
        rows.append(ParamRow(f"lambda1:{name}", float(result.lambda1[j]), None, None, None))
    rows.append(
        ParamRow("lambda2", result.lambda2, summary.se_lambda2,
                 result.lambda2 - z * summary.se_lambda2,
                 result.lambda2 + z * summary.se_lambda2)
    )
    rows.append(
        ParamRow("lambda3", result.lambda3, summary.se_lambda3,
                 result.lambda3 - z * summary.se_lambda3,
                 result.lambda3 + z * summary.se_lambda3)
    )
    rows.append(ParamRow("alpha_tilde", result.alpha_tilde, None, None, None))
    rows.append(ParamRow("first_intercept", result.first_intercept, None, None, None))
    warnings = []
    if not result.p_in_range:
        warnings.append(f"p estimate {result.p:.4g} falls outside (0, 1]")
    return rows, warnings


def _em_rows(data, covariates, seed):
    result = em.em_fit(data, seed=seed)
    rows = [
        ParamRow(f"beta:{name}", float(result.beta[j]), None, None, None)
        for j, name in enumerate(covariates)
    ]
    rows.extend(
        [
            ParamRow("p", result.p, None, None, None),
            ParamRow("mu1", result.mu1, None, None, None),
            ParamRow("sigma1_sq", result.sigma1_sq, None, None, None),
            ParamRow("mu2", result.mu2, None, None, None),
            ParamRow("sigma2_sq", result.sigma2_sq, None, None, None),
        ]
    )
    warnings = []
    if result.variance_floored:
        warnings.append("a component variance was floored at 1e-08")
    if not result.converged:
        warnings.append(f"EM stopped at max_iter without converging "
                        f"({result.iterations} iterations)")
    return rows, warnings


def _ols_rows(x, y, covariates, level):
    """Plain least squares with classic normal-theory errors.

    Kept apart from the mixture pipeline so the naive comparison runs on
    any file with at least m + 2 rows.
    """
    n, m = x.shape
    if n < m + 2:
        raise InvalidData(f"ols needs at least {m + 2} rows, got {n}")
    design = np.column_stack([np.ones(n), x])
    fit_ls = numkit.weighted_least_squares(design, y, np.ones(n))
    dof = n - m - 1
    s2 = float(fit_ls.residuals @ fit_ls.residuals) / dof
    gram_inv = np.linalg.inv(design.T @ design)
    ses = np.sqrt(np.maximum(s2 * np.diag(gram_inv), 0.0))
    z = norm.ppf(0.5 + level / 2.0)
    names = ["intercept", *[f"beta:{name}" for name in covariates]]
    rows = [
        ParamRow(name, float(c), float(se), float(c - z * se), float(c + z * se))
        for name, c, se in zip(names, fit_ls.coefficients, ses)
    ]
    return rows


def cmd_fit(args):
    covariates = [c.strip() for c in args.covariates.split(",") if c.strip()]
    if not covariates:
        raise InvalidData("at least one covariate column is required")
    if args.response in covariates:
        raise InvalidData("response column cannot also be a covariate")
    x, y, dropped = _read_columns(
        args.csv_path, args.response, covariates, args.delimiter
    )
    warnings = []
    if dropped:
        warnings.append(f"dropped {dropped} rows with missing values")
    if args.estimator == "ols":
        rows = _ols_rows(x, y, covariates, args.level)
    else:
        data = moments.Dataset(x=x, y=y)
        if args.estimator == "moment":
            rows, extra = _moment_rows(data, covariates, args.level)
        else:
            rows, extra = _em_rows(data, covariates, args.seed)
        warnings.extend(extra)
    report = FitReport(
        estimator=args.estimator,
        n=y.shape[0],
        m=x.shape[1],
        level=args.level,
        dropped_rows=dropped,
        rows=tuple(rows),
        warnings=tuple(warnings),
    )
    text = render_fit_report(report, args.format)
    _emit(text, args.out)
    return 0


def render_fit_report(report, fmt):
    if fmt == "json":
        doc = {
            "estimator": report.estimator,
            "n": report.n,
            "m": report.m,
            "level": report.level,
            "dropped_rows": report.dropped_rows,
            "warnings": list(report.warnings),
            "parameters": [
                {
                    "name": r.name,
                    "estimate": r.estimate,
                    "se": r.se,
                    "ci_low": r.ci_low,
                    "ci_high": r.ci_high,
                }
                for r in report.rows
            ],
        }
        return json.dumps(doc, indent=2) + "\n"
    if fmt == "csv":
        lines = ["parameter,estimate,se,ci_low,ci_high"]
        for r in report.rows:
            cells = [r.name] + [
                "" if v is None else repr(float(v))
                for v in (r.estimate, r.se, r.ci_low, r.ci_high)
            ]
            lines.append(",".join(cells))
        return "\n".join(lines) + "\n"
    width = max(len(r.name) for r in report.rows)
    lines = [
        f"estimator: {report.estimator}   n: {report.n}   m: {report.m}"
        f"   level: {report.level:g}",
        f"{'parameter':<{width}}  {'estimate':>10}  {'se':>10}  "
        f"{'ci_low':>10}  {'ci_high':>10}",
    ]
    for r in report.rows:
        cells = [
            f"{v:>10.4g}" if v is not None else f"{'-':>10}"
            for v in (r.estimate, r.se, r.ci_low, r.ci_high)
        ]
        lines.append(f"{r.name:<{width}}  " + "  ".join(cells))
    for warning in report.warnings:
        lines.append(f"warning: {warning}")
    return "\n".join(lines) + "\n"


def render_study_summary(report):
    """Text table with one line per aggregate cell."""
    header = (
        f"{'scenario':<26} {'n':>6} {'est':<7} {'param':<6} {'truth':>7} "
        f"{'mean':>9} {'emp se':>9} {'est se':>9} {'cover':>7} "
        f"{'releff':>7} {'fail':>5} {'reps':>5}"
    )
    lines = [header]
    for c in report.cells:
        def cell(v, precision="9.4g"):
            return f"{v:>{precision}}" if v is not None else f"{'-':>{precision.split('.')[0]}}"

        lines.append(
            f"{c.scenario:<26} {c.n:>6} {c.estimator:<7} {c.parameter:<6} "
            f"{c.true_value:>7.3g} {cell(c.mean_estimate)} "
            f"{cell(c.empirical_se)} {cell(c.mean_estimated_se)} "
            f"{cell(c.coverage, '7.4g')} {cell(c.relative_efficiency, '7.4g')} "
            f"{c.failures:>5} {c.replicates:>5}"
        )
    return "\n".join(lines) + "\n"


def cmd_simulate(args):
    if args.scenario == "all":
        kinds = list(simulation.KINDS)
    else:
        kinds = [args.scenario]
    try:
        n_list = [int(tok) for tok in args.n.split(",") if tok.strip()]
    except ValueError:
        raise InvalidData(f"--n must be a comma-separated list of integers, got {args.n!r}")
    if not n_list:
        raise InvalidData("--n must name at least one sample size")
    estimators = tuple(tok.strip() for tok in args.estimator.split(",") if tok.strip())
    for name in estimators:
        if name not in simulation.ESTIMATORS:
            raise InvalidData(
                f"unknown estimator {name!r}; choose from {simulation.ESTIMATORS}"
            )
    specs = [
        simulation.ScenarioSpec(kind=kind, n=n, p=args.p, beta=args.beta)
        for kind in kinds
        for n in n_list
    ]
    report = simulation.run_study(
        specs,
        replicates=args.replicates,
        estimators=estimators,
        level=args.level,
        base_seed=args.seed,
    )
    if args.out:
        _write_file(f"{args.out}.csv", report.to_csv())
        _write_file(f"{args.out}.json", report.to_json())
        _write_file(f"{args.out}_replicates.csv", report.to_long_csv())
    sys.stdout.write(render_study_summary(report))
    return 0


def _write_file(path, text):
    with open(path, "w", encoding="utf-8", newline="") as handle:
        handle.write(text)


def _emit(text, out):
    if out:
        _write_file(out, text)
    else:
        sys.stdout.write(text)


def build_parser():
    parser = argparse.ArgumentParser(
        prog="mommix",
        description="Moment-based estimation for two-component mixture regressions.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    fit_p = sub.add_parser("fit", help="fit a model to a CSV dataset")
    fit_p.add_argument("csv_path", help="input CSV file with a header row")
    fit_p.add_argument("--response", required=True, help="response column name")
    fit_p.add_argument(
        "--covariates", required=True,
        help="comma-separated covariate column names",
    )
    fit_p.add_argument("--estimator", choices=("moment", "em", "ols"),
                       default="moment")
    fit_p.add_argument("--level", type=float, default=0.95,
                       help="confidence level (default 0.95)")
    fit_p.add_argument("--delimiter", default=",",
                       help="field delimiter (default comma)")
    fit_p.add_argument("--format", choices=("text", "json", "csv"),
                       default="text")
    fit_p.add_argument("--out", help="write output to this file instead of stdout")
    fit_p.add_argument("--seed", type=int, default=0,
                       help="seed for EM restarts (estimator em)")
    fit_p.set_defaults(func=cmd_fit)

    sim_p = sub.add_parser("simulate", help="run a Monte Carlo study")
    sim_p.add_argument(
        "--scenario", required=True,
        choices=(*simulation.KINDS, "all"),
        help="scenario kind, or 'all' for the full grid",
    )
    sim_p.add_argument("--n", default=DEFAULT_N_LIST,
                       help=f"comma-separated sample sizes (default {DEFAULT_N_LIST})")
    sim_p.add_argument("--p", type=float, default=0.5,
                       help="mixing proportion (default 0.5)")
    sim_p.add_argument("--beta", type=float, default=1.0,
                       help="true slope (default 1)")
    sim_p.add_argument("--replicates", type=int, default=100,
                       help="Monte Carlo replicates per cell (default 100)")
    sim_p.add_argument("--estimator", default="moment",
                       help="comma-separated estimators: moment, em")
    sim_p.add_argument("--level", type=float, default=0.95)
    sim_p.add_argument("--seed", type=int, default=0, help="base seed")
    sim_p.add_argument("--out",
                       help="prefix for <prefix>.csv, <prefix>.json and "
                            "<prefix>_replicates.csv")
    sim_p.set_defaults(func=cmd_simulate)
    return parser


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except MommixError as exc:
        print(f"error[{exc.code}]: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
