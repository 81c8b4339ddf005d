"""Command-line front end for the dual risk toolkit.

Each subcommand loads a model-spec JSON document, runs one analytic or
simulation computation, and writes records to stdout in a chosen format.
Diagnostics go to stderr only.  Exit codes: 0 success, 2 usage error,
3 model or input validation error, 4 numerical failure.
"""

from __future__ import annotations

import argparse
import csv
import json
import sys

from . import tables
from .dividends import DividendQuery, dividend_stats, total_dividends_laplace
from .errors import (
    DomainError,
    ModelError,
    NoClosedFormError,
    NumericsError,
)
from .functions import Affine, Constant
from .model import parse_model_spec
from .moments import AffineModelSpec, mean_wealth, second_moment_wealth
from .ruin import ruin_probability, ruin_probability_closed
from .ruin_time import (
    ExpectedRuinQuery,
    LaplaceQuery,
    expected_ruin_time,
    ruin_time_laplace,
    ruin_time_laplace_closed,
)
from .simulate import SimConfig, auto_ruin_config, estimate, ruin_indicator

__all__ = ["build_parser", "run", "main"]

EXIT_OK = 0
EXIT_USAGE = 2
EXIT_MODEL = 3
EXIT_NUMERICS = 4


def _load_model(path):
    try:
        with open(path, encoding="utf-8") as handle:
            text = handle.read()
    except OSError as exc:
        raise ModelError(f"cannot read model spec {path!r}: {exc}") from None
    return parse_model_spec(text)


def _affine_terms(name, fn):
    if isinstance(fn, Constant):
        return fn.c, 0.0
    if isinstance(fn, Affine):
        return fn.a, fn.b
    raise ModelError(
        f"moment formulas need affine families; field {name!r} is "
        f"{type(fn).__name__}"
    )


# ---------------------------------------------------------------------------
# subcommand handlers, each returning a list of output records


def _cmd_ruin(args):
    model = _load_model(args.model)
    result = ruin_probability(model, args.u)
    records = [{
        "u": args.u,
        "psi": result.psi,
        "method": result.method,
        "error_estimate": result.error_estimate,
    }]
    try:
        closed = ruin_probability_closed(model, args.u)
    except NoClosedFormError:
        return records
    records.append({
        "u": args.u,
        "psi": closed.psi,
        "method": closed.method,
        "error_estimate": closed.error_estimate,
    })
    return records


def _cmd_dividend(args):
    model = _load_model(args.model)
    query = DividendQuery(model=model, u=args.u, b=args.b)
    stats = dividend_stats(query)
    record = {
        "u": args.u,
        "b": args.b,
        "phi": stats.phi_ub,
        "phi_at_barrier": stats.phi_bb,
        "expected_single": stats.expected_single,
        "expected_count": stats.expected_count,
        "expected_total": stats.expected_total,
    }
    if args.theta is not None:
        record["theta"] = args.theta
        record["total_transform"] = total_dividends_laplace(query, args.theta)
    return [record]


def _cmd_moments(args):
    model = _load_model(args.model)
    rho, mu = _affine_terms("eta", model.eta)
    alpha, beta = _affine_terms("lambda", model.lam)
    spec = AffineModelSpec(
        rho=rho, mu=mu, alpha=alpha, beta=beta,
        jump_mean=1.0 / model.gamma,
        jump_second=2.0 / (model.gamma * model.gamma),
    )
    mean = mean_wealth(spec, args.u, args.t)
    second = second_moment_wealth(spec, args.u, args.t)
    return [{
        "u": args.u,
        "t": args.t,
        "mean": mean,
        "second_moment": second,
        "variance": second - mean * mean,
    }]


def _cmd_laplace(args):
    model = _load_model(args.model)
    query = LaplaceQuery(model=model, u=args.u, delta=args.delta)
    try:
        value = ruin_time_laplace_closed(query)
        method = "closed_form"
    except NoClosedFormError:
        value = ruin_time_laplace(query)
        method = "shooting"
    return [{"u": args.u, "delta": args.delta, "psi_delta": value,
             "method": method}]


def _cmd_ruin_time(args):
    model = _load_model(args.model)
    value = expected_ruin_time(ExpectedRuinQuery(model=model, u=args.u))
    return [{"u": args.u, "expected_ruin_time": value}]


def _cmd_simulate(args):
    model = _load_model(args.model)
    if args.horizon is None:
        config = auto_ruin_config(model, args.u, args.paths, args.seed)
    else:
        config = SimConfig(model=model, u0=args.u, horizon=args.horizon,
                           n_paths=args.paths, master_seed=args.seed)
    result = estimate(config, ruin_indicator(), workers=args.workers)
    return [{
        "u": args.u,
        "psi": result.point,
        "method": "monte_carlo",
        "std_error": result.std_error,
        "ci_low": result.ci95[0],
        "ci_high": result.ci95[1],
        "bias_bound": result.bias_bound,
        "bias_flagged": result.bias_flagged,
        "paths": result.n_paths,
        "seed": result.seed,
        "horizon": config.horizon,
    }]


def _cmd_table(args):
    records = []
    for cell in tables.table_cells(args.id):
        records.append({
            "beta": cell.beta,
            "u": cell.u,
            "printed": cell.printed,
            "closed_form": cell.closed_form,
            "quadrature": cell.quadrature,
        })
    return records


def _cmd_report(args):
    written = tables.write_report(args.out)
    return [{"file": path, "kind": "figure" if path.endswith(".png") else "csv"}
            for path in written]


# ---------------------------------------------------------------------------
# output formatting


def _human_value(value):
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, float):
        return format(value, ".4f")
    return str(value)


def _machine_value(value):
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, float):
        return format(value, ".17g")
    return str(value)


def emit(records, fmt, stream):
    """Write records to the data stream in the requested format."""
    if fmt == "human":
        for index, record in enumerate(records):
            if index:
                stream.write("\n")
            for key, value in record.items():
                stream.write(f"{key}={_human_value(value)}\n")
        return
    if fmt == "csv":
        writer = csv.writer(stream, lineterminator="\n")
        writer.writerow(records[0].keys())
        for record in records:
            writer.writerow([_machine_value(v) for v in record.values()])
        return
    for record in records:
        stream.write(json.dumps(record) + "\n")


# ---------------------------------------------------------------------------
# argument parsing


def _add_common(parser, *, model=True):
    if model:
        parser.add_argument("--model", required=True,
                            help="path to a model-spec JSON document")
    parser.add_argument("--format", choices=("human", "csv", "json-lines"),
                        default="human", help="output format (default: human)")


def build_parser():
    """The argument parser for the ``dualrisk`` command."""
    parser = argparse.ArgumentParser(
        prog="dualrisk",
        description="Ruin, dividend, and first-passage analytics for "
                    "state-dependent dual risk models.",
    )
    sub = parser.add_subparsers(dest="subcommand", required=True)

    p = sub.add_parser("ruin", help="ruin probability psi(u)")
    _add_common(p)
    p.add_argument("--u", type=float, required=True, help="initial wealth")
    p.set_defaults(handler=_cmd_ruin)

    p = sub.add_parser("dividend", help="barrier-dividend statistics")
    _add_common(p)
    p.add_argument("--u", type=float, required=True, help="initial wealth")
    p.add_argument("--b", type=float, required=True, help="dividend barrier")
    p.add_argument("--theta", type=float,
                   help="also report E[exp(-theta * total dividends)]")
    p.set_defaults(handler=_cmd_dividend)

    p = sub.add_parser("moments", help="wealth mean and second moment")
    _add_common(p)
    p.add_argument("--u", type=float, required=True, help="initial wealth")
    p.add_argument("--t", type=float, required=True, help="evaluation time")
    p.set_defaults(handler=_cmd_moments)

    p = sub.add_parser("laplace",
                       help="discounted ruin transform E[exp(-delta tau)]")
    _add_common(p)
    p.add_argument("--u", type=float, required=True, help="initial wealth")
    p.add_argument("--delta", type=float, required=True, help="discount rate")
    p.set_defaults(handler=_cmd_laplace)

    p = sub.add_parser("ruin-time", help="expected ruin time")
    _add_common(p)
    p.add_argument("--u", type=float, required=True, help="initial wealth")
    p.set_defaults(handler=_cmd_ruin_time)

    p = sub.add_parser("simulate", help="Monte Carlo ruin probability")
    _add_common(p)
    p.add_argument("--u", type=float, required=True, help="initial wealth")
    p.add_argument("--horizon", type=float,
                   help="simulation cutoff (default: auto-selected)")
    p.add_argument("--paths", type=int, default=100_000,
                   help="number of paths (default: 100000)")
    p.add_argument("--seed", type=int, default=0,
                   help="master seed (default: 0)")
    p.add_argument("--workers", type=int,
                   help="thread count (default: DUALRISK_WORKERS or cores)")
    p.set_defaults(handler=_cmd_simulate)

    p = sub.add_parser("table", help="reproduce one published psi grid")
    _add_common(p, model=False)
    p.add_argument("--id", type=int, required=True, choices=(3, 4),
                   help="grid number")
    p.set_defaults(handler=_cmd_table)

    p = sub.add_parser("report",
                       help="write both grids as CSV plus rendered figures")
    _add_common(p, model=False)
    p.add_argument("--out", required=True, help="output directory")
    p.set_defaults(handler=_cmd_report)

    return parser


def run(argv=None, stdout=None, stderr=None):
    """Execute one command; returns the exit code without raising.

    Args:
        argv: Argument list (default: ``sys.argv[1:]``).
        stdout: Data stream (default: ``sys.stdout``).
        stderr: Diagnostic stream (default: ``sys.stderr``).
    """
    out = sys.stdout if stdout is None else stdout
    err = sys.stderr if stderr is None else stderr
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        records = args.handler(args)
    except (ModelError, DomainError) as exc:
        err.write(f"dualrisk: {exc}\n")
        return EXIT_MODEL
    except NumericsError as exc:
        err.write(f"dualrisk: {exc}\n")
        return EXIT_NUMERICS
    emit(records, args.format, out)
    return EXIT_OK


def main():
    sys.exit(run())
