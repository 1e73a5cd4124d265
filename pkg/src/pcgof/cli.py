"""Command-line front end: ``pcgof <command> [options]``.

Commands
--------
test             test a censored data file for normality
critical-values  Monte Carlo critical values per scheme and statistic
power            power of the tests against alternatives
consistency      mean of a statistic as m grows within a scheme family
reproduce        regenerate a published table and compare cell by cell

Exit status is 0 on success, 1 on error and, for ``test`` only, 2 when any
requested statistic rejects at the chosen level.
"""

from __future__ import annotations

import argparse
import logging
import os
import sys
import warnings
from pathlib import Path

from . import __version__
from .censoring import CensoringScheme, catalog_lookup, catalog_table6, parse_removals, validate_scheme
from .distributions import parse_distribution
from .exceptions import ParseError, PcgofError
from .experiments import MonteCarloConfig, consistency_study, critical_bounds, null_statistic_sample, \
    power_table, run_test
from .gof import ALL_STATISTICS, parse_statistic
from .io import bundled_path, format_value, parse_data, to_csv, to_json
from .reproduce import TABLES, reproduce, write_reproduction

EXIT_OK = 0
EXIT_ERROR = 1
EXIT_REJECT = 2

ENV_CACHE = "PCGOF_CACHE_DIR"
ENV_WORKERS = "PCGOF_WORKERS"
DEFAULT_ALTERNATIVES = "normal,t3,t4,laplace,logistic"


def _split(text: str) -> list[str]:
    return [t.strip() for t in text.split(",") if t.strip()]


def _split_labels(text: str) -> list[str]:
    # "[1],[15]" and "1,15" both name catalog entries
    return [t.strip("[] ") for t in text.split(",") if t.strip("[] ")]


def parse_scheme_spec(text: str) -> CensoringScheme:
    """Custom scheme ``"n:r1,r2,...,rm"``."""
    head, sep, tail = text.partition(":")
    if not sep:
        raise ParseError(f"scheme must look like 'n:r1,r2,...', got {text!r}")
    try:
        n = int(head)
    except ValueError as exc:
        raise ParseError(f"bad n in scheme {text!r}") from exc
    r = parse_removals(tail)
    return validate_scheme(n, len(r), r, label=text)


def select_schemes(args) -> list[CensoringScheme]:
    out = []
    if args.scheme:
        out.append(parse_scheme_spec(args.scheme))
    if args.schemes:
        if args.schemes.strip().lower() == "table6":
            out.extend(s for _, s in catalog_table6())
        else:
            for lab in _split_labels(args.schemes):
                try:
                    out.append(catalog_lookup(lab))
                except KeyError:
                    raise ParseError(f"unknown scheme selector {lab!r}; use 'table6' or labels 1-27") from None
    if not out:
        raise ParseError("no schemes selected (use --schemes or --scheme)")
    return out


def _stats(text: str | None):
    if not text or text.strip().lower() == "all":
        return list(ALL_STATISTICS)
    return [parse_statistic(s) for s in _split(text)]


def _config(args) -> MonteCarloConfig:
    workers = args.workers
    if workers is None:
        workers = int(os.environ.get(ENV_WORKERS, "1"))
    cache = args.cache_dir or os.environ.get(ENV_CACHE) or None
    return MonteCarloConfig(reps=args.reps, seed=args.seed, alpha=args.alpha, workers=workers, cache_dir=cache)


def _emit(text: str, out: str | None):
    if out:
        Path(out).write_text(text, encoding="utf-8")
    else:
        sys.stdout.write(text)


def _emit_rows(rows, fields, args):
    if args.format == "json":
        text = to_json({"tool": "pcgof", "version": __version__, "rows": rows})
    else:
        text = to_csv(rows, fields)
    _emit(text, args.out)


# --- commands -------------------------------------------------------------

_UNRECORDED = {"--out": 1, "--cache-dir": 1, "--workers": 1, "-v": 0, "--verbose": 0}


def recorded_command(argv) -> list[str]:
    """``argv`` without flags that cannot change results (output path, cache, workers)."""
    out, skip = ["pcgof"], 0
    for tok in argv:
        if skip:
            skip -= 1
            continue
        flag = tok.split("=", 1)[0]
        if flag in _UNRECORDED:
            skip = _UNRECORDED[flag] if "=" not in tok else 0
            continue
        out.append(tok)
    return out


def build_report(sample, reports, config: MonteCarloConfig, argv) -> dict:
    """Machine-readable record of a ``test`` run."""
    s = sample.scheme
    return {
        "tool": "pcgof",
        "version": __version__,
        "command": list(argv),
        "config": {"seed": config.seed, "reps": config.reps, "alpha": config.alpha},
        "scheme": {"n": s.n, "m": s.m, "r": list(s.r), "label": s.label},
        "data": [float(v) for v in sample.x],
        "fit": reports[0].fit if reports else {},
        "results": [
            {"statistic": r.statistic, "observed": r.observed, "critical_value": r.critical_value,
             "critical_lower": r.critical_lower, "p_value": r.p_value, "reject": r.reject}
            for r in reports
        ],
    }


def _human_table(report: dict) -> str:
    fit = report["fit"]
    lines = [
        f"scheme n={report['scheme']['n']} m={report['scheme']['m']} r={report['scheme']['r']}",
        f"normal fit: mu={fit['mu_hat']:.4f} sigma={fit['sigma_hat']:.4f} (converged={fit['converged']})",
        f"alpha={report['config']['alpha']} reps={report['config']['reps']} seed={report['config']['seed']}",
        "",
        f"{'statistic':>9}  {'observed':>10}  {'critical':>17}  {'p-value':>7}  decision",
    ]
    for r in report["results"]:
        crit = format_value(r["critical_value"])
        if r["critical_lower"] is not None:
            crit = f"{format_value(r['critical_lower'])}/{crit}"
        lines.append(f"{r['statistic']:>9}  {r['observed']:>10.4f}  {crit:>17}  {r['p_value']:>7.4f}  "
                     f"{'reject' if r['reject'] else 'accept'}")
    return "\n".join(lines) + "\n"


def cmd_test(args, argv) -> int:
    if args.data:
        text = Path(args.data).read_text(encoding="utf-8")
        label = Path(args.data).name
    else:
        text = bundled_path("wire.csv").read_text(encoding="utf-8")
        label = "wire.csv"
    sample = parse_data(text, n=args.n, sort=args.sort, label=label)
    config = _config(args)
    reports = run_test(sample, _stats(args.stat), config)
    report = build_report(sample, reports, config, argv)
    if args.format == "json":
        _emit(to_json(report), args.out)
    elif args.format == "csv":
        _emit(to_csv(report["results"], ["statistic", "observed", "critical_value", "critical_lower",
                                         "p_value", "reject"]), args.out)
    else:
        sys.stdout.write(_human_table(report))
        if args.out:
            Path(args.out).write_text(to_json(report), encoding="utf-8")
    return EXIT_REJECT if any(r.reject for r in reports) else EXIT_OK


def cmd_critical_values(args, argv) -> int:
    config = _config(args)
    kinds = _stats(args.stat)
    rows = []
    for scheme in select_schemes(args):
        for k in kinds:
            lower, upper = critical_bounds(null_statistic_sample(scheme, k, config), k, config.alpha)
            rows.append({"scheme": scheme.label, "n": scheme.n, "m": scheme.m, "statistic": k.name,
                         "alpha": config.alpha, "critical_value": upper, "critical_lower": lower})
    _emit_rows(rows, ["scheme", "n", "m", "statistic", "alpha", "critical_value", "critical_lower"], args)
    return EXIT_OK


def cmd_power(args, argv) -> int:
    config = _config(args)
    kinds = _stats(args.stat)
    alts = [parse_distribution(a) for a in _split(args.alt)]
    rows = []
    for scheme in select_schemes(args):
        for c in power_table(scheme, alts, kinds, config):
            rows.append({"scheme": c.scheme, "alternative": c.alternative, "statistic": c.statistic,
                         "power": c.estimate, "std_error": c.std_error, "critical_value": c.critical_value,
                         "critical_lower": c.critical_lower})
    _emit_rows(rows, ["scheme", "alternative", "statistic", "power", "std_error", "critical_value",
                      "critical_lower"], args)
    return EXIT_OK


def cmd_consistency(args, argv) -> int:
    config = _config(args)
    try:
        ms = [int(v) for v in _split(args.m)]
    except ValueError:
        raise ParseError(f"--m must be a comma-separated list of integers, got {args.m!r}") from None
    alts = [parse_distribution(a) for a in _split(args.alt)]
    cells = consistency_study(args.family, ms, alts, config, kind=args.stat or "H")
    labels = [d.label for d in alts]
    rows = {}
    for c in cells:
        row = rows.setdefault(c.m, {"n": c.n, "m": c.m})
        row[c.alternative] = c.estimate
    _emit_rows(list(rows.values()), ["n", "m", *labels], args)
    return EXIT_OK


def cmd_reproduce(args, argv) -> int:
    config = _config(args)
    if args.table not in TABLES:
        raise ParseError(f"unknown table {args.table}; choose from {', '.join(map(str, TABLES))}")
    schemes = [f"[{s}]" for s in _split_labels(args.schemes)] if args.schemes else None
    rep = reproduce(args.table, config, max_m=args.max_m, schemes=schemes)
    paths = write_reproduction(rep, args.out or ".")
    sys.stdout.write(rep.summary())
    for p in paths:
        sys.stdout.write(f"wrote {p}\n")
    return EXIT_OK


# --- argument parsing -----------------------------------------------------

def _add_mc(p, default_format=None):
    p.add_argument("--alpha", type=float, default=0.10, help="test level (default 0.10)")
    p.add_argument("--reps", type=int, default=10_000, help="Monte Carlo replicates (default 10000)")
    p.add_argument("--seed", type=int, default=MonteCarloConfig.seed, help="master seed")
    p.add_argument("--workers", type=int, default=None,
                   help=f"worker processes, 0 = all cores (default ${ENV_WORKERS} or 1)")
    p.add_argument("--cache-dir", default=None, help=f"null sample cache (default ${ENV_CACHE})")
    p.add_argument("--out", default=None, help="output file (default stdout)")
    p.add_argument("--format", choices=("csv", "json"), default=default_format)


def _add_schemes(p):
    p.add_argument("--schemes", default=None, help="'table6' or catalog labels such as '[1],[15]'")
    p.add_argument("--scheme", default=None, help="custom scheme 'n:r1,r2,...,rm'")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="pcgof", description=__doc__.split("\n\n")[0])
    parser.add_argument("--version", action="version", version=f"pcgof {__version__}")
    parser.add_argument("-v", "--verbose", action="store_true", help="log progress to stderr")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("test", help="test a data file for normality")
    p.add_argument("--data", default=None, help="CSV with header 'x,r' (default: bundled wire data)")
    p.add_argument("--n", type=int, default=None, help="total units on test (or '# n:' in the file)")
    p.add_argument("--sort", action="store_true", help="sort rows by x instead of rejecting unsorted input")
    p.add_argument("--stat", default=None, help="comma-separated statistics (default all)")
    _add_mc(p)
    p.set_defaults(func=cmd_test)

    p = sub.add_parser("critical-values", help="simulated critical values")
    _add_schemes(p)
    p.add_argument("--stat", default="H")
    _add_mc(p, "csv")
    p.set_defaults(func=cmd_critical_values)

    p = sub.add_parser("power", help="power against alternatives")
    _add_schemes(p)
    p.add_argument("--alt", default="t3", help="comma-separated alternatives, e.g. t3,laplace,logistic")
    p.add_argument("--stat", default=None)
    _add_mc(p, "csv")
    p.set_defaults(func=cmd_power)

    p = sub.add_parser("consistency", help="mean statistic versus m")
    p.add_argument("--family", type=int, required=True, choices=range(1, 6))
    p.add_argument("--m", required=True, help="comma-separated m values")
    p.add_argument("--alt", default=DEFAULT_ALTERNATIVES)
    p.add_argument("--stat", default="H")
    _add_mc(p, "csv")
    p.set_defaults(func=cmd_consistency)

    p = sub.add_parser("reproduce", help="regenerate a published table")
    p.add_argument("--table", type=int, required=True)
    p.add_argument("--max-m", type=int, default=None, help="tables 1-5: skip rows with larger m")
    p.add_argument("--schemes", default=None, help="table 8: restrict to these labels")
    _add_mc(p)
    p.set_defaults(func=cmd_reproduce)
    return parser


def main(argv=None) -> int:
    argv = sys.argv[1:] if argv is None else list(argv)
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    warnings.simplefilter("always", RuntimeWarning)
    try:
        return args.func(args, recorded_command(argv))
    except (PcgofError, OSError, ValueError) as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_ERROR


if __name__ == "__main__":
    sys.exit(main())
