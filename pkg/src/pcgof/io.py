"""Data files, bundled reference tables and output formatting."""

from __future__ import annotations

import csv
import io
import json
import math
import re
from importlib import resources

from .censoring import validate_scheme
from .exceptions import ParseError
from .simulate import CensoredSample

__all__ = [
    "read_data_file",
    "parse_data",
    "load_reference",
    "bundled_path",
    "format_value",
    "to_csv",
    "to_json",
    "report_schema",
]

_N_DIRECTIVE = re.compile(r"^#\s*n\s*[:=]\s*(\d+)\s*$", re.IGNORECASE)


def parse_data(text: str, n: int | None = None, sort: bool = False, label: str = "") -> CensoredSample:
    """Parse ``x,r`` rows into a censored sample.

    Lines starting with ``#`` are comments, except ``# n: <int>`` which supplies
    the number of units when ``n`` is not given explicitly. With ``sort=True``
    rows are reordered by ``x`` (each removal stays with its failure);
    otherwise decreasing ``x`` is an error.
    """
    rows = []
    header_seen = False
    file_n = None
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line:
            continue
        if line.startswith("#"):
            m = _N_DIRECTIVE.match(line)
            if m:
                file_n = int(m.group(1))
            continue
        fields = [f.strip() for f in next(csv.reader([line]))]
        if not header_seen:
            header_seen = True
            if [f.lower() for f in fields] == ["x", "r"]:
                continue
            raise ParseError(f"expected header 'x,r', got {line!r}", lineno)
        if len(fields) != 2:
            raise ParseError(f"expected 2 fields, got {len(fields)}", lineno)
        try:
            x = float(fields[0])
        except ValueError:
            raise ParseError(f"x is not a number: {fields[0]!r}", lineno) from None
        if not math.isfinite(x):
            raise ParseError("x must be finite", lineno)
        try:
            r = int(fields[1])
        except ValueError:
            raise ParseError(f"r is not an integer: {fields[1]!r}", lineno) from None
        if r < 0:
            raise ParseError("r must be nonnegative", lineno)
        rows.append((x, r, lineno))
    if not rows:
        raise ParseError("no data rows")
    if sort:
        rows.sort(key=lambda t: t[0])
    else:
        for prev, cur in zip(rows, rows[1:]):
            if cur[0] < prev[0]:
                raise ParseError("x values must be nondecreasing (pass sort=True to reorder)", cur[2])
    n = n if n is not None else file_n
    if n is None:
        raise ParseError("total number of units n is required")
    scheme = validate_scheme(n, len(rows), [r for _, r, _ in rows], label=label)
    return CensoredSample(scheme, [x for x, _, _ in rows])


def read_data_file(path, n: int | None = None, sort: bool = False) -> CensoredSample:
    with open(path, encoding="utf-8") as fh:
        text = fh.read()
    return parse_data(text, n=n, sort=sort)


def bundled_path(name: str):
    """Filesystem path of a bundled resource (e.g. ``"wire.csv"``)."""
    return resources.files("pcgof") / "data" / name


def load_reference(table: int) -> list[dict[str, str]]:
    """Rows of a published table, as strings keyed by column name."""
    text = bundled_path(f"table{table}.csv").read_text(encoding="utf-8")
    lines = [ln for ln in text.splitlines() if ln and not ln.startswith("#")]
    return list(csv.DictReader(lines))


def report_schema() -> dict:
    return json.loads(bundled_path("report.schema.json").read_text(encoding="utf-8"))


def format_value(v) -> str:
    if v is None:
        return ""
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, float):
        if math.isnan(v):
            return "nan"
        return f"{v:.4f}"
    return str(v)


def to_csv(rows: list[dict], fields: list[str] | None = None) -> str:
    """CSV text with floats at four decimals and '.' separators."""
    if fields is None:
        fields = list(rows[0]) if rows else []
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(fields)
    for row in rows:
        writer.writerow([format_value(row.get(f)) for f in fields])
    return buf.getvalue()


def to_json(obj) -> str:
    return json.dumps(obj, indent=2, sort_keys=True, allow_nan=False) + "\n"
