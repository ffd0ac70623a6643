"""Curve CSV input and versioned JSON/CSV result files."""

from __future__ import annotations

import csv
import hashlib
import io
import json
import math
from pathlib import Path

import numpy as np

from . import __version__
from .fda import FunctionalSample, make_grid, trapezoid_grid

RESULT_SCHEMA = "hgauss.result"
POWER_CSV_SCHEMA = "hgauss.powerrow"
SCHEMA_MAJOR = 1


class CurveFileError(ValueError):
    """Malformed curve file; the message names the first offending row/column."""


def read_curves(path) -> FunctionalSample:
    """Read a CSV of curves (rows) evaluated on a shared grid (columns).

    An optional first line ``# grid: t_1,...,t_m`` declares the abscissae,
    which then get trapezoid weights; otherwise the grid is the equispaced
    trapezoid grid on [0, 1].  Blank lines are skipped.
    """
    text = Path(path).read_text()
    lines = text.splitlines()
    grid_points = None
    first = 0
    if lines and lines[0].lstrip().startswith("#"):
        header = lines[0].lstrip()[1:].strip()
        if not header.lower().startswith("grid:"):
            raise CurveFileError("row 1: comment line must be '# grid: t_1,...,t_m'")
        grid_points = _parse_row(header[5:].split(","), 1, "grid")
        first = 1

    rows = []
    for lineno, row in enumerate(csv.reader(io.StringIO("\n".join(lines[first:]))), start=first + 1):
        if not row or all(not cell.strip() for cell in row):
            continue
        values = _parse_row(row, lineno, "value")
        if rows and len(values) != len(rows[0]):
            raise CurveFileError(
                f"row {lineno}: expected {len(rows[0])} columns, found {len(values)}")
        rows.append(values)

    if not rows:
        raise CurveFileError("no curves found; need n ≥ 2")
    m = len(rows[0])
    if m < 2:
        raise CurveFileError(f"row {first + 1}: need m ≥ 2 grid values per curve")
    if len(rows) < 2:
        raise CurveFileError("need n ≥ 2 curves, found 1")
    if grid_points is not None and len(grid_points) != m:
        raise CurveFileError(f"row 1: grid declares {len(grid_points)} points but curves have {m}")
    try:
        grid = make_grid(m) if grid_points is None else trapezoid_grid(grid_points)
    except ValueError as exc:
        raise CurveFileError(f"row 1: invalid grid: {exc}") from exc
    return FunctionalSample(grid, np.array(rows))


def _parse_row(cells, lineno, what):
    out = []
    for col, cell in enumerate(cells, start=1):
        try:
            x = float(cell)
        except ValueError:
            raise CurveFileError(f"row {lineno}, column {col}: cannot parse {cell.strip()!r} "
                                 f"as a {what}") from None
        if not math.isfinite(x):
            raise CurveFileError(f"row {lineno}, column {col}: non-finite {what} {cell.strip()!r}")
        out.append(x)
    return out


def write_curves(path, sample: FunctionalSample, with_grid: bool = False) -> None:
    with open(path, "w", newline="") as fh:
        if with_grid:
            fh.write("# grid: " + ",".join(repr(float(t)) for t in sample.grid.points) + "\n")
        writer = csv.writer(fh)
        for row in sample.curves:
            writer.writerow([repr(float(x)) for x in row])


def file_digest(path) -> str:
    return hashlib.sha256(Path(path).read_bytes()).hexdigest()


def schema_tag(name: str) -> str:
    return f"{name}/{SCHEMA_MAJOR}"


def check_schema(tag: str, name: str) -> None:
    try:
        kind, version = tag.split("/")
        major = int(version.split(".")[0])
    except (AttributeError, ValueError):
        raise ValueError(f"unrecognised schema tag {tag!r}") from None
    if kind != name:
        raise ValueError(f"expected a {name} document, got {kind}")
    if major != SCHEMA_MAJOR:
        raise ValueError(f"unsupported {name} schema major version {major} "
                         f"(this tool reads {SCHEMA_MAJOR})")


def dump_result(doc: dict, path=None) -> str:
    doc = {"schema": schema_tag(RESULT_SCHEMA), "tool_version": __version__, **doc}
    text = json.dumps(doc, indent=2, sort_keys=False)
    if path is not None:
        Path(path).write_text(text + "\n")
    return text


def load_result(path) -> dict:
    doc = json.loads(Path(path).read_text())
    check_schema(doc.get("schema", ""), RESULT_SCHEMA)
    return doc


def power_csv(rows) -> str:
    """One PowerRow per line, with rate/SE columns for every alpha.

    Wall time is left to the JSON record so that reruns give identical CSV.
    """
    alphas = sorted({a for row in rows for a in row.rates})
    cols = ["schema", "label", "dgp", "variant", "n", "reps", "M", "B", "m", "measure",
            "measure_param", "method", "seed", "fresh_probes"]
    for a in alphas:
        cols += [f"rate@{a:g}", f"se@{a:g}"]
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(cols)
    for row in rows:
        c = row.config.to_dict()
        line = [schema_tag(POWER_CSV_SCHEMA), row.config.label(), c["dgp"], c["variant"] or "",
                c["n"], c["reps"], c["M"], c["B"], c["m"], c["measure"], c["measure_param"],
                c["resolved_method"], c["seed"], c["fresh_probes"]]
        for a in alphas:
            line += [repr(row.rates.get(a, float("nan"))), repr(row.std_errors.get(a, float("nan")))]
        writer.writerow(line)
    return buf.getvalue()


def read_power_csv(text: str) -> list[dict]:
    rows = list(csv.DictReader(io.StringIO(text)))
    for row in rows:
        check_schema(row.get("schema", ""), POWER_CSV_SCHEMA)
    return rows
