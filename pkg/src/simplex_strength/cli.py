"""Command line interface.

Exit codes: 0 success, 1 invalid input, 2 verification violation.
"""
import csv
import io
import json
import sys

import click
import numpy as np

from .bounds import BOUND_FIELDS, lemma_bounds
from .errors import InvalidInputError, InvalidMetricError
from .geometry import DistanceMatrix, PointCloudSimplex
from .strength import SECTIONS, in_region, normalized_triangle_strength, signed_strength, strength_result_from_distances
from .verify import (
    TrialConfig,
    run_adversarial_family,
    run_gradient_suite,
    run_invariance_suite,
    run_lemma_suite,
    run_lipschitz_suite,
)

EXIT_OK = 0
EXIT_INPUT = 1
EXIT_VIOLATION = 2

RECORD_FIELDS = ["file", "index", "dim", "sigma", "half_perimeter", "volume_squared", "sign", "signed"]
UNAVAILABLE = "unavailable"


class InputFileError(Exception):
    def __init__(self, path, line, col, message):
        super().__init__(f"{path}:{line}:{col}: {message}")


def fmt(x):
    """17 significant digits: enough to round-trip any float64."""
    return format(float(x), ".17g")


def _json_scalar(v):
    if v is None:
        return "null"
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    if isinstance(v, (float, np.floating)):
        return fmt(v)
    return json.dumps(v)


def _json_records(records, fields):
    rows = []
    for r in records:
        body = ", ".join(f"{json.dumps(k)}: {_json_scalar(r[k])}" for k in fields)
        rows.append("  {" + body + "}")
    return "[\n" + ",\n".join(rows) + "\n]\n" if rows else "[]\n"


def _csv_text(records, fields):
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(fields)
    for r in records:
        w.writerow(["" if r[k] is None else fmt(r[k]) if isinstance(r[k], float) else r[k] for k in fields])
    return buf.getvalue()


# ---------------------------------------------------------------------------
# input parsing


def _csv_blocks(path, text):
    """Numeric CSV blocks separated by blank lines; '#' starts a comment line.

    Yields ``(first_line_number, rows)``.
    """
    block, first = [], None
    for lineno, line in enumerate(text.splitlines(), start=1):
        stripped = line.strip()
        if not stripped or stripped.startswith("#"):
            if block:
                yield first, block
                block, first = [], None
            continue
        row = []
        col = 1
        for cell in next(csv.reader([line])):
            try:
                row.append(float(cell))
            except ValueError:
                raise InputFileError(path, lineno, col, f"not a number: {cell.strip()!r}") from None
            col += len(cell) + 1
        if first is None:
            first = lineno
        block.append((lineno, row))
    if block:
        yield first, block


def _block_matrix(path, first, block, expect):
    width = len(block[0][1])
    for lineno, row in block:
        if len(row) != width:
            raise InputFileError(path, lineno, 1, f"expected {width} columns, found {len(row)}")
    rows = len(block)
    if expect == "points" and rows != width + 1:
        raise InputFileError(path, first, 1, f"a simplex in R^{width} needs {width + 1} rows, found {rows}")
    if expect == "distances" and rows != width:
        raise InputFileError(path, first, 1, f"distance matrix must be square, found {rows} x {width}")
    return np.array([row for _, row in block], dtype=np.float64)


def _json_points(path, text):
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise InputFileError(path, exc.lineno, exc.colno, exc.msg) from None
    if isinstance(data, dict) and "simplices" in data:
        data = data["simplices"]
    items = data if isinstance(data, list) else [data]
    out = []
    for k, item in enumerate(items):
        if not isinstance(item, dict) or "points" not in item:
            raise InputFileError(path, 1, 1, f"entry {k}: expected an object with a 'points' list")
        out.append((1, item["points"]))
    return out


def read_inputs(path, distances=False):
    """Parse a point or distance file into simplices / distance matrices."""
    try:
        with open(path, encoding="utf-8") as fh:
            text = fh.read()
    except OSError as exc:
        raise InputFileError(path, 0, 0, exc.strerror or str(exc)) from None
    kind = "distances" if distances else "points"
    if not distances and text.lstrip().startswith(("{", "[")):
        raw = _json_points(path, text)
    else:
        raw = [(first, _block_matrix(path, first, block, kind)) for first, block in _csv_blocks(path, text)]
    if not raw:
        raise InputFileError(path, 1, 1, "no data found")
    objs = []
    for first, m in raw:
        try:
            objs.append(DistanceMatrix(m) if distances else PointCloudSimplex(m))
        except InvalidInputError as exc:
            raise InputFileError(path, first, 1, str(exc)) from None
    return objs


# ---------------------------------------------------------------------------
# commands


@click.group()
def cli():
    """Strength of geometric simplices: compute, tabulate, verify."""


@cli.command()
@click.option("--input", "input_path", required=True, help="Point file (CSV or JSON) or distance CSV.")
@click.option("--distances", is_flag=True, help="Input holds distance matrices instead of points.")
@click.option("--format", "fmt_", type=click.Choice(["csv", "json"]), default="csv", show_default=True)
def strength(input_path, distances, fmt_):
    """Strength, half-perimeter, squared volume and orientation of each simplex."""
    try:
        objs = read_inputs(input_path, distances)
    except InputFileError as exc:
        click.echo(f"error: {exc}", err=True)
        raise click.exceptions.Exit(EXIT_INPUT)
    records = []
    for k, obj in enumerate(objs):
        try:
            r = strength_result_from_distances(obj) if distances else signed_strength(obj)
        except InvalidMetricError as exc:
            click.echo(f"error: {input_path}: simplex {k}: invalid metric: {exc}", err=True)
            raise click.exceptions.Exit(EXIT_INPUT)
        records.append(
            {
                "file": input_path,
                "index": k,
                "dim": obj.dim,
                "sigma": r.sigma,
                "half_perimeter": r.half_perimeter,
                "volume_squared": r.volume_squared,
                "sign": UNAVAILABLE if r.sign is None else r.sign,
                "signed": UNAVAILABLE if r.signed is None else r.signed,
            }
        )
    text = _json_records(records, RECORD_FIELDS) if fmt_ == "json" else _csv_text(records, RECORD_FIELDS)
    click.echo(text, nl=False)


def _write(output, text):
    try:
        with open(output, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
    except OSError as exc:
        click.echo(f"error: cannot write {output}: {exc.strerror or exc}", err=True)
        raise click.exceptions.Exit(EXIT_INPUT)


def grid_rows(resolution):
    """``(x, y, sigma)`` on the ``R x R`` lattice of the unit square, inside the region only."""
    last = resolution - 1
    rows = []
    for i in range(resolution):
        x = i / last
        for j in range(resolution):
            y = j / last
            if in_region(x, y):
                rows.append((x, y, normalized_triangle_strength(x, y)))
    return rows


@cli.command()
@click.option("--resolution", type=click.IntRange(min=2), default=200, show_default=True)
@click.option("--output", required=True, help="CSV file to write.")
def grid(resolution, output):
    """Strength of normalized triangles over the parameter region, for surface plots."""
    lines = ["x,y,sigma"] + [f"{fmt(x)},{fmt(y)},{fmt(s)}" for x, y, s in grid_rows(resolution)]
    _write(output, "\n".join(lines) + "\n")


def curve_rows(section, samples):
    fn, lo, hi = SECTIONS[section]
    xs = np.linspace(lo, hi, samples)
    return list(zip(xs.tolist(), fn(xs).tolist()))


@cli.command()
@click.option("--section", required=True, help="b-eq-c (edge y = 0) or a-eq-b (edge x + y = 1).")
@click.option("--samples", type=click.IntRange(min=2), default=101, show_default=True)
@click.option("--output", required=True, help="CSV file to write.")
def curves(section, samples, output):
    """Strength along the two isosceles edges of the parameter region."""
    if section not in SECTIONS:
        click.echo(f"error: unknown section {section!r}; choose from {', '.join(SECTIONS)}", err=True)
        raise click.exceptions.Exit(EXIT_INPUT)
    lines = ["x,sigma"] + [f"{fmt(x)},{fmt(s)}" for x, s in curve_rows(section, samples)]
    _write(output, "\n".join(lines) + "\n")


@cli.command()
@click.option("--max-dim", type=click.IntRange(min=1), required=True)
@click.option("--format", "fmt_", type=click.Choice(["csv", "json"]), default="csv", show_default=True)
def bounds(max_dim, fmt_):
    """Derangement counts and bound constants for n = 1..max-dim."""
    records = [lemma_bounds(n).as_dict() for n in range(1, max_dim + 1)]
    text = _json_records(records, BOUND_FIELDS) if fmt_ == "json" else _csv_text(records, BOUND_FIELDS)
    click.echo(text, nl=False)


def _parse_eps(ctx, param, value):
    try:
        lo, hi = (float(v) for v in value.split(":"))
    except ValueError:
        raise click.BadParameter("expected LO:HI, e.g. 1e-9:1e-1") from None
    return lo, hi


def run_all_suites(cfg, workers=1):
    reports = [
        run_lipschitz_suite(cfg, workers),
        run_lemma_suite(cfg, workers),
        run_invariance_suite(cfg, workers),
        run_gradient_suite(cfg, workers),
    ]
    if cfg.dim == 2:
        reports.append(run_adversarial_family())
    return reports


def verification_json(cfg, reports):
    doc = {
        "config": cfg.as_dict(),
        "passed": all(r.passed for r in reports),
        "suites": [r.as_dict() for r in reports],
    }
    return json.dumps(doc, indent=2, sort_keys=True) + "\n"


@cli.command()
@click.option("--dim", type=int, required=True)
@click.option("--trials", type=int, default=10000, show_default=True)
@click.option("--seed", type=int, default=0, show_default=True)
@click.option("--scale", type=float, default=1.0, show_default=True)
@click.option("--eps", "eps", default="1e-9:1e-1", show_default=True, callback=_parse_eps, help="LO:HI")
@click.option("--near-degenerate-fraction", type=float, default=0.25, show_default=True)
@click.option("--report", default="-", show_default=True, help="JSON report path ('-' for stdout).")
@click.option("--workers", type=click.IntRange(min=1), default=1, show_default=True)
def verify(dim, trials, seed, scale, eps, near_degenerate_fraction, report, workers):
    """Run the randomized Lipschitz, lemma, invariance and gradient suites."""
    try:
        cfg = TrialConfig(dim, trials, seed, scale, eps, near_degenerate_fraction)
    except InvalidInputError as exc:
        click.echo(f"error: {exc}", err=True)
        raise click.exceptions.Exit(EXIT_INPUT)
    reports = run_all_suites(cfg, workers)
    for r in reports:
        for name in sorted(r.checks):
            c = r.checks[name]
            status = "ok" if c.passed else "FAIL"
            click.echo(
                f"{r.suite:<11} {name:<20} max {c.max_ratio:.6g} / bound {c.bound:.6g}  "
                f"violations {c.violations}  {status}",
                err=True,
            )
    text = verification_json(cfg, reports)
    if report == "-":
        click.echo(text, nl=False)
    else:
        _write(report, text)
    if not all(r.passed for r in reports):
        raise click.exceptions.Exit(EXIT_VIOLATION)


def main(argv=None):
    """Run the CLI and return its exit code instead of exiting."""
    try:
        rv = cli.main(args=argv, prog_name="simplex-strength", standalone_mode=False)
    except click.exceptions.Exit as exc:
        return exc.exit_code
    except click.ClickException as exc:
        exc.show()
        return EXIT_INPUT
    except click.exceptions.Abort:
        return EXIT_INPUT
    return rv if isinstance(rv, int) else EXIT_OK


def run():
    sys.exit(main())


if __name__ == "__main__":
    run()
