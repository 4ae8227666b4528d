"""Plain-text formats: correspondence CSV, result tables, key=value files."""

from __future__ import annotations

import csv
import math
from pathlib import Path

import numpy as np

from .exceptions import EmptyFile, Malformed

__all__ = [
    "CORRESPONDENCE_HEADER",
    "TABLE_HEADER",
    "format_real",
    "load_config",
    "parse_correspondences",
    "write_correspondences",
    "write_metadata",
    "write_rows",
    "write_table",
]

CORRESPONDENCE_HEADER = ("x", "y", "x_prime", "y_prime")
TABLE_HEADER = ("parameter", "method", "mae_deg", "failures", "trials")


def format_real(value):
    """17 significant digits, enough to round-trip any double."""
    return format(float(value), ".17g")


def parse_correspondences(path):
    """Read a correspondence file into an ``(n, 4)`` float array.

    Row ``i`` of the result is data row ``i + 1`` (file line ``i + 2``).
    """
    path = Path(path)
    with path.open("r", encoding="utf-8", newline="") as fh:
        lines = fh.read().split("\n")
    if lines and lines[-1] == "":
        lines.pop()
    if not lines:
        raise EmptyFile(f"{path}: file is empty")
    header = tuple(field.strip() for field in lines[0].rstrip("\r").split(","))
    if header != CORRESPONDENCE_HEADER:
        raise Malformed(1, f"header must be {','.join(CORRESPONDENCE_HEADER)}")

    rows = []
    for line_number, raw in enumerate(lines[1:], start=2):
        fields = raw.rstrip("\r").split(",")
        if fields == [""]:
            raise Malformed(line_number, "blank line")
        if len(fields) != 4:
            raise Malformed(line_number, f"expected 4 fields, got {len(fields)}")
        try:
            values = [float(f) for f in fields]
        except ValueError:
            raise Malformed(line_number, "non-numeric field") from None
        if not all(math.isfinite(v) for v in values):
            raise Malformed(line_number, "non-finite field")
        rows.append(values)
    if not rows:
        raise EmptyFile(f"{path}: no data rows after the header")
    return np.array(rows, dtype=float)


def write_rows(path, header, rows):
    with Path(path).open("w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(header)
        for row in rows:
            writer.writerow([format_real(v) if isinstance(v, (float, np.floating)) else v for v in row])


def write_correspondences(path, pairs):
    write_rows(path, CORRESPONDENCE_HEADER, [[float(v) for v in row] for row in np.asarray(pairs)])


def write_table(path, rows):
    """Write sweep rows with the fixed ``parameter,method,mae_deg,failures,trials`` header."""
    write_rows(
        path,
        TABLE_HEADER,
        [(float(r.parameter), r.method, float(r.mae_deg), int(r.failures), int(r.trials)) for r in rows],
    )


def write_metadata(path, items):
    """One ``key=value`` line per item, in the given order."""
    with Path(path).open("w", encoding="utf-8", newline="") as fh:
        for key, value in items.items():
            if isinstance(value, float):
                value = repr(value)
            fh.write(f"{key}={value}\n")


def load_config(path):
    """Parse a flat ``key = value`` file; ``#`` starts a comment."""
    config = {}
    with Path(path).open("r", encoding="utf-8") as fh:
        for line_number, raw in enumerate(fh, start=1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            key, sep, value = line.partition("=")
            if not sep or not key.strip():
                raise Malformed(line_number, "expected key=value")
            config[key.strip()] = value.strip()
    return config
