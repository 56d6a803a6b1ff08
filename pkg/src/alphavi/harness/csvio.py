"""CSV emission with full float precision."""

from __future__ import annotations

import csv
import os


def _fmt(v):
    if isinstance(v, bool):
        return str(v)
    if isinstance(v, float):
        return repr(v)
    if hasattr(v, "item"):          # numpy scalars
        return _fmt(v.item())
    return str(v)


def emit_csv(rows, path, columns=None):
    """Write a list of dicts as CSV; floats use ``repr`` (17 significant digits)."""
    rows = list(rows)
    if not rows:
        raise ValueError("no rows to write")
    columns = list(columns or rows[0].keys())
    parent = os.path.dirname(os.fspath(path))
    if parent:
        os.makedirs(parent, exist_ok=True)
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(columns)
        for row in rows:
            writer.writerow([_fmt(row[c]) for c in columns])
    return path


def _parse(text):
    for conv in (int, float):
        try:
            return conv(text)
        except ValueError:
            pass
    return text


def read_csv(path):
    """Read a CSV back into dicts, converting numeric fields."""
    with open(path, newline="") as fh:
        return [{k: _parse(v) for k, v in row.items()} for row in csv.DictReader(fh)]
