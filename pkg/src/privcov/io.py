"""File formats: dataset CSV in, matrix CSV/JSON out.

Dataset CSV: one sample per line, ``d`` comma-separated floats, optional
header line. Blank lines are skipped. Floats are written with ``repr`` so a
file round-trips exactly.
"""

import csv
import json

import numpy as np

from .errors import InputError


class ParseError(InputError):
    """Malformed dataset file; ``line`` is 1-based."""

    def __init__(self, message, line):
        super().__init__(f"line {line}: {message}")
        self.line = line


def _floats(fields):
    try:
        return [float(x) for x in fields]
    except ValueError:
        return None


def parse_dataset_csv(text):
    """Parse dataset CSV text into an ``(n, d)`` array."""
    rows = []
    width = None
    for lineno, fields in enumerate(csv.reader(text.splitlines()), start=1):
        fields = [f.strip() for f in fields]
        if not fields or all(f == "" for f in fields):
            continue
        values = _floats(fields)
        if values is None:
            if width is None and not rows and lineno == 1:
                width = len(fields)
                continue
            bad = next(f for f in fields if _floats([f]) is None)
            raise ParseError(f"cannot parse {bad!r} as a number", lineno)
        if width is None:
            width = len(values)
        elif len(values) != width:
            raise ParseError(f"expected {width} columns, found {len(values)}", lineno)
        if not all(np.isfinite(values)):
            raise ParseError("non-finite value", lineno)
        rows.append(values)
    if not rows:
        raise ParseError("no data rows", 1)
    return np.array(rows, dtype=float)


def read_dataset_csv(path):
    with open(path, newline="") as fh:
        return parse_dataset_csv(fh.read())


def format_matrix_csv(M):
    M = np.atleast_2d(np.asarray(M, dtype=float))
    return "".join(",".join(repr(float(x)) for x in row) + "\n" for row in M)


def format_json(obj):
    return json.dumps(obj, indent=2) + "\n"


def write_text(text, path=None, stream=None):
    """Write to ``path`` if given, else to ``stream``."""
    if path is None:
        stream.write(text)
        return
    with open(path, "w", newline="") as fh:
        fh.write(text)
