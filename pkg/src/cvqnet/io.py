"""Matrix text files and atomic CSV/JSON result writers.

Matrix files: first line ``M``, then ``M`` lines of ``M`` whitespace-separated
``re,im`` pairs. Blank lines and lines starting with ``#`` are skipped.

CSV files: optional ``#`` comment lines (tool/version, timestamp, config echo),
then one header row and one row per record. Floats are written with 12
significant digits independent of locale.
"""
from __future__ import annotations

import csv
import io
import json
import os
import tempfile
from typing import Iterable

import numpy as np


class MatrixParseError(ValueError):
    def __init__(self, line: int, message: str):
        super().__init__(f"line {line}: {message}")
        self.line = line


def parse_matrix(text: str) -> np.ndarray:
    lines = [(n, ln.strip()) for n, ln in enumerate(text.splitlines(), start=1)]
    lines = [(n, ln) for n, ln in lines if ln and not ln.startswith("#")]
    if not lines:
        raise MatrixParseError(1, "empty matrix file")
    n0, first = lines[0]
    try:
        M = int(first)
    except ValueError:
        raise MatrixParseError(n0, f"expected the dimension M, got {first!r}") from None
    if M < 1:
        raise MatrixParseError(n0, f"dimension must be positive, got {M}")
    rows = lines[1:]
    if len(rows) != M:
        where = rows[-1][0] + 1 if rows else n0 + 1
        raise MatrixParseError(where, f"expected {M} matrix rows, found {len(rows)}")
    U = np.empty((M, M), dtype=complex)
    for i, (n, ln) in enumerate(rows):
        tokens = ln.split()
        if len(tokens) != M:
            raise MatrixParseError(n, f"expected {M} entries, found {len(tokens)}")
        for j, tok in enumerate(tokens):
            parts = tok.split(",")
            if len(parts) != 2:
                raise MatrixParseError(n, f"entry {j + 1} {tok!r} is not of the form re,im")
            try:
                U[i, j] = complex(float(parts[0]), float(parts[1]))
            except ValueError:
                raise MatrixParseError(n, f"entry {j + 1} {tok!r} is not numeric") from None
    return U


def read_matrix(path: str) -> np.ndarray:
    with open(path, encoding="utf-8") as fh:
        return parse_matrix(fh.read())


def format_matrix(U: np.ndarray) -> str:
    U = np.asarray(U, dtype=complex)
    lines = [str(U.shape[0])]
    for row in U:
        lines.append(" ".join(f"{z.real:.17g},{z.imag:.17g}" for z in row))
    return "\n".join(lines) + "\n"


def format_value(v) -> str:
    if isinstance(v, (bool, np.bool_)):
        return str(bool(v)).lower()
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    if isinstance(v, (float, np.floating)):
        return format(float(v), ".12g")
    return str(v)


def render_csv(rows: list, columns: Iterable[str], comments: Iterable[str] = ()) -> str:
    buf = io.StringIO()
    for c in comments:
        buf.write(f"# {c}\n")
    writer = csv.writer(buf, lineterminator="\n")
    columns = list(columns)
    writer.writerow(columns)
    for row in rows:
        writer.writerow([format_value(row[c]) for c in columns])
    return buf.getvalue()


def _jsonable(v):
    if isinstance(v, dict):
        return {k: _jsonable(x) for k, x in v.items()}
    if isinstance(v, (list, tuple, np.ndarray)):
        return [_jsonable(x) for x in v]
    if isinstance(v, (np.integer,)):
        return int(v)
    if isinstance(v, (np.floating,)):
        return float(v)
    return v


def render_json(payload: dict) -> str:
    return json.dumps(_jsonable(payload), indent=2) + "\n"


def write_atomic(path: str, text: str) -> None:
    """Write ``text`` to ``path`` via a temporary file in the same directory and rename."""
    directory = os.path.dirname(os.path.abspath(path))
    fd, tmp = tempfile.mkstemp(prefix=".tmp-", dir=directory)
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise
