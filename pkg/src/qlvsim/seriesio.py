"""Deterministic CSV time-series reading and writing.

Files have a single header row naming the columns (the first must be
``time``), LF line endings, and values formatted with a fixed precision so
identical data always serializes to identical bytes.
"""

from __future__ import annotations

import csv
import io

import numpy as np

from .errors import DomainError
from .protocols import Series

_DEFAULT_PRECISION = 17


def format_value(x: float, precision: int = _DEFAULT_PRECISION) -> str:
    """Shortest-round-trip style formatting at a fixed significant-digit
    budget; the output is a pure function of the float bits."""
    if x != x:
        raise DomainError("cannot serialize NaN")
    s = f"{x:.{precision}g}"
    # normalize negative zero for byte-stable output
    return "0" if s == "-0" else s


def serialize_series(series: Series, precision: int = _DEFAULT_PRECISION) -> str:
    """Render a series as CSV text with LF newlines."""
    buf = io.StringIO()
    names = ["time"] + list(series.columns.keys())
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(names)
    cols = [series.times] + list(series.columns.values())
    for row in zip(*cols):
        writer.writerow([format_value(float(v), precision) for v in row])
    return buf.getvalue()


def write_series(path, series: Series, precision: int = _DEFAULT_PRECISION) -> None:
    """Write a series to ``path`` as deterministic CSV."""
    text = serialize_series(series, precision)
    with open(path, "w", newline="") as fh:
        fh.write(text)


def read_series(path) -> Series:
    """Read a CSV series; malformed content raises DomainError with the
    offending line number."""
    with open(path, "r", newline="") as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise DomainError(f"{path}: empty file") from None
        header = [h.strip() for h in header]
        if not header or header[0] != "time":
            raise DomainError(f"{path}: line 1: first column must be 'time', "
                              f"got {header[0] if header else '(none)'!r}")
        if len(set(header)) != len(header):
            raise DomainError(f"{path}: line 1: duplicate column names")
        rows = []
        linenos = []
        for lineno, row in enumerate(reader, start=2):
            if not row:
                continue
            if len(row) != len(header):
                raise DomainError(f"{path}: line {lineno}: expected "
                                  f"{len(header)} fields, got {len(row)}")
            try:
                rows.append([float(v) for v in row])
            except ValueError as exc:
                raise DomainError(f"{path}: line {lineno}: {exc}") from exc
            linenos.append(lineno)
    if not rows:
        raise DomainError(f"{path}: no data rows")
    data = np.asarray(rows, dtype=float)
    if not np.all(np.isfinite(data)):
        bad = int(np.argwhere(~np.isfinite(data))[0][0])
        raise DomainError(f"{path}: line {linenos[bad]}: non-finite value")
    times = data[:, 0]
    for i in range(1, times.size):
        if times[i] <= times[i - 1]:
            raise DomainError(
                f"{path}: line {linenos[i]}: time must be strictly "
                f"increasing (got {times[i]} after {times[i - 1]})")
    columns = {name: data[:, i] for i, name in enumerate(header) if i > 0}
    return Series(times=times, columns=columns)
