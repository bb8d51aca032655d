"""TimeSeries container and the ``t,y`` / wide CSV formats."""
from __future__ import annotations

import csv
import io
from dataclasses import dataclass, field

import numpy as np

from .errors import CsvFormatError, ValidationError


def fmt(x: float) -> str:
    """Serialize a float with 17 significant digits."""
    return format(float(x), ".17g")


@dataclass(frozen=True, eq=False)
class TimeSeries:
    """Ordered ``(t, y)`` samples with strictly increasing ``t``.

    ``warnings`` carries non-fatal notes attached by the producer, e.g. an
    out-of-range energy context during simulation.
    """

    t: np.ndarray
    y: np.ndarray
    warnings: tuple = field(default=())

    def __post_init__(self):
        t = np.asarray(self.t, dtype=float).reshape(-1)
        y = np.asarray(self.y, dtype=float).reshape(-1)
        if t.shape != y.shape:
            raise ValidationError(f"t and y lengths differ ({t.size} vs {y.size})")
        if not (np.all(np.isfinite(t)) and np.all(np.isfinite(y))):
            raise ValidationError("time series contains non-finite values")
        if t.size > 1 and np.any(np.diff(t) <= 0):
            i = int(np.argmax(np.diff(t) <= 0))
            raise ValidationError(f"t is not strictly increasing at index {i + 1}")
        t.flags.writeable = False
        y.flags.writeable = False
        object.__setattr__(self, "t", t)
        object.__setattr__(self, "y", y)
        object.__setattr__(self, "warnings", tuple(self.warnings))

    def __len__(self):
        return self.t.size

    def scaled(self, c: float) -> "TimeSeries":
        return TimeSeries(self.t, self.y * c, self.warnings)

    def shifted(self, tau: float) -> "TimeSeries":
        return TimeSeries(self.t + tau, self.y, self.warnings)

    def to_csv(self) -> str:
        lines = ["t,y"]
        lines += [f"{fmt(a)},{fmt(b)}" for a, b in zip(self.t, self.y)]
        return "\n".join(lines) + "\n"


def _parse_rows(text: str, expected_header=None):
    """Yield ``(line_number, cells)`` for the data rows of a headed CSV."""
    reader = csv.reader(io.StringIO(text))
    try:
        header = next(reader)
    except StopIteration:
        raise CsvFormatError("empty input, expected a header row", line=1) from None
    header = [h.strip() for h in header]
    if expected_header is not None and header != list(expected_header):
        raise CsvFormatError(
            f"expected header {','.join(expected_header)!r}, got {','.join(header)!r}", line=1
        )
    rows = []
    for row in reader:
        if not row or all(not c.strip() for c in row):
            continue
        rows.append((reader.line_num, [c.strip() for c in row]))
    return header, rows


def _to_float(cell: str, line: int, name: str) -> float:
    try:
        v = float(cell)
    except ValueError:
        raise CsvFormatError(f"column {name!r}: cannot parse {cell!r} as a number", line=line) from None
    if not np.isfinite(v):
        raise CsvFormatError(f"column {name!r}: non-finite value {cell!r}", line=line)
    return v


def parse_series_csv(text: str) -> TimeSeries:
    """Parse ``t,y`` CSV text. Errors carry the offending line number."""
    _, rows = _parse_rows(text, expected_header=("t", "y"))
    if not rows:
        raise CsvFormatError("no data rows", line=2)
    t, y = [], []
    for line, cells in rows:
        if len(cells) != 2:
            raise CsvFormatError(f"expected 2 fields, got {len(cells)}", line=line)
        t.append(_to_float(cells[0], line, "t"))
        y.append(_to_float(cells[1], line, "y"))
        if len(t) > 1 and t[-1] <= t[-2]:
            raise CsvFormatError("t is not strictly increasing", line=line)
    return TimeSeries(np.array(t), np.array(y))


def read_series_csv(path) -> TimeSeries:
    with open(path, newline="", encoding="utf-8") as fh:
        return parse_series_csv(fh.read())


def wide_csv(t, columns, names=None) -> str:
    """Render ``t,y1,...,yN`` (or custom column names) as CSV text."""
    columns = [np.asarray(c, dtype=float) for c in columns]
    if names is None:
        names = [f"y{i + 1}" for i in range(len(columns))]
    out = [",".join(["t", *names])]
    for k, tk in enumerate(np.asarray(t, dtype=float)):
        out.append(",".join([fmt(tk), *(fmt(c[k]) for c in columns)]))
    return "\n".join(out) + "\n"
