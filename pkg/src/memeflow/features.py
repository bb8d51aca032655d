"""Entropy triage of dataset columns.

Each column is scored by the Shannon entropy of its equal-width histogram
over the column's own range, normalized by ``log2(bins)``. Low scores mark
redundant columns, high scores random ones, and the band in between is
treated as meaningful.
"""
from __future__ import annotations

import csv
import enum
import io
import math
from dataclasses import dataclass

import numpy as np

from .errors import CsvFormatError, ValidationError

DEFAULT_LOW = 0.05
DEFAULT_HIGH = 0.95


class Label(str, enum.Enum):
    REDUNDANT = "Redundant"
    MEANINGFUL = "Meaningful"
    RANDOM = "Random"


@dataclass(frozen=True)
class FeatureScore:
    name: str
    entropy_bits: float
    normalized: float
    label: Label

    def to_dict(self):
        return {
            "name": self.name,
            "entropy_bits": self.entropy_bits,
            "normalized": self.normalized,
            "label": self.label.value,
        }


@dataclass(frozen=True, eq=False)
class Dataset:
    """Named numeric columns of equal length.

    ``dropped_rows`` counts input rows discarded for missing cells.
    """

    names: tuple[str, ...]
    columns: tuple[np.ndarray, ...]
    dropped_rows: int = 0

    def __post_init__(self):
        cols = tuple(np.asarray(c, dtype=float).reshape(-1) for c in self.columns)
        if len(cols) != len(self.names):
            raise ValidationError("number of names and columns differ")
        if len(set(self.names)) != len(self.names):
            raise ValidationError("column names must be unique")
        lengths = {c.size for c in cols}
        if len(lengths) > 1:
            raise ValidationError(f"columns have different lengths: {sorted(lengths)}")
        if cols and cols[0].size < 1:
            raise ValidationError("dataset has no rows")
        for name, c in zip(self.names, cols):
            if not np.all(np.isfinite(c)):
                raise ValidationError(f"column {name!r} contains non-finite values")
        object.__setattr__(self, "names", tuple(self.names))
        object.__setattr__(self, "columns", cols)

    @property
    def n_rows(self):
        return self.columns[0].size if self.columns else 0


def column_entropy(values, bins: int) -> float:
    """Shannon entropy in bits of the equal-width histogram of ``values``.

    The histogram spans ``[min, max]`` of the data, so the score is
    invariant to affine rescaling. A constant column scores exactly 0.
    """
    x = np.asarray(values, dtype=float).reshape(-1)
    if x.size == 0:
        raise ValidationError("cannot score an empty column")
    if int(bins) != bins or bins < 2:
        raise ValidationError(f"bins must be an integer >= 2, got {bins!r}")
    if not np.all(np.isfinite(x)):
        raise ValidationError("column contains non-finite values")
    lo, hi = x.min(), x.max()
    if lo == hi:
        return 0.0
    counts, _ = np.histogram(x, bins=int(bins), range=(lo, hi))
    p = counts[counts > 0] / x.size
    h = float(-np.sum(p * np.log2(p)))
    # clamp rounding excursions outside the analytic bounds
    return min(max(h, 0.0), math.log2(bins))


def _label(h: float, low: float, high: float) -> Label:
    if h <= low:
        return Label.REDUNDANT
    if h >= high:
        return Label.RANDOM
    return Label.MEANINGFUL


def triage(data: Dataset, bins: int = 16, low: float = DEFAULT_LOW, high: float = DEFAULT_HIGH):
    """Score and label every column of ``data``, preserving column order."""
    if not (0.0 <= low < high <= 1.0):
        raise ValidationError(f"thresholds must satisfy 0 <= low < high <= 1, got ({low}, {high})")
    scores = []
    for name, col in zip(data.names, data.columns):
        try:
            h = column_entropy(col, bins)
        except ValidationError as exc:
            raise ValidationError(f"column {name!r}: {exc}") from exc
        norm = h / math.log2(bins)
        scores.append(FeatureScore(name, h, norm, _label(norm, low, high)))
    return scores


_MISSING = {"", "na", "nan", "null", "none"}


def parse_dataset_csv(text: str) -> Dataset:
    """Read a headed numeric CSV; rows with missing cells are dropped."""
    reader = csv.reader(io.StringIO(text))
    try:
        header = [h.strip() for h in next(reader)]
    except StopIteration:
        raise CsvFormatError("empty input, expected a header row", line=1) from None
    if not header or any(not h for h in header):
        raise CsvFormatError("header has empty column names", line=1)
    rows, dropped = [], 0
    for row in reader:
        line = reader.line_num
        if not row or all(not c.strip() for c in row):
            continue
        if len(row) != len(header):
            raise CsvFormatError(f"expected {len(header)} fields, got {len(row)}", line=line)
        cells = [c.strip() for c in row]
        if any(c.lower() in _MISSING for c in cells):
            dropped += 1
            continue
        vals = []
        for name, c in zip(header, cells):
            try:
                v = float(c)
            except ValueError:
                raise CsvFormatError(f"column {name!r}: cannot parse {c!r}", line=line) from None
            if not math.isfinite(v):
                raise CsvFormatError(f"column {name!r}: non-finite value {c!r}", line=line)
            vals.append(v)
        rows.append(vals)
    if not rows:
        raise CsvFormatError("no complete data rows", line=2)
    arr = np.array(rows, dtype=float)
    return Dataset(tuple(header), tuple(arr[:, k] for k in range(arr.shape[1])), dropped)


def scores_to_csv(scores) -> str:
    lines = ["name,entropy_bits,normalized,label"]
    for s in scores:
        lines.append(f"{s.name},{s.entropy_bits:.17g},{s.normalized:.17g},{s.label.value}")
    return "\n".join(lines) + "\n"
