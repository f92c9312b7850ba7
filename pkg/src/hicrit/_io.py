"""CSV/text ingestion with schema validation and cell-level error reporting.

Row numbers in error messages are 1-based file line numbers (the header is
line 1). All schemas reject NaN/Inf and non-numeric cells.
"""

from __future__ import annotations

import csv
import math
import sys

import numpy as np

from .errors import ValidationError
from .hc_core import PValueSeries
from .hct import LabeledMatrix

__all__ = [
    "ingest_pvalues",
    "ingest_labeled",
    "ingest_plain",
    "ingest_pairs",
    "ingest_matrix",
]


def _parse_cell(text: str, row: int, column: str) -> float:
    try:
        value = float(text)
    except ValueError:
        raise ValidationError(f"non-numeric cell {text!r}", row=row, column=column) from None
    if not math.isfinite(value):
        raise ValidationError(f"non-finite cell {text!r}", row=row, column=column)
    return value


def _read_csv(path):
    with open(path, newline="") as fh:
        rows = [row for row in csv.reader(fh) if any(cell.strip() for cell in row)]
    if not rows:
        raise ValidationError(f"{path}: empty file")
    return rows


def ingest_pvalues(path, column=None) -> PValueSeries:
    """P-values from a one-value-per-line text file or a named CSV column."""
    values = []
    if column is None:
        with open(path) as fh:
            lines = [(i, line.strip()) for i, line in enumerate(fh, start=1) if line.strip()]
        if not lines:
            raise ValidationError(f"{path}: empty file")
        for i, text in lines:
            values.append(_parse_cell(text, i, "pvalue"))
    else:
        rows = _read_csv(path)
        header = [h.strip() for h in rows[0]]
        if column not in header:
            raise ValidationError(f"column {column!r} not found in header {header}", row=1)
        j = header.index(column)
        if len(rows) < 2:
            raise ValidationError(f"{path}: no data rows", row=1)
        for i, row in enumerate(rows[1:], start=2):
            if j >= len(row):
                raise ValidationError("missing cell", row=i, column=column)
            values.append(_parse_cell(row[j], i, column))
    for i, v in enumerate(values):
        if not 0.0 < v <= 1.0:
            raise ValidationError(f"P-value {v} outside (0, 1]", row=i + 1)
    return PValueSeries.from_unsorted(values)


def ingest_labeled(path, warn=None) -> LabeledMatrix:
    """Labeled sample matrix: header, first column 'label' in {-1, +1}.

    A {1, 2} label alphabet is remapped (1 -> +1, 2 -> -1) with a warning
    through ``warn`` (defaults to stderr).
    """
    warn = warn or (lambda msg: print(f"warning: {msg}", file=sys.stderr))
    rows = _read_csv(path)
    header = [h.strip() for h in rows[0]]
    if not header or header[0].lower() != "label":
        raise ValidationError(f"first column must be 'label', got {header[:1]}", row=1)
    names = header[1:]
    if not names:
        raise ValidationError("no feature columns", row=1)
    if len(rows) < 2:
        raise ValidationError(f"{path}: no data rows", row=1)
    labels, data = [], []
    for i, row in enumerate(rows[1:], start=2):
        if len(row) != len(header):
            raise ValidationError(f"expected {len(header)} cells, got {len(row)}", row=i)
        labels.append(_parse_cell(row[0], i, "label"))
        data.append([_parse_cell(cell, i, names[j]) for j, cell in enumerate(row[1:])])
    labels = np.asarray(labels)
    if not np.all(labels == labels.astype(int)):
        raise ValidationError("labels must be integers")
    labels = labels.astype(int)
    present = set(labels.tolist())
    if present <= {1, 2} and 2 in present:
        warn("labels {1, 2} remapped to {+1, -1} (1 -> +1, 2 -> -1)")
        labels = np.where(labels == 1, 1, -1)
    elif not present <= {-1, 1}:
        raise ValidationError(f"label alphabet must be {{-1, +1}} or {{1, 2}}, got {sorted(present)}")
    return LabeledMatrix(np.asarray(data), labels, names)


def ingest_plain(path):
    """Numeric matrix with a header row; returns (matrix, column names)."""
    rows = _read_csv(path)
    header = [h.strip() for h in rows[0]]
    if len(rows) < 2:
        raise ValidationError(f"{path}: no data rows", row=1)
    data = []
    for i, row in enumerate(rows[1:], start=2):
        if len(row) != len(header):
            raise ValidationError(f"expected {len(header)} cells, got {len(row)}", row=i)
        data.append([_parse_cell(cell, i, header[j]) for j, cell in enumerate(row)])
    return np.asarray(data), header


def ingest_pairs(path):
    """Two numeric columns (x, y by name if present, else the first two)."""
    matrix, header = ingest_plain(path)
    if matrix.shape[1] < 2:
        raise ValidationError("need two columns for bivariate pairs", row=1)
    if "x" in header and "y" in header:
        ix, iy = header.index("x"), header.index("y")
    else:
        ix, iy = 0, 1
    return matrix[:, ix], matrix[:, iy]


def ingest_matrix(path, schema: str, **kwargs):
    """Schema dispatcher: 'pvalues', 'labeled', 'plain', or 'pairs'."""
    if schema == "pvalues":
        return ingest_pvalues(path, **kwargs)
    if schema == "labeled":
        return ingest_labeled(path, **kwargs)
    if schema == "plain":
        return ingest_plain(path, **kwargs)
    if schema == "pairs":
        return ingest_pairs(path, **kwargs)
    raise ValidationError(f"unknown schema {schema!r}")
