"""Loading and scaling of sample-by-feature matrices and label files."""
from __future__ import annotations

import os
from dataclasses import dataclass, field

import numpy as np


class DataError(ValueError):
    """Raised for malformed matrix or label input."""


@dataclass(frozen=True)
class DataMatrix:
    """An n x d table of samples (rows) by features (columns)."""

    values: np.ndarray

    def __post_init__(self):
        values = np.asarray(self.values, dtype=float)
        if values.ndim != 2:
            raise DataError(f"expected a 2-D matrix, got shape {values.shape}")
        if values.shape[0] < 2 or values.shape[1] < 2:
            raise DataError(f"need at least 2 samples and 2 features, got {values.shape}")
        if not np.all(np.isfinite(values)):
            raise DataError("matrix contains non-finite entries")
        values.setflags(write=False)
        object.__setattr__(self, "values", values)

    @property
    def n(self) -> int:
        return self.values.shape[0]

    @property
    def d(self) -> int:
        return self.values.shape[1]


@dataclass(frozen=True)
class LabelVector:
    """Ground-truth classes mapped to 0..c-1 in order of first appearance."""

    labels: np.ndarray
    names: tuple = field(default=())

    def __post_init__(self):
        labels = np.asarray(self.labels, dtype=int)
        if labels.ndim != 1 or labels.size == 0:
            raise DataError("labels must be a non-empty 1-D sequence")
        labels.setflags(write=False)
        object.__setattr__(self, "labels", labels)

    @property
    def c(self) -> int:
        return int(np.unique(self.labels).size)

    def check_pairs_with(self, X: DataMatrix) -> None:
        if self.labels.size != X.n:
            raise DataError(
                f"label count {self.labels.size} does not match sample count {X.n}"
            )


_DELIMITERS = {"csv": ",", "tsv": "\t", "dense-text": None}


def _is_number(token: str) -> bool:
    try:
        float(token)
    except ValueError:
        return False
    return True


def _split(line: str, delimiter):
    if delimiter is None:
        return line.split()
    return [tok.strip() for tok in line.split(delimiter)]


def load_matrix(path, format: str | None = None) -> DataMatrix:
    """Parse a delimited text file into a :class:`DataMatrix`.

    ``format`` is one of ``csv``, ``tsv`` or ``dense-text`` (whitespace
    separated). When omitted it is inferred from the file extension. A
    first line with any non-numeric cell is treated as a header.
    """
    if format is None:
        ext = os.path.splitext(str(path))[1].lower()
        format = {".csv": "csv", ".tsv": "tsv"}.get(ext, "dense-text")
    if format not in _DELIMITERS:
        raise DataError(f"unknown matrix format {format!r}")
    delimiter = _DELIMITERS[format]

    with open(path, encoding="utf-8") as fh:
        lines = [(i + 1, ln.rstrip("\r\n")) for i, ln in enumerate(fh)]
    lines = [(no, ln) for no, ln in lines if ln.strip()]
    if not lines:
        raise DataError("no rows")

    first = _split(lines[0][1], delimiter)
    if not all(_is_number(tok) for tok in first):
        lines = lines[1:]
        if not lines:
            raise DataError("no rows")

    rows = []
    width = None
    for lineno, line in lines:
        cells = _split(line, delimiter)
        if width is None:
            width = len(cells)
        elif len(cells) != width:
            raise DataError(f"ragged row at line {lineno}: expected {width} cells, got {len(cells)}")
        row = []
        for col, tok in enumerate(cells, start=1):
            try:
                row.append(float(tok))
            except ValueError:
                raise DataError(f"non-numeric cell {tok!r} at line {lineno}, column {col}") from None
        rows.append(row)
    return DataMatrix(np.array(rows, dtype=float))


def load_labels(path) -> LabelVector:
    """Read one label token per line; tokens are densely re-indexed."""
    with open(path, encoding="utf-8") as fh:
        tokens = [ln.strip() for ln in fh if ln.strip()]
    if not tokens:
        raise DataError("empty label file")
    index: dict[str, int] = {}
    labels = [index.setdefault(tok, len(index)) for tok in tokens]
    return LabelVector(np.array(labels), names=tuple(index))


def scale_features(X: DataMatrix) -> DataMatrix:
    """Min-max scale every column to [0, 1]; constant columns become zeros."""
    values = X.values
    lo = values.min(axis=0)
    span = values.max(axis=0) - lo
    out = np.zeros_like(values)
    nonconst = span > 0
    out[:, nonconst] = (values[:, nonconst] - lo[nonconst]) / span[nonconst]
    return DataMatrix(out)
