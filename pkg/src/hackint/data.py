"""Tabular data container and CSV ingestion."""

from __future__ import annotations

import csv
import logging
from dataclasses import dataclass, field
from pathlib import Path
from typing import Sequence

import numpy as np

from .errors import DimensionMismatch, EmptyAfterFiltering, MissingColumn, NonNumericCell

logger = logging.getLogger(__name__)


@dataclass
class Dataset:
    """Covariates ``x`` (n x p), outcomes ``y`` (n,), optional binary treatment ``w``."""

    x: np.ndarray
    y: np.ndarray
    w: np.ndarray | None = None
    names: list[str] = field(default_factory=list)
    dropped_rows: int = 0

    def __post_init__(self):
        self.x = np.asarray(self.x, dtype=float)
        if self.x.ndim == 1:
            self.x = self.x[:, None]
        self.y = np.asarray(self.y, dtype=float).ravel()
        if self.x.ndim != 2:
            raise DimensionMismatch("x must be a 2-d array")
        n, p = self.x.shape
        if n < 1 or p < 1:
            raise DimensionMismatch(f"need n >= 1 and p >= 1, got shape {self.x.shape}")
        if self.y.shape[0] != n:
            raise DimensionMismatch(f"x has {n} rows but y has {self.y.shape[0]}")
        if self.w is not None:
            self.w = np.asarray(self.w, dtype=float).ravel()
            if self.w.shape[0] != n:
                raise DimensionMismatch(f"x has {n} rows but w has {self.w.shape[0]}")
            if not np.all((self.w == 0) | (self.w == 1)):
                raise DimensionMismatch("treatment entries must be 0 or 1")
        for label, arr in (("x", self.x), ("y", self.y), ("w", self.w)):
            if arr is not None and not np.all(np.isfinite(arr)):
                raise DimensionMismatch(f"{label} contains non-finite entries")
        if not self.names:
            self.names = [f"x{j}" for j in range(p)]
        elif len(self.names) != p:
            raise DimensionMismatch(f"{len(self.names)} names for {p} columns")

    @property
    def n(self) -> int:
        return self.x.shape[0]

    @property
    def p(self) -> int:
        return self.x.shape[1]

    def split_by_treatment(self) -> tuple["Dataset", "Dataset"]:
        """Return (treated, control) sub-datasets."""
        if self.w is None:
            raise DimensionMismatch("dataset has no treatment column")
        mask = self.w == 1
        treated = Dataset(self.x[mask], self.y[mask], names=list(self.names))
        control = Dataset(self.x[~mask], self.y[~mask], names=list(self.names))
        return treated, control


def _parse(cell: str, row: int, column: str) -> float:
    try:
        value = float(cell)
    except ValueError:
        raise NonNumericCell(f"row {row}, column {column!r}: cannot parse {cell!r} as a number", row, column) from None
    if not np.isfinite(value):
        raise NonNumericCell(f"row {row}, column {column!r}: non-finite value {cell!r}", row, column)
    return value


def read_columns(
    path: str | Path, columns: Sequence[str], binary: Sequence[str] = ()
) -> tuple[dict[str, np.ndarray], int]:
    """Read the named numeric columns from a headed UTF-8 CSV.

    Rows with an empty cell in any requested column are dropped. Returns the
    column arrays and the number of dropped rows. Row numbers in errors are
    1-based file lines (the header is line 1).
    """
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        try:
            header = [h.strip() for h in next(reader)]
        except StopIteration:
            raise EmptyAfterFiltering(f"{path} is empty") from None
        index = {}
        for name in columns:
            if name not in header:
                raise MissingColumn(f"column {name!r} not found in {path}; available: {', '.join(header)}")
            index[name] = header.index(name)
        values: dict[str, list[float]] = {name: [] for name in columns}
        dropped = 0
        for lineno, record in enumerate(reader, start=2):
            if not record or all(not c.strip() for c in record):
                continue
            cells = {}
            missing = False
            for name, j in index.items():
                cell = record[j].strip() if j < len(record) else ""
                if cell == "":
                    missing = True
                    break
                cells[name] = cell
            if missing:
                dropped += 1
                continue
            for name, cell in cells.items():
                value = _parse(cell, lineno, name)
                if name in binary and value not in (0.0, 1.0):
                    raise NonNumericCell(
                        f"row {lineno}, column {name!r}: treatment must be 0 or 1, got {cell!r}", lineno, name
                    )
                values[name].append(value)
    if dropped:
        logger.warning("dropped %d row(s) with missing values in %s", dropped, path)
    arrays = {name: np.asarray(v, dtype=float) for name, v in values.items()}
    if not columns or arrays[columns[0]].size == 0:
        raise EmptyAfterFiltering(f"no complete rows left in {path}")
    return arrays, dropped


def ingest_csv(
    path: str | Path,
    outcome: str,
    features: Sequence[str],
    treatment: str | None = None,
) -> Dataset:
    """Load a :class:`Dataset` from a CSV file using explicit column bindings."""
    cols = [outcome, *features] + ([treatment] if treatment else [])
    # a column may be bound twice (e.g. outcome also listed as a feature)
    unique = list(dict.fromkeys(cols))
    arrays, dropped = read_columns(path, unique, binary=[treatment] if treatment else ())
    w = arrays[treatment] if treatment else None
    x = np.column_stack([arrays[f] for f in features]) if features else np.empty((arrays[outcome].size, 0))
    return Dataset(x, arrays[outcome], w, names=list(features), dropped_rows=dropped)
