"""Dataset CSV ingestion and export.

Format: header row; a column named `label` holding 0/1 comes first,
every other column is a numeric feature. Comma delimiter, `.` decimal
point. Floats are written with 17 significant digits, which round-trips
float64 exactly.
"""

from __future__ import annotations

import csv
from pathlib import Path

import numpy as np

from .core import Dataset
from .errors import DataFormatError

__all__ = ["load_csv", "save_csv"]


def load_csv(path) -> Dataset:
    """Read a dataset, reporting the offending row on any malformed cell."""
    path = Path(path)
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise DataFormatError(f"{path}: file is empty") from None
        header = [h.strip() for h in header]
        if "label" not in header:
            raise DataFormatError(f"{path}: no column named 'label' in the header")
        label_col = header.index("label")
        feature_names = tuple(h for i, h in enumerate(header) if i != label_col)
        if not feature_names:
            raise DataFormatError(f"{path}: no feature columns besides 'label'")
        labels: list[int] = []
        rows: list[list[float]] = []
        for line_no, row in enumerate(reader, start=2):
            if not row:
                continue
            if len(row) != len(header):
                raise DataFormatError(
                    f"{path}: row {line_no} has {len(row)} cells, expected {len(header)}"
                )
            raw_label = row[label_col].strip()
            if raw_label not in ("0", "1"):
                raise DataFormatError(
                    f"{path}: row {line_no} has label {raw_label!r}, expected 0 or 1"
                )
            labels.append(int(raw_label))
            values = []
            for i, cell in enumerate(row):
                if i == label_col:
                    continue
                try:
                    v = float(cell)
                except ValueError:
                    raise DataFormatError(
                        f"{path}: row {line_no} has non-numeric value {cell.strip()!r} "
                        f"in column {header[i]!r}"
                    ) from None
                if not np.isfinite(v):
                    raise DataFormatError(
                        f"{path}: row {line_no} has non-finite value in column {header[i]!r}"
                    )
                values.append(v)
            rows.append(values)
        if not rows:
            raise DataFormatError(f"{path}: no data rows")
        try:
            return Dataset(
                features=np.asarray(rows, dtype=np.float64),
                labels=np.asarray(labels, dtype=np.int64),
                feature_names=feature_names,
            )
        except ValueError as exc:
            raise DataFormatError(f"{path}: {exc}") from exc


def save_csv(dataset: Dataset, path) -> None:
    """Write a dataset in the loadable format (label column first)."""
    path = Path(path)
    names = dataset.feature_names or tuple(f"f{i + 1}" for i in range(dataset.p))
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(("label",) + names)
        for i in range(dataset.n):
            writer.writerow(
                [str(int(dataset.labels[i]))] + [f"{v:.17g}" for v in dataset.features[i]]
            )
