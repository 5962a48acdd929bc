"""Dataset ingestion, column standardization and synthetic generators.

All matrices are dense row-major float64. Standardization uses the
population convention (std over n, not n-1) everywhere; constant columns
become all-zero instead of raising because real tabular data routinely
contains them.
"""
from __future__ import annotations

import csv
import math
from dataclasses import dataclass
from typing import Optional, Union

import numpy as np

from .errors import DataError
from .rng import stream


@dataclass
class Dataset:
    """A numeric table with optional per-row integer labels."""

    features: np.ndarray
    labels: Optional[np.ndarray] = None
    feature_names: Optional[list] = None

    def __post_init__(self):
        feats = np.ascontiguousarray(np.asarray(self.features, dtype=np.float64))
        if feats.ndim != 2 or feats.shape[0] < 1 or feats.shape[1] < 1:
            raise DataError(
                f"features must be a non-empty 2-D matrix, got shape {np.shape(self.features)}"
            )
        if not np.all(np.isfinite(feats)):
            raise DataError("features contain non-finite values")
        self.features = feats
        if self.labels is not None:
            labels = np.asarray(self.labels, dtype=np.int64)
            if labels.shape != (feats.shape[0],):
                raise DataError(
                    f"labels must have length {feats.shape[0]}, got shape {labels.shape}"
                )
            self.labels = labels
        if self.feature_names is not None:
            names = [str(c) for c in self.feature_names]
            if len(names) != feats.shape[1]:
                raise DataError(
                    f"feature_names must have length {feats.shape[1]}, got {len(names)}"
                )
            self.feature_names = names

    @property
    def n(self) -> int:
        return self.features.shape[0]

    @property
    def d(self) -> int:
        return self.features.shape[1]


@dataclass
class StandardizeParams:
    """Per-column means and stds; stds of constant columns are stored as 1."""

    means: np.ndarray
    stds: np.ndarray


def _parse_cell(cell: str, row: int, col_name: str) -> float:
    try:
        value = float(cell)
    except ValueError:
        raise DataError(
            f"non-numeric cell {cell!r} at row {row}, column {col_name}"
        ) from None
    if not math.isfinite(value):
        raise DataError(f"non-finite cell {cell!r} at row {row}, column {col_name}")
    return value


def load_csv(
    path,
    label_column: Union[str, int, None] = None,
    has_header: bool = True,
) -> Dataset:
    """Read a comma-delimited numeric table.

    `label_column` selects the label column by header name or 0-based index;
    when given, that column is extracted into integer labels. Rows keep
    their file order. Error messages name the offending row (1-based file
    line) and column.
    """
    try:
        with open(path, "r", newline="", encoding="utf-8") as fh:
            rows = list(csv.reader(fh))
    except OSError as err:
        raise DataError(f"cannot read {path}: {err}") from err

    header: Optional[list] = None
    first_data_line = 1
    if has_header:
        if not rows:
            raise DataError(f"{path} is empty")
        header = [c.strip() for c in rows[0]]
        rows = rows[1:]
        first_data_line = 2
    if not rows:
        raise DataError(f"{path} has no data rows")

    width = len(rows[0])
    label_idx: Optional[int] = None
    if label_column is not None:
        if isinstance(label_column, str) and not label_column.lstrip("-").isdigit():
            if header is None:
                raise DataError("label column given by name but file has no header")
            if label_column not in header:
                raise DataError(f"label column {label_column!r} not found in header {header}")
            label_idx = header.index(label_column)
        else:
            label_idx = int(label_column)
            if not 0 <= label_idx < width:
                raise DataError(f"label column index {label_idx} out of range for {width} columns")

    def col_name(idx: int) -> str:
        if header is not None:
            return repr(header[idx])
        return str(idx)

    features = np.empty((len(rows), width - (0 if label_idx is None else 1)))
    labels = np.empty(len(rows), dtype=np.int64) if label_idx is not None else None
    for r, cells in enumerate(rows):
        line = first_data_line + r
        if len(cells) != width:
            raise DataError(f"ragged row {line}: expected {width} cells, got {len(cells)}")
        c_out = 0
        for c, cell in enumerate(cells):
            value = _parse_cell(cell.strip(), line, col_name(c))
            if c == label_idx:
                if value != int(value):
                    raise DataError(
                        f"label cell {cell!r} at row {line} is not an integer"
                    )
                labels[r] = int(value)
            else:
                features[r, c_out] = value
                c_out += 1

    names = None
    if header is not None:
        names = [h for i, h in enumerate(header) if i != label_idx]
    return Dataset(features=features, labels=labels, feature_names=names)


def write_csv(data: Dataset, path) -> None:
    """Write a Dataset so that `load_csv` round-trips it exactly.

    Floats are written with shortest round-trip repr; a label column named
    "label" is appended when labels are present.
    """
    names = data.feature_names or [f"c{i}" for i in range(data.d)]
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(names + (["label"] if data.labels is not None else []))
        for r in range(data.n):
            row = [repr(float(v)) for v in data.features[r]]
            if data.labels is not None:
                row.append(str(int(data.labels[r])))
            writer.writerow(row)


def standardize(data: Dataset) -> tuple[Dataset, StandardizeParams]:
    """Shift and scale every column to mean 0, population std 1.

    Constant columns become all zeros (std stored as 1 so un-applying is
    still exact).
    """
    X = data.features
    const = X.max(axis=0) == X.min(axis=0)
    means = X.mean(axis=0)
    means[const] = X[0, const]  # exact value, so round-trip is bit-clean
    stds = X.std(axis=0)
    stds[const] = 1.0
    out = (X - means) / stds
    out[:, const] = 0.0
    params = StandardizeParams(means=means, stds=stds)
    return Dataset(out, labels=data.labels, feature_names=data.feature_names), params


def unstandardize(data: Dataset, params: StandardizeParams) -> Dataset:
    """Invert `standardize`."""
    X = data.features * params.stds + params.means
    return Dataset(X, labels=data.labels, feature_names=data.feature_names)


def synth_blobs(k: int, per_cluster: int, d: int, spread: float = 1.0, seed: int = 0) -> Dataset:
    """Gaussian clusters with centers >= 12*spread apart pairwise.

    Centers sit on a lattice rotated by a random orthogonal matrix, so the
    between-cluster structure is spread over all coordinates instead of a
    few (a pure lattice loses its separation to per-column
    standardization). Rows are cluster-major; labels are the cluster ids
    0..k-1.
    """
    if k < 1 or per_cluster < 1 or d < 1:
        raise ValueError(f"k, per_cluster and d must be positive, got {k}, {per_cluster}, {d}")
    if spread <= 0:
        raise ValueError(f"spread must be positive, got {spread}")
    side = 1
    while side**d < k:
        side += 1
    centers = np.zeros((k, d))
    for i in range(k):
        digits, rest = [], i
        for _ in range(d):
            digits.append(rest % side)
            rest //= side
        centers[i] = np.asarray(digits, dtype=np.float64) * (12.0 * spread)
    rng = stream(seed)
    rotation, _ = np.linalg.qr(rng.standard_normal((d, d)))
    centers = centers @ rotation.T
    feats = np.repeat(centers, per_cluster, axis=0) + spread * rng.standard_normal(
        (k * per_cluster, d)
    )
    labels = np.repeat(np.arange(k), per_cluster)
    return Dataset(feats, labels=labels)


def synth_anomaly(n_normal: int, n_anomaly: int, d: int, seed: int = 0) -> Dataset:
    """Standard-Gaussian normals plus anomalies on a distant shell.

    The shell starts at least six per-coordinate standard deviations from
    the origin and, for moderate d, six norm-standard-deviations beyond the
    bulk radius sqrt(d), so every anomaly outranks every normal in norm
    with overwhelming probability. Labels: 1 = anomaly, 0 = normal; rows
    are normals first.
    """
    if n_normal < 1 or d < 1:
        raise ValueError(f"n_normal and d must be positive, got {n_normal}, {d}")
    if n_anomaly < 0 or n_anomaly >= n_normal:
        raise ValueError(f"need 0 <= n_anomaly < n_normal, got {n_anomaly} vs {n_normal}")
    rng = stream(seed)
    normals = rng.standard_normal((n_normal, d))
    lo = max(6.0, math.sqrt(d) + 6.0 / math.sqrt(2.0))
    hi = lo + 2.0 / math.sqrt(2.0)
    directions = rng.standard_normal((n_anomaly, d))
    norms = np.linalg.norm(directions, axis=1, keepdims=True)
    norms[norms == 0] = 1.0
    radii = rng.uniform(lo, hi, size=(n_anomaly, 1))
    anomalies = directions / norms * radii
    feats = np.vstack([normals, anomalies])
    labels = np.concatenate([np.zeros(n_normal, dtype=np.int64), np.ones(n_anomaly, dtype=np.int64)])
    return Dataset(feats, labels=labels)
