"""Data ingestion, centering, synthetic mixtures, and resampling.

Everything here is a pure function of its inputs and a seed, so calls are
safe to run concurrently.
"""

from __future__ import annotations

import csv
import io
import math
import os
from dataclasses import dataclass

import numpy as np

from .core import DataMatrix
from .errors import DataError, ValidationError
from .rng import SeededRNG

__all__ = [
    "MixtureSpec",
    "FoldPlan",
    "load_csv",
    "save_csv",
    "center_features",
    "apply_offsets",
    "gaussian_mixture",
    "make_folds",
    "split",
    "bootstrap_sample",
    "train_test_split",
]


@dataclass(frozen=True)
class MixtureSpec:
    """Parameters of an equally weighted spherical Gaussian mixture."""

    num_clusters: int
    dim: int
    num_points: int
    cluster_std: float
    mean_scale: float = 1.0
    seed: int = 0

    def __post_init__(self):
        if self.num_clusters < 1:
            raise ValidationError("num_clusters must be >= 1")
        if self.dim < 1:
            raise ValidationError("dim must be >= 1")
        if self.num_points < self.num_clusters:
            raise ValidationError("num_points must be >= num_clusters")
        if not (self.cluster_std > 0):
            raise ValidationError("cluster_std must be > 0")
        if not (self.mean_scale >= 0 and math.isfinite(self.mean_scale)):
            raise ValidationError("mean_scale must be finite and >= 0")


@dataclass(frozen=True)
class FoldPlan:
    """Assignment of N examples to cross-validation folds."""

    num_folds: int
    assignments: np.ndarray
    seed: int

    def __post_init__(self):
        assignments = np.array(self.assignments, dtype=np.int64)
        assignments.setflags(write=False)
        if assignments.ndim != 1:
            raise ValidationError("assignments must be a 1-D vector")
        if np.any(assignments < 0) or np.any(assignments >= self.num_folds):
            raise ValidationError("assignments must lie in [0, num_folds)")
        counts = np.bincount(assignments, minlength=self.num_folds)
        if np.any(counts == 0):
            raise ValidationError("every fold must be nonempty")
        object.__setattr__(self, "assignments", assignments)

    @property
    def num_examples(self) -> int:
        return self.assignments.shape[0]


def _open_text(source):
    if hasattr(source, "read"):
        return source, False
    return open(os.fspath(source), "r", encoding="utf-8", newline=""), True


def _is_numeric_row(cells: list[str]) -> bool:
    for cell in cells:
        try:
            float(cell)
        except ValueError:
            return False
    return True


def load_csv(source, has_labels: bool = False) -> DataMatrix:
    """Read a CSV of examples-as-rows into a D x N DataMatrix.

    An optional header is detected by a non-numeric first row. When
    ``has_labels`` is set, the last column is read as an integer class label.
    Row indices in error messages are 1-based file lines (header included).
    """
    fh, owned = _open_text(source)
    try:
        rows = [(i + 1, row) for i, row in enumerate(csv.reader(fh)) if row]
    finally:
        if owned:
            fh.close()
    if rows and not _is_numeric_row(rows[0][1]):
        rows = rows[1:]  # header
    if not rows:
        raise DataError("no data rows in CSV input")

    width = len(rows[0][1])
    min_width = 2 if has_labels else 1
    if width < min_width:
        raise DataError(f"rows must have at least {min_width} columns, got {width}")

    values = np.empty((len(rows), width - (1 if has_labels else 0)))
    labels = np.empty(len(rows), dtype=np.int64) if has_labels else None
    for n, (line_no, row) in enumerate(rows):
        if len(row) != width:
            raise DataError(f"row {line_no}: expected {width} columns, got {len(row)}")
        try:
            parsed = [float(cell) for cell in row]
        except ValueError:
            bad = next(c for c in row if not _is_numeric_row([c]))
            raise DataError(f"row {line_no}: non-numeric cell {bad!r}") from None
        if has_labels:
            if not float(parsed[-1]).is_integer():
                raise DataError(f"row {line_no}: label {row[-1]!r} is not an integer")
            labels[n] = int(parsed[-1])
            parsed = parsed[:-1]
        values[n] = parsed
    return DataMatrix(values.T, labels=labels)


def save_csv(data: DataMatrix, destination) -> None:
    """Write examples-as-rows CSV; the label column is appended when present."""
    lines = []
    for n in range(data.num_examples):
        cells = [repr(float(v)) for v in data.values[:, n]]
        if data.labels is not None:
            cells.append(str(int(data.labels[n])))
        lines.append(",".join(cells))
    text = "\n".join(lines) + "\n"
    if hasattr(destination, "write"):
        destination.write(text)
    else:
        with open(os.fspath(destination), "w", encoding="utf-8", newline="") as fh:
            fh.write(text)


def center_features(data: DataMatrix) -> DataMatrix:
    """Shift every feature row to mean zero, accumulating the offsets.

    Idempotent up to floating-point roundoff: re-centering centered data
    subtracts row means that are already (numerically) zero.
    """
    offsets = data.values.mean(axis=1)
    prior = data.feature_means if data.feature_means is not None else np.zeros(data.dim)
    return DataMatrix(
        data.values - offsets[:, None],
        labels=data.labels,
        feature_means=prior + offsets,
    )


def apply_offsets(data: DataMatrix, offsets: np.ndarray) -> DataMatrix:
    """Subtract externally supplied offsets (e.g. train-fold means) from each row.

    The result carries no ``feature_means``: its rows are not centered on
    their own sample.
    """
    offsets = np.asarray(offsets, dtype=np.float64)
    if offsets.shape != (data.dim,):
        raise ValidationError(f"offsets must have length D={data.dim}")
    return DataMatrix(data.values - offsets[:, None], labels=data.labels)


def gaussian_mixture(spec: MixtureSpec) -> DataMatrix:
    """Sample an equally weighted spherical Gaussian mixture, labeled by cluster.

    Draw order (one stream seeded by ``spec.seed``): cluster means
    (K x D normals scaled by ``mean_scale``), then N uniform cluster
    assignments, then D x N unit normals scaled by ``cluster_std``.
    """
    rng = SeededRNG(spec.seed)
    k, d, n = spec.num_clusters, spec.dim, spec.num_points
    means = rng.normal((k, d)) * spec.mean_scale
    assignments = np.atleast_1d(rng.integers(k, size=n))
    noise = rng.normal((d, n)) * spec.cluster_std
    values = means[assignments].T + noise
    return DataMatrix(values, labels=assignments)


def make_folds(n: int, k: int, seed: int) -> FoldPlan:
    """Partition n examples into k folds whose sizes differ by at most one."""
    if k < 2:
        raise ValidationError("need at least 2 folds")
    if k > n:
        raise ValidationError(f"cannot make {k} folds from {n} examples")
    perm = SeededRNG(seed).permutation(n)
    assignments = np.empty(n, dtype=np.int64)
    assignments[perm] = np.arange(n) % k
    return FoldPlan(num_folds=k, assignments=assignments, seed=seed)


def _take_columns(data: DataMatrix, idx: np.ndarray) -> DataMatrix:
    # Column subsets lose sample centering, so feature_means is dropped.
    return DataMatrix(
        data.values[:, idx],
        labels=None if data.labels is None else data.labels[idx],
    )


def split(data: DataMatrix, plan: FoldPlan, fold_index: int) -> tuple[DataMatrix, DataMatrix]:
    """(train, test) column subsets for one fold of the plan."""
    if plan.num_examples != data.num_examples:
        raise ValidationError(
            f"plan covers {plan.num_examples} examples but data has {data.num_examples}"
        )
    if not (0 <= fold_index < plan.num_folds):
        raise ValidationError(f"fold_index must lie in [0, {plan.num_folds})")
    test_mask = plan.assignments == fold_index
    return _take_columns(data, np.nonzero(~test_mask)[0]), _take_columns(data, np.nonzero(test_mask)[0])


def bootstrap_sample(data: DataMatrix, seed: int) -> DataMatrix:
    """N columns drawn uniformly with replacement, labels carried along."""
    n = data.num_examples
    idx = np.atleast_1d(SeededRNG(seed).integers(n, size=n))
    return _take_columns(data, idx)


def train_test_split(
    data: DataMatrix, test_fraction: float = 0.2, seed: int = 0
) -> tuple[DataMatrix, DataMatrix]:
    """Random disjoint (train, test) split with the given test fraction."""
    if not (0 < test_fraction < 1):
        raise ValidationError("test_fraction must lie in (0, 1)")
    n = data.num_examples
    n_test = min(max(1, round(n * test_fraction)), n - 1)
    perm = SeededRNG(seed).permutation(n)
    return _take_columns(data, np.sort(perm[n_test:])), _take_columns(data, np.sort(perm[:n_test]))
