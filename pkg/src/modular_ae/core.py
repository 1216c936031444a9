"""Domain types and the versioned JSON model persistence format.

All types are immutable after construction (frozen dataclasses holding
read-only arrays), so they are safe to share across threads.
"""

from __future__ import annotations

import json
import math
import os
from dataclasses import dataclass

import numpy as np

from .errors import ValidationError

FORMAT_NAME = "modular-ae"
FORMAT_VERSION = 1

__all__ = [
    "DataMatrix",
    "AEModule",
    "ModularAE",
    "TrainConfig",
    "TrainReport",
    "save_model",
    "load_model",
    "model_document",
    "lambda_upper_bound",
]


def lambda_upper_bound(num_modules: int) -> float:
    """Supremum of admissible per-module diversity weights, M / (M - 1)."""
    if num_modules <= 1:
        return math.inf
    return num_modules / (num_modules - 1)


def _frozen_array(values, dtype=np.float64) -> np.ndarray:
    arr = np.array(values, dtype=dtype)
    arr.setflags(write=False)
    return arr


def _set(obj, name, value) -> None:
    object.__setattr__(obj, name, value)


@dataclass(frozen=True)
class DataMatrix:
    """D x N collection of feature vectors: features are rows, examples columns.

    ``labels`` optionally attaches one integer class per column.
    ``feature_means`` records centering offsets that were subtracted from each
    feature row; when present, every row must sum to (numerically) zero.
    """

    values: np.ndarray
    labels: np.ndarray | None = None
    feature_means: np.ndarray | None = None

    def __post_init__(self):
        values = _frozen_array(self.values)
        if values.ndim != 2:
            raise ValidationError(f"values must be a 2-D matrix, got ndim={values.ndim}")
        d, n = values.shape
        if d < 1 or n < 1:
            raise ValidationError(f"values must be at least 1x1, got {d}x{n}")
        if not np.all(np.isfinite(values)):
            raise ValidationError("values contain non-finite entries")
        _set(self, "values", values)

        if self.labels is not None:
            labels = np.asarray(self.labels)
            if labels.dtype.kind == "f":
                if not np.all(labels == np.floor(labels)):
                    raise ValidationError("labels must be integers")
            labels = _frozen_array(labels, dtype=np.int64)
            if labels.shape != (n,):
                raise ValidationError(f"labels must have length N={n}, got shape {labels.shape}")
            _set(self, "labels", labels)

        if self.feature_means is not None:
            means = _frozen_array(self.feature_means)
            if means.shape != (d,):
                raise ValidationError(f"feature_means must have length D={d}, got shape {means.shape}")
            if not np.all(np.isfinite(means)):
                raise ValidationError("feature_means contain non-finite entries")
            row_sums = np.abs(values.sum(axis=1))
            row_caps = 1e-9 * n * np.max(np.abs(values), axis=1)
            if np.any(row_sums > row_caps):
                worst = int(np.argmax(row_sums - row_caps))
                raise ValidationError(
                    f"feature_means is set but row {worst} is not centered "
                    f"(|sum|={row_sums[worst]:.3e})"
                )
            _set(self, "feature_means", means)

    @property
    def dim(self) -> int:
        return self.values.shape[0]

    @property
    def num_examples(self) -> int:
        return self.values.shape[1]


@dataclass(frozen=True)
class AEModule:
    """One decoder/encoder pair: A maps codes up to R^D, B maps inputs down to R^P."""

    A: np.ndarray
    B: np.ndarray

    def __post_init__(self):
        a = _frozen_array(self.A)
        b = _frozen_array(self.B)
        if a.ndim != 2 or b.ndim != 2:
            raise ValidationError("A and B must be 2-D matrices")
        d, p = a.shape
        if b.shape != (p, d):
            raise ValidationError(f"B must be {p}x{d} to match A of shape {d}x{p}, got {b.shape}")
        if not (1 <= p < d):
            raise ValidationError(f"hidden dimension must satisfy 1 <= P < D, got P={p}, D={d}")
        if not (np.all(np.isfinite(a)) and np.all(np.isfinite(b))):
            raise ValidationError("module matrices contain non-finite entries")
        _set(self, "A", a)
        _set(self, "B", b)

    @property
    def dim(self) -> int:
        return self.A.shape[0]

    @property
    def hidden_dim(self) -> int:
        return self.A.shape[1]

    def product(self) -> np.ndarray:
        """The D x D reconstruction map A @ B."""
        return self.A @ self.B


@dataclass(frozen=True)
class ModularAE:
    """Ensemble of M shape-consistent autoencoder modules plus the diversity weight."""

    modules: tuple[AEModule, ...]
    lam: float

    def __post_init__(self):
        modules = tuple(self.modules)
        if len(modules) < 1:
            raise ValidationError("a ModularAE needs at least one module")
        d, p = modules[0].dim, modules[0].hidden_dim
        for k, mod in enumerate(modules):
            if (mod.dim, mod.hidden_dim) != (d, p):
                raise ValidationError(
                    f"module {k} has shape (D={mod.dim}, P={mod.hidden_dim}), expected ({d}, {p})"
                )
        lam = float(self.lam)
        if not math.isfinite(lam):
            raise ValidationError("lambda must be finite")
        _set(self, "modules", modules)
        _set(self, "lam", lam)

    @property
    def num_modules(self) -> int:
        return len(self.modules)

    @property
    def dim(self) -> int:
        return self.modules[0].dim

    @property
    def hidden_dim(self) -> int:
        return self.modules[0].hidden_dim


@dataclass(frozen=True)
class TrainConfig:
    """Solver hyperparameters shared by the backfitting and gradient solvers.

    ``learning_rate`` applies to the gradient solver only; ``None`` selects a
    step scaled to the data's per-example second-moment spectrum.
    """

    lam: float
    num_modules: int
    hidden_dim: int
    max_epochs: int = 200
    tolerance: float = 1e-5
    seed: int = 0
    learning_rate: float | None = None

    def __post_init__(self):
        if self.num_modules < 1:
            raise ValidationError("num_modules must be >= 1")
        if self.hidden_dim < 1:
            raise ValidationError("hidden_dim must be >= 1")
        if self.max_epochs < 1:
            raise ValidationError("max_epochs must be >= 1")
        if not (self.tolerance > 0):
            raise ValidationError("tolerance must be > 0")
        if self.learning_rate is not None and not (self.learning_rate > 0):
            raise ValidationError("learning_rate must be > 0 when given")
        bound = lambda_upper_bound(self.num_modules)
        if not (0 <= self.lam < bound) or not math.isfinite(self.lam):
            raise ValidationError(
                f"lambda must lie in [0, M/(M-1)) = [0, {bound:g}) for M={self.num_modules}, "
                f"got {self.lam}"
            )


@dataclass(frozen=True)
class TrainReport:
    """Per-epoch objective trace and timing for one solver run."""

    error_trace: tuple[float, ...]
    epochs_run: int
    wall_time_seconds: float
    converged: bool

    def __post_init__(self):
        trace = tuple(float(e) for e in self.error_trace)
        if len(trace) != self.epochs_run:
            raise ValidationError(
                f"error_trace has {len(trace)} entries but epochs_run={self.epochs_run}"
            )
        if any(not math.isfinite(e) for e in trace):
            raise ValidationError("error_trace contains non-finite entries")
        _set(self, "error_trace", trace)

    @property
    def final_error(self) -> float:
        if not self.error_trace:
            raise ValidationError("empty error trace has no final error")
        return self.error_trace[-1]


def _validate_model(model: ModularAE) -> None:
    # Re-run the dataclass checks; catches models mutated past construction.
    ModularAE.__post_init__(model)


def model_document(model: ModularAE) -> dict:
    """The version-1 JSON document for a model.

    Matrices are nested row-major lists of floats; ``json`` renders each with
    Python's shortest round-trip decimal representation, so loading the
    document reproduces every entry bit-exactly at double precision.
    """
    _validate_model(model)
    return {
        "format": FORMAT_NAME,
        "version": FORMAT_VERSION,
        "dim": model.dim,
        "hidden": model.hidden_dim,
        "num_modules": model.num_modules,
        "lambda": model.lam,
        "modules": [
            {"A": mod.A.tolist(), "B": mod.B.tolist()} for mod in model.modules
        ],
    }


def save_model(model: ModularAE, destination) -> dict:
    """Write the versioned JSON document to a path or writable file object."""
    doc = model_document(model)
    text = json.dumps(doc, indent=1, allow_nan=False)
    if hasattr(destination, "write"):
        destination.write(text)
    else:
        with open(os.fspath(destination), "w", encoding="utf-8") as fh:
            fh.write(text)
    return doc


def _reject_constant(token: str):
    raise ValidationError(f"non-finite constant {token!r} in model document")


def load_model(source) -> ModularAE:
    """Load a version-1 model document from a path, file object, or JSON string."""
    if hasattr(source, "read"):
        text = source.read()
    elif isinstance(source, str) and source.lstrip().startswith("{"):
        text = source
    else:
        with open(os.fspath(source), "r", encoding="utf-8") as fh:
            text = fh.read()
    if isinstance(text, bytes):
        text = text.decode("utf-8")

    try:
        doc = json.loads(text, parse_constant=_reject_constant)
    except json.JSONDecodeError as exc:
        raise ValidationError(f"malformed model document: {exc}") from exc
    if not isinstance(doc, dict):
        raise ValidationError("model document must be a JSON object")
    if doc.get("format") != FORMAT_NAME:
        raise ValidationError(f"not a {FORMAT_NAME} document (format={doc.get('format')!r})")
    if doc.get("version") != FORMAT_VERSION:
        raise ValidationError(f"unsupported document version {doc.get('version')!r}")

    try:
        d = int(doc["dim"])
        p = int(doc["hidden"])
        m = int(doc["num_modules"])
        lam = float(doc["lambda"])
        raw_modules = doc["modules"]
    except (KeyError, TypeError, ValueError) as exc:
        raise ValidationError(f"malformed model document: {exc}") from exc
    if not isinstance(raw_modules, list) or len(raw_modules) != m:
        raise ValidationError(
            f"document declares {m} modules but carries "
            f"{len(raw_modules) if isinstance(raw_modules, list) else 'no'} module entries"
        )

    modules = []
    for k, entry in enumerate(raw_modules):
        try:
            a = np.array(entry["A"], dtype=np.float64)
            b = np.array(entry["B"], dtype=np.float64)
        except (KeyError, TypeError, ValueError) as exc:
            raise ValidationError(f"module {k} is malformed: {exc}") from exc
        if a.ndim != 2 or a.shape != (d, p):
            raise ValidationError(f"module {k}: A has shape {a.shape}, expected ({d}, {p})")
        if b.ndim != 2 or b.shape != (p, d):
            raise ValidationError(f"module {k}: B has shape {b.shape}, expected ({p}, {d})")
        modules.append(AEModule(a, b))
    return ModularAE(tuple(modules), lam)
