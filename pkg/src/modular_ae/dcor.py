"""Distance-correlation diagnostics for sets of feature extractors.

Distance correlation is computed from double-centered pairwise Euclidean
distance matrices (the classical biased sample estimator): it is 1 when two
point sets share their metric structure up to isometry and uniform scaling,
and near 0 for independent samples. Fidelity measures how well each
extractor preserves the input metric structure; pairwise correlation
measures how similar two extractors' structures are to each other.
"""

from __future__ import annotations

from dataclasses import dataclass
from itertools import combinations
from typing import Sequence

import numpy as np
from scipy.spatial.distance import cdist

from .core import ModularAE
from .errors import ValidationError
from .loss import as_values
from .rng import SeededRNG

__all__ = [
    "distance_correlation",
    "fidelity_series",
    "pairwise_diversity_series",
    "dcor_report",
    "DCorReport",
]

DVAR_FLOOR = 1e-14
DEFAULT_SUBSAMPLE = 1000


def _centered_distances(points: np.ndarray) -> np.ndarray:
    dist = cdist(points.T, points.T)
    row = dist.mean(axis=1, keepdims=True)
    col = dist.mean(axis=0, keepdims=True)
    return dist - row - col + dist.mean()


def distance_correlation(U, V) -> float:
    """Distance correlation in [0, 1] between two paired column sets.

    Returns 0 when either marginal distance variance is numerically zero
    (all points of one set coincide).
    """
    u = np.atleast_2d(np.asarray(U, dtype=np.float64))
    v = np.atleast_2d(np.asarray(V, dtype=np.float64))
    if u.shape[1] != v.shape[1]:
        raise ValidationError("U and V must have the same number of columns")
    if u.shape[1] < 2:
        raise ValidationError("distance correlation needs at least 2 points")
    if not (np.all(np.isfinite(u)) and np.all(np.isfinite(v))):
        raise ValidationError("inputs contain non-finite entries")
    n2 = u.shape[1] ** 2
    a = _centered_distances(u)
    b = _centered_distances(v)
    dcov2 = float((a * b).sum()) / n2
    dvar_u = float(np.sqrt((a * a).sum() / n2))
    dvar_v = float(np.sqrt((b * b).sum() / n2))
    if dvar_u < DVAR_FLOOR or dvar_v < DVAR_FLOOR:
        return 0.0
    return float(np.sqrt(max(dcov2, 0.0)) / np.sqrt(dvar_u * dvar_v))


@dataclass(frozen=True)
class DCorReport:
    """Per-diversity-value fidelity and pairwise series at one subsample size."""

    lambdas: tuple[float, ...]
    avg_fidelity: tuple[float, ...]
    avg_pairwise: tuple[float, ...]
    subsample_size: int


def _subsample_columns(x: np.ndarray, subsample: int, seed: int) -> np.ndarray:
    n = x.shape[1]
    k = min(subsample, n)
    idx = SeededRNG(seed).subsample(n, k)
    return x[:, idx]


def fidelity_series(
    models: Sequence[ModularAE], X, subsample: int = DEFAULT_SUBSAMPLE, seed: int = 0
) -> list[float]:
    """Per model: average over modules of dcor(B_i X_s, X_s) on a seeded subsample.

    The same subsample is used for every model so the series is comparable
    along the grid.
    """
    x = _subsample_columns(as_values(X), subsample, seed)
    out = []
    for model in models:
        vals = [distance_correlation(mod.B @ x, x) for mod in model.modules]
        out.append(float(np.mean(vals)))
    return out


def pairwise_diversity_series(
    models: Sequence[ModularAE], X, subsample: int = DEFAULT_SUBSAMPLE, seed: int = 0
) -> list[float]:
    """Per model: average dcor(B_i X_s, B_j X_s) over unordered module pairs."""
    x = _subsample_columns(as_values(X), subsample, seed)
    out = []
    for model in models:
        if model.num_modules < 2:
            raise ValidationError("pairwise diversity needs at least 2 modules")
        codes = [mod.B @ x for mod in model.modules]
        vals = [distance_correlation(codes[i], codes[j]) for i, j in combinations(range(len(codes)), 2)]
        out.append(float(np.mean(vals)))
    return out


def dcor_report(
    models: Sequence[ModularAE], X, subsample: int = DEFAULT_SUBSAMPLE, seed: int = 0
) -> DCorReport:
    """Both series over a set of models (one per diversity value)."""
    x = as_values(X)
    return DCorReport(
        lambdas=tuple(model.lam for model in models),
        avg_fidelity=tuple(fidelity_series(models, x, subsample, seed)),
        avg_pairwise=tuple(pairwise_diversity_series(models, x, subsample, seed)),
        subsample_size=min(subsample, x.shape[1]),
    )
