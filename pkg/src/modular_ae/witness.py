"""Constructive demonstrations of the diversity-weight dichotomy.

For lam <= 1 the objective is a convex combination of two nonnegative error
terms and can never go below zero. For lam > 1 there are two-module
ensembles, built from a single data-aligned rank-one direction at opposing
scales, whose objective falls like -q^4 while both the ensemble error and
the average individual error blow up. A separate check probes the
per-module boundary at M/(M-1), where the quadratic coefficient
1 - lam*(M-1)/M changes sign.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .backfit import top_eigenvectors
from .core import AEModule, ModularAE
from .errors import ValidationError
from .loss import as_values, evaluate_loss
from .rng import SeededRNG

__all__ = [
    "build_divergent_ensemble",
    "verify_dichotomy",
    "per_module_boundary_check",
    "scale_coefficient",
    "WitnessRow",
    "DichotomyReport",
    "BoundaryScan",
]


def scale_coefficient(lam: float, num_modules: int) -> float:
    """1 - lam*(M-1)/M: the sign of the quadratic term when one module is scaled."""
    return 1.0 - lam * (num_modules - 1) / num_modules


def build_divergent_ensemble(
    dim: int,
    hidden_dim: int,
    num_modules: int,
    q: float,
    direction: np.ndarray,
    lam: float = 0.0,
) -> ModularAE:
    """Two opposed rank-one modules at scales q^2+q and -q^2, the rest zero.

    With d the given unit direction, module 1 realizes the product
    (q^2+q) d d^T and module 2 the product -q^2 d d^T, so the ensemble-mean
    map is (q/M) d d^T.
    """
    if num_modules < 2:
        raise ValidationError("the divergent construction needs at least 2 modules")
    if q < 1:
        raise ValidationError("q must be >= 1")
    d = np.asarray(direction, dtype=np.float64).reshape(-1)
    if d.shape[0] != dim:
        raise ValidationError(f"direction must have length D={dim}")
    norm = np.linalg.norm(d)
    if norm == 0:
        raise ValidationError("direction must be nonzero")
    d = d / norm

    def rank_one(scale: float) -> AEModule:
        a = np.zeros((dim, hidden_dim))
        b = np.zeros((hidden_dim, dim))
        a[:, 0] = scale * d
        b[0, :] = d
        return AEModule(a, b)

    zero = AEModule(np.zeros((dim, hidden_dim)), np.zeros((hidden_dim, dim)))
    modules = [rank_one(q * q + q), rank_one(-q * q)] + [zero] * (num_modules - 2)
    return ModularAE(tuple(modules), lam)


@dataclass(frozen=True)
class WitnessRow:
    q: float
    total: float
    ensemble_error: float
    avg_individual_error: float


@dataclass(frozen=True)
class DichotomyReport:
    """Evidence for one side of the lam <= 1 vs lam > 1 dichotomy.

    ``rows`` is filled on the divergent branch (lam > 1);
    ``min_sampled_total`` on the nonnegative branch (lam <= 1).
    """

    lam: float
    rows: tuple[WitnessRow, ...] | None = None
    min_sampled_total: float | None = None
    num_samples: int = 0

    @property
    def strictly_decreasing(self) -> bool:
        if not self.rows:
            return False
        totals = [r.total for r in self.rows]
        return all(b < a for a, b in zip(totals, totals[1:]))

    @property
    def nonnegative_certified(self) -> bool:
        return self.min_sampled_total is not None and self.min_sampled_total >= 0


def _principal_direction(x: np.ndarray) -> np.ndarray:
    return top_eigenvectors(x @ x.T, 1).vectors[:, 0]


def verify_dichotomy(
    X,
    lam: float,
    q_schedule: tuple[float, ...] = (10.0, 100.0, 1000.0),
    *,
    num_modules: int = 2,
    hidden_dim: int = 1,
    direction: np.ndarray | None = None,
    num_samples: int = 1000,
    seed: int = 0,
) -> DichotomyReport:
    """Probe the dichotomy at the given diversity weight.

    lam > 1: evaluate the divergent construction along ``q_schedule`` with the
    witness direction (default: the data's top principal direction, which
    guarantees a nonzero activation d^T X). lam <= 1: certify nonnegativity
    of the objective over a seeded sample of random ensembles.
    """
    x = as_values(X)
    if float(np.max(np.abs(x))) == 0.0:
        raise ValidationError("degenerate all-zero data")
    dim = x.shape[0]

    if lam > 1:
        d = _principal_direction(x) if direction is None else np.asarray(direction, float)
        d = d / np.linalg.norm(d)
        activation = float(np.linalg.norm(d @ x))
        if activation <= 1e-12 * np.linalg.norm(x):
            raise ValidationError(
                "witness direction is orthogonal to the data (d^T X = 0); "
                "the construction is inconclusive"
            )
        rows = []
        for q in q_schedule:
            model = build_divergent_ensemble(dim, hidden_dim, num_modules, q, d, lam=lam)
            breakdown = evaluate_loss(model, x)
            rows.append(
                WitnessRow(
                    q=float(q),
                    total=breakdown.total,
                    ensemble_error=breakdown.ensemble_error,
                    avg_individual_error=breakdown.avg_individual_error,
                )
            )
        return DichotomyReport(lam=lam, rows=tuple(rows))

    rng = SeededRNG(seed)
    scales = (0.1, 1.0, 10.0)
    worst = np.inf
    for k in range(num_samples):
        scale = scales[k % len(scales)]
        modules = tuple(
            AEModule(rng.normal((dim, hidden_dim)) * scale, rng.normal((hidden_dim, dim)) * scale)
            for _ in range(num_modules)
        )
        total = evaluate_loss(ModularAE(modules, lam), x).total
        worst = min(worst, total)
    return DichotomyReport(lam=lam, min_sampled_total=worst, num_samples=num_samples)


@dataclass(frozen=True)
class BoundaryScan:
    """Objective values as one module's product is scaled up at a fixed lam."""

    lam: float
    scales: tuple[float, ...]
    base_total: float
    scaled_totals: tuple[float, ...]

    @property
    def grows_beyond_start(self) -> bool:
        return all(t > self.base_total for t in self.scaled_totals)

    @property
    def strictly_decreasing(self) -> bool:
        series = (self.base_total,) + self.scaled_totals
        return all(b < a for a, b in zip(series, series[1:]))


def per_module_boundary_check(
    X,
    num_modules: int,
    lambdas: tuple[float, ...],
    *,
    scales: tuple[float, ...] = (10.0, 100.0, 1000.0),
    hidden_dim: int = 1,
    seed: int = 0,
) -> tuple[BoundaryScan, ...]:
    """Scale module 0 of a fixed random ensemble and record the objective.

    Below the boundary M/(M-1) the quadratic coefficient is positive and the
    objective eventually grows with the scale; above it, it falls without
    bound. The base ensemble uses unit-scale entries so the scale schedule
    starts beyond the parabola's vertex.
    """
    x = as_values(X)
    dim = x.shape[0]
    rng = SeededRNG(seed)
    base = [
        (rng.normal((dim, hidden_dim)), rng.normal((hidden_dim, dim)))
        for _ in range(num_modules)
    ]

    scans = []
    for lam in lambdas:
        modules = tuple(AEModule(a, b) for a, b in base)
        model = ModularAE(modules, lam)
        base_total = evaluate_loss(model, x).total
        totals = []
        for s in scales:
            scaled = (AEModule(base[0][0] * s, base[0][1]),) + modules[1:]
            totals.append(evaluate_loss(ModularAE(scaled, lam), x).total)
        scans.append(
            BoundaryScan(
                lam=float(lam),
                scales=tuple(float(s) for s in scales),
                base_total=base_total,
                scaled_totals=tuple(totals),
            )
        )
    return tuple(scans)
