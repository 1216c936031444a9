"""Full-batch gradient-descent baseline on the ensemble objective.

The analytic gradient comes from the per-module residual
G_i = (A_i B_i X - X) - lam * (A_i B_i X - mean_j A_j B_j X); the deviations
from the ensemble mean sum to zero across modules, so no cross-module terms
survive. All modules step simultaneously from the same iterate. Per-example
negative-correlation-style updates correspond to stochastic descent on this
same objective at a rescaled step and are intentionally not provided.
"""

from __future__ import annotations

import time
from dataclasses import dataclass, replace

import numpy as np

from .core import AEModule, ModularAE, TrainConfig, TrainReport
from .data import MixtureSpec, gaussian_mixture
from .errors import NumericalError, ValidationError
from .loss import LossBreakdown, as_values, _breakdown, breakdown_from_products
from .backfit import fit_backfit, init_modules
from .rng import derive_seed

__all__ = [
    "GradientPair",
    "gradient",
    "fit_gd",
    "default_learning_rate",
    "BenchmarkReport",
    "benchmark_solvers",
]

DIVERGENCE_PATIENCE = 10  # consecutive rising epochs that count as divergence
MAX_BACKOFFS = 8


@dataclass(frozen=True)
class GradientPair:
    """Per-module objective gradients, matching the model's shapes."""

    dA: tuple[np.ndarray, ...]
    dB: tuple[np.ndarray, ...]

    def __post_init__(self):
        da = tuple(np.asarray(g, dtype=np.float64) for g in self.dA)
        db = tuple(np.asarray(g, dtype=np.float64) for g in self.dB)
        if len(da) != len(db):
            raise ValidationError("dA and dB must have one entry per module")
        for ga, gb in zip(da, db):
            if not (np.all(np.isfinite(ga)) and np.all(np.isfinite(gb))):
                raise ValidationError("gradient contains non-finite entries")
            if ga.shape[::-1] != gb.shape:
                raise ValidationError("dA_i and dB_i must have transposed shapes")
        object.__setattr__(self, "dA", da)
        object.__setattr__(self, "dB", db)


def _grad_core(
    a_stack: np.ndarray, b_stack: np.ndarray, x: np.ndarray, lam: float
) -> tuple[np.ndarray, np.ndarray, LossBreakdown]:
    """Stacked gradients plus the loss breakdown at the current iterate."""
    m = a_stack.shape[0]
    n = x.shape[1]
    recons = a_stack @ (b_stack @ x)  # M x D x N
    mean_recon = recons.mean(axis=0)
    resid = recons - x[None, :, :]
    dev = recons - mean_recon[None, :, :]
    grad_recon = resid - lam * dev  # dE/dR_i up to the 2/(N M) factor

    scale = 2.0 / (n * m)
    grad_x = grad_recon @ x.T  # M x D x D
    da = scale * (grad_x @ np.swapaxes(b_stack, 1, 2))
    db = scale * (np.swapaxes(a_stack, 1, 2) @ grad_x)

    ind = float(np.einsum("mij,mij->", resid, resid)) / (m * n)
    ens_resid = mean_recon - x
    ens = float(np.einsum("ij,ij->", ens_resid, ens_resid)) / n
    div = float(np.einsum("mij,mij->", dev, dev)) / (m * n)
    return da, db, _breakdown(ind, ens, div, lam)


def gradient(model: ModularAE, X) -> GradientPair:
    """Analytic gradient of the objective with respect to every A_i and B_i."""
    x = as_values(X)
    if x.shape[0] != model.dim:
        raise ValidationError(f"data has D={x.shape[0]} but model expects D={model.dim}")
    a_stack = np.stack([mod.A for mod in model.modules])
    b_stack = np.stack([mod.B for mod in model.modules])
    da, db, _ = _grad_core(a_stack, b_stack, x, model.lam)
    return GradientPair(dA=tuple(da), dB=tuple(db))


def default_learning_rate(X) -> float:
    """0.1 divided by the top eigenvalue of the per-example second moment X X^T / N.

    Scale-invariant in the data and well inside the stability region for the
    ensembles this package trains; the divergence backoff covers the rest.
    """
    x = as_values(X)
    return _rate_from_sigma(x @ x.T, x.shape[1])


def _rate_from_sigma(sigma: np.ndarray, n: int) -> float:
    top = float(np.linalg.eigvalsh((sigma + sigma.T) / 2.0)[-1]) / n
    if top <= 0:
        raise NumericalError("data second moment has no positive spectrum")
    return 0.1 / top


def _grad_core_sigma(
    a_stack: np.ndarray, b_stack: np.ndarray, sigma: np.ndarray, n: int, lam: float
) -> tuple[np.ndarray, np.ndarray, LossBreakdown]:
    """Same gradients and breakdown as ``_grad_core`` but via the second moment.

    Uses G_i X^T = H_i sigma with H_i = (C_i - I) - lam * (C_i - mean C), so
    each epoch works with D x D matrices only. Mathematically identical to
    the data-matrix path; the unit tests pin the two against each other.
    """
    m, d, _ = a_stack.shape
    products = a_stack @ b_stack  # M x D x D
    mean_product = products.mean(axis=0)
    h = (products - np.eye(d)[None, :, :]) - lam * (products - mean_product[None, :, :])
    hs = (h.reshape(m * d, d) @ sigma).reshape(m, d, d)
    scale = 2.0 / (n * m)
    da = scale * (hs @ np.swapaxes(b_stack, 1, 2))
    db = scale * (np.swapaxes(a_stack, 1, 2) @ hs)
    return da, db, breakdown_from_products(products, sigma, n, lam)


def fit_gd(X, config: TrainConfig) -> tuple[ModularAE, TrainReport]:
    """Train by simultaneous full-batch gradient steps; same stopping rule
    and initialization as the backfitting solver.

    If the objective rises for DIVERGENCE_PATIENCE consecutive epochs or
    becomes non-finite: an explicitly configured learning rate aborts with a
    diagnostic, while the automatic one backs off tenfold and restarts.
    """
    x = as_values(X)
    dim, n = x.shape
    m, lam = config.num_modules, config.lam

    start = time.perf_counter()
    sigma = x @ x.T
    auto_rate = config.learning_rate is None
    rate = _rate_from_sigma(sigma, n) if auto_rate else config.learning_rate

    for attempt in range(MAX_BACKOFFS + 1):
        a_list, b_list = init_modules(config, dim)
        a_stack = np.stack(a_list)
        b_stack = np.stack(b_list)
        trace: list[float] = []
        converged = False
        diverged = None
        rising = 0
        da, db, breakdown = _grad_core_sigma(a_stack, b_stack, sigma, n, lam)
        prev = breakdown.total
        for _ in range(config.max_epochs):
            a_stack = a_stack - rate * da
            b_stack = b_stack - rate * db
            da, db, breakdown = _grad_core_sigma(a_stack, b_stack, sigma, n, lam)
            current = breakdown.total
            if not np.isfinite(current):
                diverged = "objective became non-finite"
                break
            trace.append(current)
            if current > prev:
                # A rise is never "converged"; it feeds the divergence detector.
                rising += 1
                if rising >= DIVERGENCE_PATIENCE:
                    diverged = f"objective rose for {DIVERGENCE_PATIENCE} consecutive epochs"
                    break
            else:
                rising = 0
                if prev - current < config.tolerance:
                    converged = True
                    break
            prev = current
        if diverged is None:
            break
        if not auto_rate or attempt == MAX_BACKOFFS:
            raise NumericalError(
                f"gradient descent diverged ({diverged}) at learning rate {rate:g}; "
                "lower the learning rate or use the backfitting solver"
            )
        rate /= 10.0
    wall = time.perf_counter() - start

    model = ModularAE(tuple(AEModule(a, b) for a, b in zip(a_stack, b_stack)), lam)
    return model, TrainReport(
        error_trace=tuple(trace),
        epochs_run=len(trace),
        wall_time_seconds=wall,
        converged=converged,
    )


@dataclass(frozen=True)
class BenchmarkReport:
    """Per-repeat wall times and final costs for both solvers on fresh mixtures."""

    backfit_seconds: tuple[float, ...]
    gd_seconds: tuple[float, ...]
    backfit_costs: tuple[float, ...]
    gd_costs: tuple[float, ...]

    @property
    def repeats(self) -> int:
        return len(self.backfit_seconds)

    @property
    def speedups(self) -> tuple[float, ...]:
        """Per-repeat gradient-descent time over backfitting time."""
        return tuple(g / b for g, b in zip(self.gd_seconds, self.backfit_seconds))

    def stats(self) -> dict[str, dict[str, float]]:
        """min/mean/max of each solver's times and of the per-repeat speedups."""
        out: dict[str, dict[str, float]] = {}
        for name, series in (
            ("backfit_s", self.backfit_seconds),
            ("gd_s", self.gd_seconds),
            ("speedup", self.speedups),
        ):
            arr = np.asarray(series)
            out[name] = {
                "min": float(arr.min()),
                "mean": float(arr.mean()),
                "max": float(arr.max()),
            }
        return out


def benchmark_solvers(spec: MixtureSpec, config: TrainConfig, repeats: int) -> BenchmarkReport:
    """Run both solvers to the stopping rule on ``repeats`` fresh mixtures.

    Repeat r draws its dataset and solver seed from the spec and config seeds
    via the documented per-purpose derivation, so the report is reproducible.
    Wall times come from each solver's own fit-loop clock.
    """
    if repeats < 1:
        raise ValidationError("repeats must be >= 1")
    bf_s, gd_s, bf_c, gd_c = [], [], [], []
    for r in range(repeats):
        data = gaussian_mixture(replace(spec, seed=derive_seed(spec.seed, f"bench-data-{r}")))
        run_config = replace(config, seed=derive_seed(config.seed, f"bench-init-{r}"))
        _, bf_report = fit_backfit(data, run_config)
        _, gd_report = fit_gd(data, run_config)
        bf_s.append(bf_report.wall_time_seconds)
        gd_s.append(gd_report.wall_time_seconds)
        bf_c.append(bf_report.final_error)
        gd_c.append(gd_report.final_error)
    return BenchmarkReport(
        backfit_seconds=tuple(bf_s),
        gd_seconds=tuple(gd_s),
        backfit_costs=tuple(bf_c),
        gd_costs=tuple(gd_c),
    )
