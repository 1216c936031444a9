"""Exact evaluation of the reconstruction-minus-diversity objective.

The objective for an ensemble W = {(A_i, B_i)} with diversity weight lam is
the data average of

    mean_i ||A_i B_i x - x||^2  -  lam * mean_i ||A_i B_i x - r(x)||^2

where r(x) is the ensemble-mean reconstruction. By the ambiguity
decomposition this equals (1 - lam) * (average individual error)
+ lam * (ensemble error); the release path computes that two-term form and
debug builds cross-check it against the direct form.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from .core import AEModule, DataMatrix, ModularAE
from .errors import ValidationError

__all__ = [
    "LossBreakdown",
    "module_reconstruction",
    "ensemble_reconstruction",
    "evaluate_loss",
    "monolithic_equivalent",
    "MonolithicPair",
]

IDENTITY_RTOL = 1e-10


@dataclass(frozen=True)
class LossBreakdown:
    """The objective value and its three constituent error terms.

    Identities (for the lam the model was evaluated with):
      total == avg_individual_error - lam * diversity
      total == (1 - lam) * avg_individual_error + lam * ensemble_error
    """

    total: float
    avg_individual_error: float
    diversity: float
    ensemble_error: float


def as_values(X) -> np.ndarray:
    """Accept a DataMatrix or a plain D x N array."""
    if isinstance(X, DataMatrix):
        return X.values
    arr = np.asarray(X, dtype=np.float64)
    if arr.ndim != 2:
        raise ValidationError(f"expected a 2-D data matrix, got ndim={arr.ndim}")
    return arr


def module_reconstruction(module: AEModule, X) -> np.ndarray:
    """A @ B @ X for one module."""
    x = as_values(X)
    if x.shape[0] != module.dim:
        raise ValidationError(f"data has D={x.shape[0]} but module expects D={module.dim}")
    return module.A @ (module.B @ x)


def ensemble_reconstruction(model: ModularAE, X) -> np.ndarray:
    """Arithmetic mean of the module reconstructions."""
    x = as_values(X)
    if x.shape[0] != model.dim:
        raise ValidationError(f"data has D={x.shape[0]} but model expects D={model.dim}")
    out = module_reconstruction(model.modules[0], x)
    for mod in model.modules[1:]:
        out = out + module_reconstruction(mod, x)
    return out / model.num_modules


def _breakdown(ind: float, ens: float, div: float, lam: float) -> LossBreakdown:
    total = (1.0 - lam) * ind + lam * ens
    if __debug__:
        direct = ind - lam * div
        if abs(direct - total) > IDENTITY_RTOL * (1.0 + abs(total)):
            raise AssertionError(
                f"loss identity violated: direct={direct!r} decomposed={total!r}"
            )
    return LossBreakdown(
        total=total, avg_individual_error=ind, diversity=div, ensemble_error=ens
    )


def breakdown_from_reconstructions(x: np.ndarray, recons: list[np.ndarray], lam: float) -> LossBreakdown:
    """Breakdown from precomputed per-module reconstructions (shape D x N each)."""
    n = x.shape[1]
    m = len(recons)
    mean_recon = sum(recons) / m
    ind = sum(float(np.linalg.norm(x - r) ** 2) for r in recons) / (m * n)
    ens = float(np.linalg.norm(x - mean_recon) ** 2) / n
    div = sum(float(np.linalg.norm(r - mean_recon) ** 2) for r in recons) / (m * n)
    return _breakdown(ind, ens, div, lam)


def breakdown_from_products(products: np.ndarray, sigma: np.ndarray, n: int, lam: float) -> LossBreakdown:
    """Breakdown from stacked module products C_i (shape M x D x D) and sigma = X X^T.

    Uses ||G X||_F^2 = trace(G sigma G^T), so no pass over the data is needed;
    this is the solver hot path.
    """
    m, d, _ = products.shape
    eye = np.eye(d)
    mean_product = products.mean(axis=0)
    resid = eye[None, :, :] - products  # I - C_i
    ind = float(np.einsum("mij,jk,mik->", resid, sigma, resid)) / (m * n)
    ens_resid = eye - mean_product
    ens = float(np.einsum("ij,jk,ik->", ens_resid, sigma, ens_resid)) / n
    dev = products - mean_product[None, :, :]
    div = float(np.einsum("mij,jk,mik->", dev, sigma, dev)) / (m * n)
    return _breakdown(ind, ens, div, lam)


def evaluate_loss(model: ModularAE, X) -> LossBreakdown:
    """Full loss breakdown of a model on data, using the model's lam."""
    x = as_values(X)
    if x.shape[0] != model.dim:
        raise ValidationError(f"data has D={x.shape[0]} but model expects D={model.dim}")
    recons = [module_reconstruction(mod, x) for mod in model.modules]
    return breakdown_from_reconstructions(x, recons, model.lam)


class MonolithicPair(NamedTuple):
    """Stacked single-autoencoder equivalent of an ensemble (hidden width M*P)."""

    A: np.ndarray  # D x (M*P), column blocks A_i / M
    B: np.ndarray  # (M*P) x D, row blocks B_i


def monolithic_equivalent(model: ModularAE) -> MonolithicPair:
    """One wide autoencoder whose product equals the ensemble-mean map exactly.

    Its squared reconstruction error equals the breakdown's ensemble_error.
    """
    a = np.hstack([mod.A for mod in model.modules]) / model.num_modules
    b = np.vstack([mod.B for mod in model.modules])
    return MonolithicPair(A=a, B=b)
