"""Downstream supervised evaluation of trained ensembles.

Per-module classifiers (1-nearest-neighbour or linear softmax) are trained
on the encoded features; predictions combine by modal vote or by averaging
class probabilities. The sweep runs the full pipeline across a diversity
grid under k-fold cross-validation, against a bagging baseline whose
modules are trained independently on bootstrap resamples.

All ties (nearest-neighbour distance, vote, argmax) break deterministically
toward the smallest training index or label value.
"""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, replace

import numpy as np

from .backfit import fit_backfit
from .core import DataMatrix, ModularAE, TrainConfig
from .data import apply_offsets, bootstrap_sample, center_features, make_folds, split
from .errors import ValidationError
from .loss import as_values
from .rng import derive_seed

__all__ = [
    "EncodedDataset",
    "EvalReport",
    "BaselineReport",
    "SweepCell",
    "encode",
    "knn1_predict",
    "modal_vote",
    "SoftmaxModel",
    "softmax_fit",
    "softmax_predict_proba",
    "combine_mean_proba",
    "evaluate_sweep",
    "evaluate_bae",
]

CLASSIFIERS = ("knn1", "softmax")


@dataclass(frozen=True)
class EncodedDataset:
    """Per-module code matrices (P x N each) with the shared labels."""

    codes: tuple[np.ndarray, ...]
    labels: np.ndarray | None = None

    def __post_init__(self):
        if not self.codes:
            raise ValidationError("need at least one code matrix")
        n = self.codes[0].shape[1]
        for k, c in enumerate(self.codes):
            if c.ndim != 2 or c.shape[1] != n:
                raise ValidationError(f"code matrix {k} has inconsistent shape {c.shape}")


def encode(model: ModularAE, X) -> EncodedDataset:
    """B_i @ X for every module."""
    x = as_values(X)
    if x.shape[0] != model.dim:
        raise ValidationError(f"data has D={x.shape[0]} but model expects D={model.dim}")
    labels = X.labels if isinstance(X, DataMatrix) else None
    return EncodedDataset(codes=tuple(mod.B @ x for mod in model.modules), labels=labels)


def knn1_predict(train_codes: np.ndarray, train_labels: np.ndarray, test_codes: np.ndarray) -> np.ndarray:
    """Label of the Euclidean-nearest training code; ties go to the lowest index."""
    train = np.asarray(train_codes, dtype=np.float64)
    test = np.asarray(test_codes, dtype=np.float64)
    labels = np.asarray(train_labels, dtype=np.int64)
    if train.shape[0] != test.shape[0]:
        raise ValidationError("train and test codes must share the feature dimension")
    if labels.shape[0] != train.shape[1]:
        raise ValidationError("one label per training column required")
    if train.shape[1] < 1:
        raise ValidationError("need at least one training example")
    out = np.empty(test.shape[1], dtype=np.int64)
    for j in range(test.shape[1]):
        sq = ((train - test[:, j : j + 1]) ** 2).sum(axis=0)
        out[j] = labels[int(np.argmin(sq))]  # argmin returns the first minimum
    return out


def modal_vote(per_module_predictions) -> np.ndarray:
    """Most frequent label per test point; ties go to the smallest label value."""
    votes = np.asarray(per_module_predictions, dtype=np.int64)
    if votes.ndim != 2:
        raise ValidationError("expected M stacked label vectors")
    out = np.empty(votes.shape[1], dtype=np.int64)
    for j in range(votes.shape[1]):
        values, counts = np.unique(votes[:, j], return_counts=True)  # sorted ascending
        out[j] = values[int(np.argmax(counts))]
    return out


@dataclass(frozen=True)
class SoftmaxModel:
    """Multinomial logistic classifier: weights ((P+1) x K, last row is bias)."""

    weights: np.ndarray
    classes: np.ndarray

    @property
    def num_classes(self) -> int:
        return self.classes.shape[0]


def _augment(codes: np.ndarray) -> np.ndarray:
    return np.vstack([codes, np.ones((1, codes.shape[1]))])


def _proba_from_logits(logits: np.ndarray) -> np.ndarray:
    shifted = logits - logits.max(axis=0, keepdims=True)
    e = np.exp(shifted)
    return e / e.sum(axis=0, keepdims=True)


def softmax_fit(
    codes: np.ndarray,
    labels: np.ndarray,
    *,
    l2: float = 1e-6,
    tolerance: float = 1e-6,
    max_iter: int = 5000,
) -> SoftmaxModel:
    """Fit by full-batch gradient descent on L2-regularized cross-entropy.

    The step is 1/L for the curvature bound L of the regularized objective;
    descent runs until the per-iteration loss decrease falls below
    ``tolerance`` or ``max_iter`` is reached. The small ridge keeps the
    optimum unique even on separable data.
    """
    z = _augment(np.asarray(codes, dtype=np.float64))
    y = np.asarray(labels, dtype=np.int64)
    classes, targets = np.unique(y, return_inverse=True)
    if classes.shape[0] < 2:
        raise ValidationError("softmax training needs at least 2 classes")
    k = classes.shape[0]
    n = z.shape[1]
    onehot = np.zeros((k, n))
    onehot[targets, np.arange(n)] = 1.0

    lipschitz = 0.5 * float(np.linalg.eigvalsh(z @ z.T)[-1]) / n + l2
    step = 1.0 / lipschitz
    weights = np.zeros((z.shape[0], k))
    prev_loss = np.inf
    for _ in range(max_iter):
        proba = _proba_from_logits(weights.T @ z)
        loss = -float(np.mean(np.log(np.maximum(proba[targets, np.arange(n)], 1e-300))))
        loss += 0.5 * l2 * float((weights * weights).sum())
        if prev_loss - loss < tolerance:
            break
        prev_loss = loss
        grad = z @ (proba - onehot).T / n + l2 * weights
        weights -= step * grad
    return SoftmaxModel(weights=weights, classes=classes)


def softmax_predict_proba(model: SoftmaxModel, codes: np.ndarray) -> np.ndarray:
    """N x K class probabilities; every row sums to one."""
    z = _augment(np.asarray(codes, dtype=np.float64))
    if z.shape[0] != model.weights.shape[0]:
        raise ValidationError("code dimension does not match the fitted classifier")
    return _proba_from_logits(model.weights.T @ z).T


def combine_mean_proba(probas, classes: np.ndarray) -> np.ndarray:
    """Average the probability matrices, then argmax; ties go to the smallest label."""
    stack = np.stack([np.asarray(p, dtype=np.float64) for p in probas])
    mean = stack.mean(axis=0)
    return np.asarray(classes)[np.argmax(mean, axis=1)]


@dataclass(frozen=True)
class SweepCell:
    """One (diversity value, fold) evaluation."""

    lam: float
    fold: int
    ensemble_error: float
    individual_error: float


@dataclass(frozen=True)
class BaselineReport:
    """Per-fold bagging-baseline ensemble errors."""

    fold_errors: tuple[float, ...]

    @property
    def mean(self) -> float:
        return float(np.mean(self.fold_errors))

    @property
    def std(self) -> float:
        return _fold_std(self.fold_errors)


def _fold_std(values) -> float:
    arr = np.asarray(values, dtype=np.float64)
    return float(arr.std(ddof=1)) if arr.size > 1 else 0.0


@dataclass(frozen=True)
class EvalReport:
    """Cross-validated errors across the diversity grid, plus the baseline."""

    lambda_grid: tuple[float, ...]
    ensemble_mean: tuple[float, ...]
    ensemble_std: tuple[float, ...]
    individual_mean: tuple[float, ...]
    individual_std: tuple[float, ...]
    cells: tuple[SweepCell, ...]
    baseline: BaselineReport | None = None

    def __post_init__(self):
        grid = tuple(float(v) for v in self.lambda_grid)
        if any(b < a for a, b in zip(grid, grid[1:])):
            raise ValidationError("lambda grid must be sorted ascending")
        for series in (self.ensemble_mean, self.individual_mean):
            if len(series) != len(grid):
                raise ValidationError("one error per grid point required")
            if any(not (0 <= e <= 1) for e in series):
                raise ValidationError("classification errors must lie in [0, 1]")
        object.__setattr__(self, "lambda_grid", grid)


def _error_rate(predicted: np.ndarray, truth: np.ndarray) -> float:
    return float(np.mean(predicted != truth))


def _classify_fold(
    model: ModularAE,
    train: DataMatrix,
    test: DataMatrix,
    classifier: str,
) -> tuple[float, float]:
    """(ensemble error, mean individual error) on one centered fold pair."""
    enc_train = encode(model, train)
    enc_test = encode(model, test)
    y_train, y_test = train.labels, test.labels
    if classifier == "knn1":
        per_module = [
            knn1_predict(tr, y_train, te) for tr, te in zip(enc_train.codes, enc_test.codes)
        ]
        individual = float(np.mean([_error_rate(p, y_test) for p in per_module]))
        ensemble = _error_rate(modal_vote(per_module), y_test)
    else:
        fitted = [softmax_fit(tr, y_train) for tr in enc_train.codes]
        probas = [softmax_predict_proba(f, te) for f, te in zip(fitted, enc_test.codes)]
        per_module = [f.classes[np.argmax(p, axis=1)] for f, p in zip(fitted, probas)]
        individual = float(np.mean([_error_rate(p, y_test) for p in per_module]))
        ensemble = _error_rate(combine_mean_proba(probas, fitted[0].classes), y_test)
    return ensemble, individual


def _prepare_fold(data: DataMatrix, plan, fold: int) -> tuple[DataMatrix, DataMatrix]:
    """Centered train fold and the test fold shifted by the *train* means."""
    train, test = split(data, plan, fold)
    train_centered = center_features(train)
    return train_centered, apply_offsets(test, train_centered.feature_means)


def _validate_grid(grid, config: TrainConfig) -> tuple[float, ...]:
    from .core import lambda_upper_bound

    values = tuple(sorted({float(v) for v in grid}))
    if not values:
        raise ValidationError("lambda grid is empty")
    bound = lambda_upper_bound(config.num_modules)
    for v in values:
        if not (0 <= v < bound):
            raise ValidationError(
                f"lambda={v} outside [0, M/(M-1)) = [0, {bound:g}) for M={config.num_modules}"
            )
    return values


def evaluate_sweep(
    data: DataMatrix,
    lambda_grid,
    config: TrainConfig,
    folds: int = 5,
    classifier: str = "knn1",
    jobs: int = 1,
) -> EvalReport:
    """Cross-validated ensemble and mean-individual test error per grid point.

    Per fold: center the train features (the test fold is shifted by the
    train means, never its own), fit the ensemble on the unlabeled train
    features at each diversity value, train per-module classifiers on the
    encoded train fold, and score on the encoded test fold. Fits are seeded
    per (fold, grid point) from ``config.seed``, so results do not depend on
    scheduling.
    """
    if data.labels is None:
        raise ValidationError("evaluate_sweep needs labeled data")
    if classifier not in CLASSIFIERS:
        raise ValidationError(f"classifier must be one of {CLASSIFIERS}")
    grid = _validate_grid(lambda_grid, config)
    plan = make_folds(data.num_examples, folds, derive_seed(config.seed, "folds"))
    prepared = [_prepare_fold(data, plan, f) for f in range(folds)]

    def run_cell(args) -> SweepCell:
        gi, fold = args
        lam = grid[gi]
        train, test = prepared[fold]
        cfg = replace(config, lam=lam, seed=derive_seed(config.seed, f"fit-f{fold}-l{gi}"))
        model, _ = fit_backfit(train, cfg)
        ens, ind = _classify_fold(model, train, test, classifier)
        return SweepCell(lam=lam, fold=fold, ensemble_error=ens, individual_error=ind)

    tasks = [(gi, fold) for gi in range(len(grid)) for fold in range(folds)]
    if jobs > 1:
        with ThreadPoolExecutor(max_workers=jobs) as pool:
            cells = list(pool.map(run_cell, tasks))
    else:
        cells = [run_cell(t) for t in tasks]
    cells.sort(key=lambda c: (grid.index(c.lam), c.fold))

    ens_mean, ens_std, ind_mean, ind_std = [], [], [], []
    for gi, lam in enumerate(grid):
        fold_cells = [c for c in cells if c.lam == lam]
        ens = [c.ensemble_error for c in fold_cells]
        ind = [c.individual_error for c in fold_cells]
        ens_mean.append(float(np.mean(ens)))
        ens_std.append(_fold_std(ens))
        ind_mean.append(float(np.mean(ind)))
        ind_std.append(_fold_std(ind))
    return EvalReport(
        lambda_grid=grid,
        ensemble_mean=tuple(ens_mean),
        ensemble_std=tuple(ens_std),
        individual_mean=tuple(ind_mean),
        individual_std=tuple(ind_std),
        cells=tuple(cells),
    )


def evaluate_bae(
    data: DataMatrix,
    config: TrainConfig,
    folds: int = 5,
    classifier: str = "knn1",
    jobs: int = 1,
) -> BaselineReport:
    """Bagging baseline: modules trained independently on bootstrap resamples.

    Uses the same fold plan as ``evaluate_sweep`` for the same seed. Each
    module is a single-module, zero-diversity fit on its own bootstrap of the
    centered train fold; classifiers then see the full train-fold codes, as
    in the main pipeline. The result does not depend on ``config.lam``.
    """
    if data.labels is None:
        raise ValidationError("evaluate_bae needs labeled data")
    if classifier not in CLASSIFIERS:
        raise ValidationError(f"classifier must be one of {CLASSIFIERS}")
    plan = make_folds(data.num_examples, folds, derive_seed(config.seed, "folds"))

    def run_fold(fold: int) -> float:
        train, test = _prepare_fold(data, plan, fold)
        modules = []
        for i in range(config.num_modules):
            boot = bootstrap_sample(train, derive_seed(config.seed, f"bae-boot-f{fold}-m{i}"))
            cfg = replace(
                config,
                lam=0.0,
                num_modules=1,
                seed=derive_seed(config.seed, f"bae-fit-f{fold}-m{i}"),
            )
            single, _ = fit_backfit(boot, cfg)
            modules.append(single.modules[0])
        model = ModularAE(tuple(modules), 0.0)
        ens, _ = _classify_fold(model, train, test, classifier)
        return ens

    if jobs > 1:
        with ThreadPoolExecutor(max_workers=jobs) as pool:
            errors = list(pool.map(run_fold, range(folds)))
    else:
        errors = [run_fold(f) for f in range(folds)]
    return BaselineReport(fold_errors=tuple(errors))
