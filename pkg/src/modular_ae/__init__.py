"""Linear modular autoencoder ensembles.

Ensembles of small linear encoder/decoder modules trained to balance
per-module reconstruction accuracy against diversity of reconstructions,
with a fast eigendecomposition-based backfitting solver, a gradient-descent
baseline, downstream ensemble-classification evaluation, and
distance-correlation diagnostics.
"""

__version__ = "0.1.0"

from .backfit import EigenResult, fit_backfit, reduced_rank_regression, top_eigenvectors, update_module
from .core import (
    AEModule,
    DataMatrix,
    ModularAE,
    TrainConfig,
    TrainReport,
    lambda_upper_bound,
    load_model,
    model_document,
    save_model,
)
from .data import (
    FoldPlan,
    MixtureSpec,
    bootstrap_sample,
    center_features,
    gaussian_mixture,
    load_csv,
    make_folds,
    split,
    train_test_split,
)
from .dcor import DCorReport, dcor_report, distance_correlation, fidelity_series, pairwise_diversity_series
from .errors import DataError, ModularAEError, NumericalError, ValidationError
from .evaluate import (
    BaselineReport,
    EncodedDataset,
    EvalReport,
    SoftmaxModel,
    combine_mean_proba,
    encode,
    evaluate_bae,
    evaluate_sweep,
    knn1_predict,
    modal_vote,
    softmax_fit,
    softmax_predict_proba,
)
from .gradient import BenchmarkReport, GradientPair, benchmark_solvers, fit_gd, gradient
from .loss import (
    LossBreakdown,
    ensemble_reconstruction,
    evaluate_loss,
    module_reconstruction,
    monolithic_equivalent,
)
from .rng import SeededRNG, derive_seed
from .witness import (
    BoundaryScan,
    DichotomyReport,
    build_divergent_ensemble,
    per_module_boundary_check,
    scale_coefficient,
    verify_dichotomy,
)
