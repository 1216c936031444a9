"""Probe 1: backfit basics, lambda=0 PCA equivalence, lambda=1 monolithic, boundary scans."""
import numpy as np
from modular_ae import (
    MixtureSpec, TrainConfig, gaussian_mixture, center_features, fit_backfit,
    evaluate_loss, per_module_boundary_check, verify_dichotomy,
)

# --- criterion 1/2 style: monotone + PCA at lambda=0
spec = MixtureSpec(num_clusters=5, dim=20, num_points=500, cluster_std=0.25, mean_scale=1.0, seed=11)
data = center_features(gaussian_mixture(spec))
X = data.values

for lam in (0.0, 0.25, 0.5, 0.75, 1.0):
    cfg = TrainConfig(lam=lam, num_modules=5, hidden_dim=3, max_epochs=200, tolerance=1e-9, seed=1)
    model, rep = fit_backfit(data, cfg)
    tr = np.array(rep.error_trace)
    mono = np.all(np.diff(tr) <= 1e-10)
    print(f"lam={lam}: epochs={rep.epochs_run} converged={rep.converged} final={tr[-1]:.8f} mono={mono}")

# PCA check at lambda=0
sigma = X @ X.T
w = np.linalg.eigvalsh(sigma)[::-1]
pca_err_p3 = w[3:].sum() / X.shape[1]
cfg = TrainConfig(lam=0.0, num_modules=5, hidden_dim=3, max_epochs=50, tolerance=1e-9, seed=1)
model, rep = fit_backfit(data, cfg)
for i, mod in enumerate(model.modules):
    rec = mod.A @ (mod.B @ X)
    err = np.linalg.norm(X - rec) ** 2 / X.shape[1]
    print(f"module {i}: err={err:.10f} pca={pca_err_p3:.10f} rel={(err-pca_err_p3)/pca_err_p3:.2e}")

# --- criterion 3: lambda=1 vs rank-MP PCA, best of 5 restarts
M, P = 4, 3
rank = M * P
pca_err_mp = w[rank:].sum() / X.shape[1]
best = np.inf
for s in range(5):
    cfg = TrainConfig(lam=1.0, num_modules=M, hidden_dim=P, max_epochs=500, tolerance=1e-9, seed=100 + s)
    model, rep = fit_backfit(data, cfg)
    final = rep.final_error
    best = min(best, final)
    print(f"restart {s}: E1={final:.8f} epochs={rep.epochs_run}")
print(f"rank-{rank} PCA err={pca_err_mp:.8f}, best={best:.8f}, rel gap={(best-pca_err_mp)/pca_err_mp:.4%}, lower-bound ok={best >= pca_err_mp - 1e-12}")

# --- criterion 9: boundary
scans = per_module_boundary_check(X, num_modules=2, lambdas=(1.9, 2.1), seed=3)
for sc in scans:
    print(f"lam={sc.lam}: base={sc.base_total:.4f} scaled={[f'{t:.4g}' for t in sc.scaled_totals]} grows={sc.grows_beyond_start} dec={sc.strictly_decreasing}")

# --- criterion 8: dichotomy
rep = verify_dichotomy(X, 1.1, (10.0, 100.0, 1000.0))
for r in rep.rows:
    print(f"q={r.q}: E={r.total:.6g} ens={r.ensemble_error:.6g} ind={r.avg_individual_error:.6g}")
rows = rep.rows
print("E ratios:", [rows[i+1].total / rows[i].total for i in range(2)])
print("ens ratios:", [rows[i+1].ensemble_error / rows[i].ensemble_error for i in range(2)])
rep0 = verify_dichotomy(X, 1.0, num_modules=3, hidden_dim=2, num_samples=1000, seed=5)
print("lam=1 min sampled:", rep0.min_sampled_total, "cert:", rep0.nonnegative_certified)
