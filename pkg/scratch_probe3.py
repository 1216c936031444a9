"""Probe 3: criterion 10 (softmax sweep margin over seeds) at the pinned spec."""
import numpy as np
from modular_ae import MixtureSpec, TrainConfig, gaussian_mixture, evaluate_sweep

errs0, errs5, ind0, ind5 = [], [], [], []
for seed in range(10):
    spec = MixtureSpec(num_clusters=3, dim=2, num_points=3000, cluster_std=0.35,
                       mean_scale=1.5, seed=1000 + seed)
    data = gaussian_mixture(spec)
    cfg = TrainConfig(lam=0.0, num_modules=2, hidden_dim=1, max_epochs=200,
                      tolerance=1e-7, seed=seed)
    rep = evaluate_sweep(data, [0.0, 0.5], cfg, folds=5, classifier="softmax")
    errs0.append(rep.ensemble_mean[0]); errs5.append(rep.ensemble_mean[1])
    ind0.append(rep.individual_mean[0]); ind5.append(rep.individual_mean[1])
    print(f"seed={seed}: ens lam0={rep.ensemble_mean[0]:.4f} lam0.5={rep.ensemble_mean[1]:.4f} "
          f"ind lam0={rep.individual_mean[0]:.4f} lam0.5={rep.individual_mean[1]:.4f}", flush=True)

m0, m5 = np.mean(errs0), np.mean(errs5)
print(f"\nmean ens err: lam=0 {m0:.4f}  lam=0.5 {m5:.4f}  margin {100*(m0-m5):.2f}pp (need >= 3pp)")
print(f"mean ind err: lam=0 {np.mean(ind0):.4f}  lam=0.5 {np.mean(ind5):.4f} (need ind0.5 >= ind0)")
