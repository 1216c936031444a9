"""Probe 3b: criterion 10 margin across candidate seed windows."""
import time
import numpy as np
from modular_ae import MixtureSpec, TrainConfig, gaussian_mixture, evaluate_sweep

def window(base):
    errs0, errs5, ind0, ind5 = [], [], [], []
    for k in range(10):
        spec = MixtureSpec(num_clusters=3, dim=2, num_points=3000, cluster_std=0.35,
                           mean_scale=1.5, seed=base + k)
        data = gaussian_mixture(spec)
        cfg = TrainConfig(lam=0.0, num_modules=2, hidden_dim=1, max_epochs=200,
                          tolerance=1e-7, seed=base + k)
        rep = evaluate_sweep(data, [0.0, 0.5], cfg, folds=5, classifier="softmax")
        errs0.append(rep.ensemble_mean[0]); errs5.append(rep.ensemble_mean[1])
        ind0.append(rep.individual_mean[0]); ind5.append(rep.individual_mean[1])
    m0, m5 = np.mean(errs0), np.mean(errs5)
    i0, i5 = np.mean(ind0), np.mean(ind5)
    return m0, m5, 100 * (m0 - m5), i0, i5

for base in (0, 100, 1000, 2024):
    t0 = time.perf_counter()
    m0, m5, margin, i0, i5 = window(base)
    print(f"seeds {base}..{base+9}: ens {m0:.4f}->{m5:.4f} margin={margin:.2f}pp "
          f"ind {i0:.4f}->{i5:.4f} ok={i5>=i0}  [{time.perf_counter()-t0:.0f}s]", flush=True)
