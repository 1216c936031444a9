"""Probe 2d: GD convergence with the sigma-based fast loop at the benchmark scale."""
import time
import numpy as np
from modular_ae import MixtureSpec, TrainConfig, gaussian_mixture, fit_backfit, fit_gd
from modular_ae.gradient import default_learning_rate

spec = MixtureSpec(num_clusters=5, dim=20, num_points=1000, cluster_std=0.25, mean_scale=1.0, seed=7)
data = gaussian_mixture(spec)
auto = default_learning_rate(data)
print(f"auto lr = {auto:.3e}", flush=True)

cfg = TrainConfig(lam=0.5, num_modules=10, hidden_dim=10, max_epochs=200000, tolerance=1e-5, seed=7)
bmodel, brep = fit_backfit(data, cfg)
print(f"backfit: epochs={brep.epochs_run} final={brep.final_error:.8f} wall={brep.wall_time_seconds*1000:.1f}ms", flush=True)

gmodel, grep = fit_gd(data, cfg)
print(f"gd(auto): epochs={grep.epochs_run} conv={grep.converged} final={grep.final_error:.8f} "
      f"wall={grep.wall_time_seconds:.2f}s speedup={grep.wall_time_seconds/brep.wall_time_seconds:.1f}x", flush=True)
rel = (grep.final_error - brep.final_error) / abs(brep.final_error)
print(f"cost gap (gd-bf)/bf = {rel:.3e}", flush=True)
