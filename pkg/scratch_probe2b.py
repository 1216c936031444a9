"""Probe 2b: GD epoch counts/time vs learning-rate scale at the benchmark size."""
import time
import numpy as np
from modular_ae import MixtureSpec, TrainConfig, gaussian_mixture, fit_gd, fit_backfit
from modular_ae.gradient import default_learning_rate

spec = MixtureSpec(num_clusters=5, dim=20, num_points=1000, cluster_std=0.25, mean_scale=1.0, seed=7)
data = gaussian_mixture(spec)
auto = default_learning_rate(data)
print(f"auto lr = {auto:.3e}")

cfg0 = TrainConfig(lam=0.5, num_modules=10, hidden_dim=10, max_epochs=50000, tolerance=1e-5, seed=7)
t0 = time.perf_counter()
bmodel, brep = fit_backfit(data, cfg0)
print(f"backfit: epochs={brep.epochs_run} final={brep.final_error:.6f} wall={brep.wall_time_seconds:.3f}s")

for mult in (1.0, 5.0, 20.0):
    cfg = TrainConfig(lam=0.5, num_modules=10, hidden_dim=10, max_epochs=20000,
                      tolerance=1e-5, seed=7, learning_rate=auto * mult)
    model, rep = fit_gd(data, cfg)
    print(f"lr={auto*mult:.2e}: epochs={rep.epochs_run} conv={rep.converged} "
          f"final={rep.final_error:.6f} wall={rep.wall_time_seconds:.2f}s "
          f"(vs backfit {brep.final_error:.6f})")
