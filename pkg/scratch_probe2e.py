"""Probe 2e: learning-rate multiplier scan for GD quality/speed tradeoff."""
import numpy as np
from modular_ae import MixtureSpec, TrainConfig, gaussian_mixture, fit_backfit, fit_gd
from modular_ae.gradient import default_learning_rate
from modular_ae.errors import NumericalError

for seed in (7, 8):
    spec = MixtureSpec(num_clusters=5, dim=20, num_points=1000, cluster_std=0.25, mean_scale=1.0, seed=seed)
    data = gaussian_mixture(spec)
    auto = default_learning_rate(data)
    cfg = TrainConfig(lam=0.5, num_modules=10, hidden_dim=10, max_epochs=200000, tolerance=1e-5, seed=seed)
    bmodel, brep = fit_backfit(data, cfg)
    print(f"seed={seed} auto={auto:.2e} backfit: ep={brep.epochs_run} E={brep.final_error:.6f} "
          f"wall={brep.wall_time_seconds*1000:.0f}ms", flush=True)
    for mult in (10.0, 30.0, 100.0, 300.0):
        c = TrainConfig(lam=0.5, num_modules=10, hidden_dim=10, max_epochs=200000,
                        tolerance=1e-5, seed=seed, learning_rate=auto * mult)
        try:
            gmodel, grep = fit_gd(data, c)
            rel = (grep.final_error - brep.final_error) / abs(brep.final_error)
            print(f"  mult={mult:5.0f}: ep={grep.epochs_run:6d} conv={grep.converged} "
                  f"E={grep.final_error:.6f} gap={rel:+.2e} wall={grep.wall_time_seconds:5.2f}s "
                  f"speedup={grep.wall_time_seconds/brep.wall_time_seconds:6.1f}x", flush=True)
        except NumericalError as e:
            print(f"  mult={mult:5.0f}: DIVERGED ({e})", flush=True)
