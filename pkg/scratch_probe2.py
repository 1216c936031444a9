"""Probe 2: benchmark speedup (criterion 7) at the pinned scale."""
import numpy as np
from modular_ae import MixtureSpec, TrainConfig, benchmark_solvers

spec = MixtureSpec(num_clusters=5, dim=20, num_points=1000, cluster_std=0.25, mean_scale=1.0, seed=7)
cfg = TrainConfig(lam=0.5, num_modules=10, hidden_dim=10, max_epochs=50000, tolerance=1e-5, seed=7)
bench = benchmark_solvers(spec, cfg, repeats=3)
print("backfit times:", [f"{t:.3f}" for t in bench.backfit_seconds])
print("gd times:     ", [f"{t:.3f}" for t in bench.gd_seconds])
print("speedups:     ", [f"{s:.1f}" for s in bench.speedups])
print("backfit costs:", [f"{c:.6f}" for c in bench.backfit_costs])
print("gd costs:     ", [f"{c:.6f}" for c in bench.gd_costs])
rel = [(g - b) / abs(b) for g, b in zip(bench.gd_costs, bench.backfit_costs)]
print("gd-vs-bf rel: ", [f"{r:.2e}" for r in rel])
print("one-sided ok: ", all(b <= g + 1e-3 * abs(g) for b, g in zip(bench.backfit_costs, bench.gd_costs)))
