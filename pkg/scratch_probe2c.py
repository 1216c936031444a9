import time
import numpy as np
from modular_ae import MixtureSpec, TrainConfig, gaussian_mixture
from modular_ae.gradient import default_learning_rate, _grad_core
from modular_ae.backfit import init_modules

spec = MixtureSpec(num_clusters=5, dim=20, num_points=1000, cluster_std=0.25, mean_scale=1.0, seed=7)
data = gaussian_mixture(spec)
x = data.values
auto = default_learning_rate(data)
print(f"auto lr = {auto:.3e}", flush=True)

cfg = TrainConfig(lam=0.5, num_modules=10, hidden_dim=10, max_epochs=10, tolerance=1e-5, seed=7)
a_list, b_list = init_modules(cfg, 20)
A0 = np.stack(a_list); B0 = np.stack(b_list)

A, B = A0.copy(), B0.copy()
t0 = time.perf_counter()
for _ in range(200):
    da, db, bd = _grad_core(A, B, x, 0.5)
    A = A - auto * da
    B = B - auto * db
dt = (time.perf_counter() - t0) / 200
print(f"per-epoch: {dt*1000:.3f} ms", flush=True)

for mult in (1.0, 10.0, 50.0):
    rate = auto * mult
    A, B = A0.copy(), B0.copy()
    da, db, bd = _grad_core(A, B, x, 0.5)
    prev = bd.total
    stopped = None
    for epoch in range(1, 100001):
        A = A - rate * da
        B = B - rate * db
        da, db, bd = _grad_core(A, B, x, 0.5)
        dec = prev - bd.total
        if 0 <= dec < 1e-5:
            stopped = epoch
            break
        prev = bd.total
    print(f"mult={mult}: stop at epoch {stopped}, E={bd.total:.8f}, wall est {(stopped or 0)*dt:.1f}s", flush=True)
