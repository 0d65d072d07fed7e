"""
Step size as regulariser, and the decay of the iteration
========================================================

With noisy data the time step acts as a regularisation parameter: large
steps give a large discretisation error, small steps amplify the noise
through the tau^(-alpha) factor of the discrete Caputo derivative. The
first part traces this U-shaped curve for delta = 0.1%.

The second part runs the nonlinear problem f(u) = (u - 1)(u - 3) on [0, 5]
and prints the per-iteration change in the plain and exponentially weighted
l2 norms (omega = 10).
"""

import warnings

import numpy as np

from fracipp.harness import ExperimentConfig, run_sweep

with warnings.catch_warnings():
    warnings.simplefilter("ignore")
    u = run_sweep("tau_ucurve", ExperimentConfig(alpha=0.5, delta_percent=0.1, seeds=(0, 1, 2, 3, 4)))
print("   N       error")
for r in u.rows:
    print(f"{r['N']:5d}   {r['error']:.4e}")
best = u.rows[u.argmin()]
print(f"best step: tau = T/{best['N']}")

cfg = ExperimentConfig(nonlinear=True, T=5.0, N=1024, M=32, omega=10.0)
res = run_sweep("iteration_decay", cfg)
print(f"\nnonlinear reconstruction: {res.config['iterations_used']} iterations")
print(" k     change     weighted    ratio")
prev = None
for r in res.rows[1:]:
    ratio = "" if prev is None else f"{r['change_omega'] / prev:.3f}"
    print(f"{r['param']:2d}  {r['change']:.3e}  {r['change_omega']:.3e}  {ratio}")
    prev = r["change_omega"]
print("final l2 error:", np.round(res.rows[-1]["error"], 5))
