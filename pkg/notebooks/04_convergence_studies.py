"""
Convergence in h, tau and the noise level
=========================================

Three sweeps with the smooth potential and alpha = 1/2:

* spatial: tau = T/800 fixed, h = 1/20 .. 1/160, exact data; expect O(h^2)
* temporal: h = 1/100 fixed, tau = T/2^k, k = 4..10; expect about O(tau^(1/2))
* noise: (tau, h) coupled to delta; medians over five seeds; expect O(delta^(1/2))

Each table is also written as plot-ready CSV next to this script.
"""

import warnings
from pathlib import Path

from fracipp.fileio import write_sweep_csv
from fracipp.harness import ExperimentConfig, run_sweep

out = Path(__file__).with_name("output")
out.mkdir(exist_ok=True)
cfg = ExperimentConfig(alpha=0.5, potential="rho1")

for kind, kw in (
    ("spatial", dict(levels=[20, 40, 80, 160])),
    ("temporal", dict(levels=range(4, 11))),
    ("noise", dict(levels=[4, 2, 1, 0.5, 0.25, 0.125, 0.0625])),
):
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        res = run_sweep(kind, cfg, **kw)
    print(f"\n{kind}: {res.param_name:>14s}  {'N':>5s} {'M':>4s}  {'error':>10s}  rate")
    for r in res.rows:
        print(f"{'':{len(kind) + 2}}{r['param']:14.6g}  {r['N']:5d} {r['M']:4d}  {r['error']:10.3e}  {r['rate']:.3f}")
    print(f"least-squares rate: {res.fitted_rate():.3f}")
    write_sweep_csv(out / f"{kind}.csv", res)
