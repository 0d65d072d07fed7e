"""
Discrete Caputo derivatives
===========================

Backward-Euler convolution quadrature (BECQ) approximates the Caputo
derivative of order alpha by a convolution with the Taylor coefficients of
(1 - xi)^alpha. This script looks at the weights, checks the first-order
accuracy on t^2 and compares with the L1 scheme. At the end it evaluates the
Mittag-Leffler function that drives the exact solutions used later.
"""

import math

import numpy as np
from scipy.special import erfcx

from fracipp import TimeGrid, caputo_becq, caputo_l1_oracle, cq_weights, mittag_leffler

# The weights for alpha = 1/2 are the binomial coefficients (-1)^j C(1/2, j)
w = cq_weights(0.5, 6)
print("weights:", w.weights)
print("partial sums:", w.partial_sums)

# v(t) = t^2 has Caputo derivative 2 t^(2 - alpha) / Gamma(3 - alpha)
alpha = 0.5
print("\n   N     max error    ratio")
prev = None
for N in (16, 32, 64, 128, 256, 512, 1024):
    grid = TimeGrid(1.0, N)
    exact = 2 * grid.t[1:] ** (2 - alpha) / math.gamma(3 - alpha)
    err = np.abs(caputo_becq(grid.t**2, alpha, grid) - exact).max()
    print(f"{N:5d}  {err:.3e}   {'' if prev is None else f'{prev / err:.2f}'}")
    prev = err

# L1 is exact on linear functions; BECQ is not, but the two agree to O(tau)
grid = TimeGrid(1.0, 200)
v = np.sin(grid.t)
gap = np.abs(caputo_becq(v, alpha, grid) - caputo_l1_oracle(v, alpha, grid))
print(f"\nBECQ vs L1 on sin t: max gap {gap.max():.2e}, gap for t >= 1/4: {gap[grid.t[1:] >= 0.25].max():.2e}")

# E_{1/2}(-x) = exp(x^2) erfc(x), which scipy provides overflow-free as erfcx
for x in (0.5, 1.0, 5.0, 30.0):
    print(f"E_0.5(-{x:g}) = {mittag_leffler(0.5, -x):.12f}   erfcx({x:g}) = {erfcx(x):.12f}")
