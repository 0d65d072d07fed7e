"""
Forward problem
===============

Solve the subdiffusion equation with a time-dependent potential on (0, 1)
with Neumann conditions. For a constant potential the solution has a cosine
expansion with Mittag-Leffler time factors, which gives an exact reference.
"""

import numpy as np

from fracipp import PotentialPath, TimeGrid, assemble, build_mesh, exact_constant_coeff_solution
from fracipp.forward import solve
from fracipp.harness import builtin_potential, default_problem

data = default_problem(x0=0.25)  # f = 1 + 20 x^2 (1 - x)^2, u0 = 2 + cos(2 pi x)
alpha, T = 0.5, 0.5

print("constant potential rho = 1, error against the exact expansion for t >= T/4")
print("   M     N     max error")
for M, N in ((25, 128), (50, 256), (100, 512), (200, 1024)):
    mesh = build_mesh(M)
    grid = TimeGrid(T, N)
    traj = solve(mesh, assemble(mesh), grid, alpha, PotentialPath.constant(1.0, N), data)
    late = grid.t >= T / 4
    ref = exact_constant_coeff_solution(alpha, 1.0, data, 60, mesh.nodes[None, :], grid.t[late][:, None])
    print(f"{M:4d}  {N:5d}   {np.abs(traj.fields[late] - ref).max():.3e}")

# A time-dependent potential: the smooth test potential exp(cos 5t)
mesh = build_mesh(64)
grid = TimeGrid(T, 256)
rho = PotentialPath.from_function(lambda t: builtin_potential("rho1", t, T), grid)
traj = solve(mesh, assemble(mesh), grid, alpha, rho, data)
g = traj.at_point(0.25)
print("\nobservation u(0.25, t) at a few times:")
for n in (0, 32, 64, 128, 256):
    print(f"  t = {grid.t[n]:.4f}   u = {g[n]:.6f}")
print("all values positive:", bool(traj.fields.min() > 0))
