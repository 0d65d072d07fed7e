import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from fracipp.fem1d import assemble, build_mesh
from fracipp.forward import (
    PotentialPath,
    ProblemData,
    exact_constant_coeff_solution,
    solve,
    solve_forward,
    solve_forward_nonlinear,
)
from fracipp.fracquad import TimeGrid, mittag_leffler
from fracipp.harness import default_problem

one = lambda x: np.ones_like(np.asarray(x, dtype=float))
zero = lambda x: np.zeros_like(np.asarray(x, dtype=float))
cosine_u0 = lambda x: 2.0 + np.cos(2 * np.pi * np.asarray(x, dtype=float))


def run(M, N, alpha, rho0, data, T=0.5):
    mesh = build_mesh(M)
    grid = TimeGrid(T, N)
    return solve(mesh, assemble(mesh), grid, alpha, PotentialPath.constant(rho0, N), data)


# --- types ---------------------------------------------------------------


def test_potential_path_box():
    with pytest.raises(ValueError):
        PotentialPath([1.0, -0.1])
    with pytest.raises(ValueError):
        PotentialPath([1.0, 5.5], bound=5.0)
    with pytest.raises(ValueError):
        PotentialPath([1.0, np.nan])
    p = PotentialPath.from_function(lambda t: t, TimeGrid(1.0, 4))
    assert np.allclose(p.values, [0.25, 0.5, 0.75, 1.0])


def test_problem_data_rejects_x0():
    with pytest.raises(ValueError):
        ProblemData(one, one, x0=1.5)


def test_solver_rejects_mismatches():
    mesh = build_mesh(4)
    ops = assemble(mesh)
    grid = TimeGrid(1.0, 4)
    data = ProblemData(zero, one)
    with pytest.raises(ValueError):
        solve_forward(mesh, ops, grid, 0.5, PotentialPath.constant(1.0, 3), data)
    with pytest.raises(ValueError):
        solve_forward(mesh, assemble(build_mesh(5)), grid, 0.5, PotentialPath.constant(1.0, 4), data)
    with pytest.raises(ValueError):
        solve_forward(mesh, ops, grid, 1.0, PotentialPath.constant(1.0, 4), data)
    with pytest.raises(ValueError):
        solve_forward(mesh, ops, grid, 0.5, PotentialPath.constant(1.0, 4), data, source="bogus")


# --- spectral oracle self-checks ----------------------------------------


def test_oracle_heat_limit():
    data = ProblemData(zero, one)
    t = np.linspace(0, 2, 9)
    assert np.allclose(exact_constant_coeff_solution(1.0, 1.0, data, 4, 0.3, t), np.exp(-t), atol=1e-12)


def test_oracle_two_mode_closed_form():
    data = ProblemData(zero, cosine_u0)
    x = np.linspace(0, 1, 7)[:, None]
    t = np.array([0.0, 0.01, 0.1, 0.5])[None, :]
    exact = 2 + mittag_leffler(0.5, -4 * np.pi**2 * np.sqrt(t)) * np.cos(2 * np.pi * x)
    got = exact_constant_coeff_solution(0.5, 0.0, data, 8, x, t)
    assert np.allclose(got, exact, atol=1e-12)


def test_oracle_source_only_mode_zero():
    # u0 = 0, f = 1, rho = 0: u = t^alpha / Gamma(1 + alpha)
    data = ProblemData(one, zero)
    t = np.array([0.1, 0.4])
    got = exact_constant_coeff_solution(0.3, 0.0, data, 3, 0.5, t)
    assert np.allclose(got, t**0.3 / math.gamma(1.3), atol=1e-12)


# --- solver behaviour ----------------------------------------------------


@given(st.integers(2, 24), st.integers(1, 24), st.floats(0.05, 0.95), st.floats(0.1, 10))
@settings(max_examples=25, deadline=None)
def test_constant_preservation(M, N, alpha, c):
    data = ProblemData(zero, lambda x: c * np.ones_like(x))
    U = run(M, N, alpha, 0.0, data).fields
    assert np.allclose(U, c, rtol=1e-13, atol=0)


def test_positivity_with_default_data():
    for pot in (0.0, 2.5, 5.0):
        U = run(16, 64, 0.5, pot, default_problem()).fields
        assert U.min() > 0


def test_two_mode_oracle_convergence():
    data = ProblemData(zero, cosine_u0)
    errs = []
    for M, N in ((25, 64), (50, 256), (100, 1024)):
        traj = run(M, N, 0.5, 0.0, data)
        t = traj.grid.t
        mask = t >= 0.125
        ex = exact_constant_coeff_solution(0.5, 0.0, data, 4, traj.mesh.nodes[None, :], t[mask][:, None])
        errs.append(np.abs(traj.fields[mask] - ex).max())
    assert errs[0] > errs[1] > errs[2]
    assert errs[-1] < 1e-3


@pytest.mark.parametrize("alpha", [0.25, 0.5, 0.75])
@pytest.mark.parametrize("rho0", [0.0, 1.0, 2.0])
def test_oracle_agreement_under_refinement(alpha, rho0):
    data = default_problem()
    errs = []
    for M, N in ((20, 32), (40, 128), (80, 512)):
        traj = run(M, N, alpha, rho0, data)
        t = traj.grid.t
        mask = t >= 0.125
        ex = exact_constant_coeff_solution(alpha, rho0, data, 40, traj.mesh.nodes[None, :], t[mask][:, None])
        errs.append(np.abs(traj.fields[mask] - ex).max())
    assert errs[0] > errs[1] > errs[2]


def _trace(M, N, T=0.5, alpha=0.5):
    mesh = build_mesh(M)
    grid = TimeGrid(T, N)
    rho = PotentialPath.from_function(lambda t: math.exp(math.cos(5 * t)), grid)
    return solve(mesh, assemble(mesh), grid, alpha, rho, default_problem())


def test_temporal_self_convergence():
    # differences at t = T/2 and T between N and 2N
    Ns = [32, 64, 128, 256, 512]
    fields = [_trace(16, N).fields for N in Ns]
    diffs = []
    for a, b in zip(fields, fields[1:]):
        na = a.shape[0] - 1
        idx = [na // 2, na]
        diffs.append(np.abs(a[idx] - b[[2 * i for i in idx]]).max())
    rates = np.log2(np.array(diffs[:-1]) / diffs[1:])
    assert 0.8 <= rates[-1] <= 1.2


def test_spatial_self_convergence():
    Ms = [8, 16, 32, 64]
    fields = [_trace(M, 64).fields[-1] for M in Ms]
    diffs = [np.abs(a - b[::2]).max() for a, b in zip(fields, fields[1:])]
    rates = np.log2(np.array(diffs[:-1]) / diffs[1:])
    assert 1.7 <= rates[-1] <= 2.3


def test_interpolate_source_mode():
    mesh = build_mesh(10)
    ops = assemble(mesh)
    grid = TimeGrid(0.5, 20)
    rho = PotentialPath.constant(1.0, 20)
    data = default_problem()
    a = solve_forward(mesh, ops, grid, 0.5, rho, data).fields
    b = solve_forward(mesh, ops, grid, 0.5, rho, data, source="interpolate").fields
    assert 0 < np.abs(a - b).max() < 1e-2


# --- lagged nonlinear scheme ---------------------------------------------


def test_nonlinear_with_constant_source_matches_linear():
    mesh = build_mesh(12)
    ops = assemble(mesh)
    grid = TimeGrid(1.0, 40)
    rho = PotentialPath.from_function(lambda t: 1 + t, grid)
    lin = solve_forward(mesh, ops, grid, 0.4, rho, ProblemData(lambda x: 0.7 + 0 * x, cosine_u0))
    non = solve_forward_nonlinear(mesh, ops, grid, 0.4, rho, lambda u: 0.7 + 0 * u, cosine_u0)
    assert np.allclose(lin.fields, non.fields, atol=1e-13)


def test_nonlinear_step_uses_previous_field():
    # with f(u) = u the first step solves (A + rho M) U1 = M U0 + history
    mesh = build_mesh(6)
    ops = assemble(mesh)
    grid = TimeGrid(1.0, 1)
    alpha = 0.5
    rho = PotentialPath.constant(0.0, 1)
    traj = solve_forward_nonlinear(mesh, ops, grid, alpha, rho, lambda u: u, cosine_u0)
    U0, U1 = traj.fields
    M, S = ops.mass.toarray(), ops.stiffness.toarray()
    lhs = (M + S) @ U1  # tau = 1, omega_0 = 1
    rhs = M @ U0 + M @ U0  # load M f(U0) plus sigma_1 - sum_{j>=1} w_j U0 = U0
    assert np.allclose(lhs, rhs, atol=1e-12)


def test_nonlinear_dispatch():
    data = default_problem(nonlinear=True)
    traj = run(8, 16, 0.5, 1.0, data, T=1.0)
    assert traj.fields.shape == (17, 9)
    assert np.all(np.isfinite(traj.fields))
