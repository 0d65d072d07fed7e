import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from fracipp.fem1d import (
    assemble,
    build_mesh,
    discrete_laplacian_apply,
    eval_at_point,
    gauss_load,
    interpolate,
    l2_project,
    ritz_project,
)

meshes = st.integers(2, 64)


def dense(ops):
    return ops.mass.toarray(), ops.stiffness.toarray()


# --- mesh and matrices ---------------------------------------------------


def test_mesh_layout():
    m = build_mesh(8)
    assert m.n_nodes == 9 and m.h == 0.125
    assert np.all(np.diff(m.nodes) > 0)
    assert np.allclose(np.diff(m.nodes), m.h, rtol=0, atol=1e-15)


@pytest.mark.parametrize("m", [0, 1, 2.5, -3])
def test_mesh_rejects(m):
    with pytest.raises(ValueError):
        build_mesh(m)


def test_element_matrices():
    M, S = dense(assemble(build_mesh(2)))
    h = 0.5
    assert np.allclose(M, h / 6 * np.array([[2, 1, 0], [1, 4, 1], [0, 1, 2]]), atol=1e-15)
    assert np.allclose(S, 1 / h * np.array([[1, -1, 0], [-1, 2, -1], [0, -1, 1]]), atol=1e-15)


def test_hat_integrals_sum_to_one():
    ops = assemble(build_mesh(17))
    assert ops.hat_integrals.sum() == pytest.approx(1.0, rel=1e-14)


@given(meshes, st.integers(0, 2**31))
@settings(max_examples=40)
def test_symmetry_and_semidefinite(m, seed):
    ops = assemble(build_mesh(m))
    M, S = dense(ops)
    rng = np.random.default_rng(seed)
    u, v = rng.normal(size=(2, m + 1))
    assert u @ S @ v == pytest.approx(v @ S @ u, rel=1e-12, abs=1e-12)
    assert u @ M @ v == pytest.approx(v @ M @ u, rel=1e-12, abs=1e-12)
    assert u @ S @ u > 0
    c = np.full(m + 1, rng.normal())
    assert abs(c @ S @ c) < 1e-12 * m
    assert np.allclose(ops.stiff_matvec(u), S @ u, atol=1e-12 * m)
    assert np.allclose(ops.mass_matvec(u), M @ u, atol=1e-14)
    assert np.allclose(M @ ops.mass_solve(u), u, atol=1e-12)


# --- loads and projections -----------------------------------------------


def test_gauss_load_exact_on_cubic():
    # 2-point Gauss integrates f * phi exactly for quadratic f; compare against 5 points on a cubic*hat
    mesh = build_mesh(7)
    f = lambda x: 1 + x - 3 * x**2
    assert np.allclose(gauss_load(mesh, f, 2), gauss_load(mesh, f, 5), rtol=1e-14, atol=1e-15)


def test_gauss_order_sanity():
    mesh = build_mesh(40)
    f = lambda x: np.exp(np.sin(3 * x)) + 1
    a, b = gauss_load(mesh, f, 3), gauss_load(mesh, f, 5)
    assert np.max(np.abs(a - b)) / np.max(np.abs(b)) < 1e-10


def _random_pl(m, seed):
    mesh = build_mesh(m)
    vals = np.random.default_rng(seed).normal(size=m + 1)
    return mesh, vals, lambda x: np.interp(x, mesh.nodes, vals)


@given(meshes, st.integers(0, 2**31))
@settings(max_examples=30, deadline=None)
def test_projections_reproduce_piecewise_linears(m, seed):
    mesh, vals, f = _random_pl(m, seed)
    ops = assemble(mesh)
    assert np.allclose(l2_project(mesh, ops, f), vals, rtol=0, atol=1e-12)
    assert np.allclose(ritz_project(mesh, ops, f), vals, rtol=0, atol=1e-12)


def test_ritz_mean_and_derivative_path():
    mesh = build_mesh(32)
    ops = assemble(mesh)
    f = lambda x: 2 + np.cos(2 * np.pi * x)
    df = lambda x: -2 * np.pi * np.sin(2 * np.pi * x)
    a = ritz_project(mesh, ops, f)
    b = ritz_project(mesh, ops, f, df=df, n_points=5)
    assert ops.hat_integrals @ a == pytest.approx(2.0, rel=1e-13)
    # in 1D the Ritz projection interpolates at the nodes (up to the mean shift)
    assert np.allclose(a, b, atol=1e-6)
    assert np.allclose(a - a.mean(), interpolate(mesh, f) - interpolate(mesh, f).mean(), atol=1e-3)


def test_ritz_second_order():
    f = lambda x: np.cos(np.pi * x) + x**3
    errs = []
    for m in (16, 32, 64, 128):
        mesh = build_mesh(m)
        errs.append(np.max(np.abs(ritz_project(mesh, assemble(mesh), f) - f(mesh.nodes))))
    rates = np.log2(np.array(errs[:-1]) / errs[1:])
    assert np.all(rates > 1.8)


# --- discrete Laplacian --------------------------------------------------


def test_laplacian_of_constant_vanishes():
    ops = assemble(build_mesh(12))
    assert np.allclose(discrete_laplacian_apply(ops, np.full(13, 3.3)), 0.0, atol=1e-12)


def test_laplacian_of_quadratic():
    # Delta(x - x^2) = -2; refine and look at interior nodes away from the boundary
    errs = []
    for m in (20, 40, 80, 160):
        mesh = build_mesh(m)
        ops = assemble(mesh)
        w = discrete_laplacian_apply(ops, mesh.nodes - mesh.nodes**2)
        inner = (mesh.nodes > 0.25) & (mesh.nodes < 0.75)
        errs.append(np.max(np.abs(w[inner] + 2.0)))
    assert errs[-1] < 1e-3
    assert all(b < a for a, b in zip(errs, errs[1:]))


@given(meshes, st.floats(-3, 3), st.floats(-3, 3), st.integers(0, 2**31))
@settings(max_examples=30)
def test_laplacian_linear(m, a, b, seed):
    ops = assemble(build_mesh(m))
    u, v = np.random.default_rng(seed).normal(size=(2, m + 1))
    lhs = discrete_laplacian_apply(ops, a * u + b * v)
    rhs = a * discrete_laplacian_apply(ops, u) + b * discrete_laplacian_apply(ops, v)
    assert np.allclose(lhs, rhs, atol=1e-9 * m * m)


def test_laplacian_stacked_fields():
    ops = assemble(build_mesh(9))
    U = np.random.default_rng(1).normal(size=(10, 3))
    W = discrete_laplacian_apply(ops, U)
    assert np.allclose(W[:, 1], discrete_laplacian_apply(ops, U[:, 1]))
    with pytest.raises(ValueError):
        discrete_laplacian_apply(ops, np.zeros(4))


# --- point evaluation ----------------------------------------------------


def test_eval_examples():
    mesh = build_mesh(2)
    assert eval_at_point(mesh, [0.0, 1.0, 0.0], 0.25) == 0.5
    assert eval_at_point(mesh, [4.0, 5.0, 6.0], 1.0) == 6.0
    assert eval_at_point(mesh, [4.0, 5.0, 6.0], 0.5) == 5.0


@given(meshes, st.floats(0, 1), st.floats(-10, 10))
def test_eval_constant(m, x0, c):
    assert eval_at_point(build_mesh(m), np.full(m + 1, c), x0) == pytest.approx(c, abs=1e-12)


@pytest.mark.parametrize("x0", [-0.1, 1.1])
def test_eval_rejects(x0):
    with pytest.raises(ValueError):
        eval_at_point(build_mesh(4), np.zeros(5), x0)
