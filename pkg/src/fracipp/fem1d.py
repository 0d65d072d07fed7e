"""Piecewise-linear finite elements on the unit interval with homogeneous
Neumann conditions.

Nodal fields are plain 1-D numpy arrays of length ``M + 1`` holding the
coefficients in the hat basis. All matrices are tridiagonal; solves go through
LAPACK banded routines.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy import linalg, sparse

__all__ = [
    "Mesh1D",
    "FemOperators",
    "build_mesh",
    "assemble",
    "gauss_load",
    "l2_project",
    "ritz_project",
    "discrete_laplacian_apply",
    "eval_at_point",
    "interpolate",
]


@dataclass(frozen=True)
class Mesh1D:
    m_intervals: int
    h: float = field(init=False)
    nodes: np.ndarray = field(init=False, repr=False)

    def __post_init__(self):
        m = self.m_intervals
        if int(m) != m or m < 2:
            raise ValueError(f"need at least 2 intervals, got {m}")
        object.__setattr__(self, "m_intervals", int(m))
        object.__setattr__(self, "h", 1.0 / int(m))
        nodes = np.linspace(0.0, 1.0, int(m) + 1)
        nodes.setflags(write=False)
        object.__setattr__(self, "nodes", nodes)

    @property
    def n_nodes(self) -> int:
        return self.m_intervals + 1


@dataclass(frozen=True)
class FemOperators:
    """Mass and stiffness matrices stored as (diagonal, off-diagonal) pairs."""

    mesh: Mesh1D
    mass_diag: np.ndarray
    mass_off: np.ndarray
    stiff_diag: np.ndarray
    stiff_off: np.ndarray

    @property
    def mass(self) -> sparse.csr_matrix:
        return sparse.diags(
            [self.mass_off, self.mass_diag, self.mass_off], [-1, 0, 1], format="csr"
        )

    @property
    def stiffness(self) -> sparse.csr_matrix:
        return sparse.diags(
            [self.stiff_off, self.stiff_diag, self.stiff_off], [-1, 0, 1], format="csr"
        )

    @property
    def hat_integrals(self) -> np.ndarray:
        """:math:`\\int_0^1 \\phi_i`, equal to the row sums of the mass matrix."""
        w = np.full(self.mesh.n_nodes, self.mesh.h)
        w[0] = w[-1] = 0.5 * self.mesh.h
        return w

    def mass_matvec(self, u):
        return _tri_matvec(self.mass_diag, self.mass_off, u)

    def stiff_matvec(self, u):
        return _tri_matvec(self.stiff_diag, self.stiff_off, u)

    def mass_solve(self, b):
        """Solve ``M x = b``; ``b`` may carry extra trailing columns."""
        return linalg.solveh_banded(_upper_band(self.mass_diag, self.mass_off), b)


def _tri_matvec(diag, off, u):
    u = np.asarray(u, dtype=float)
    out = diag.reshape((-1,) + (1,) * (u.ndim - 1)) * u
    o = off.reshape((-1,) + (1,) * (u.ndim - 1))
    out[:-1] += o * u[1:]
    out[1:] += o * u[:-1]
    return out


def _upper_band(diag, off):
    ab = np.zeros((2, diag.shape[0]))
    ab[0, 1:] = off
    ab[1] = diag
    return ab


def build_mesh(m_intervals: int) -> Mesh1D:
    return Mesh1D(m_intervals)


def assemble(mesh: Mesh1D) -> FemOperators:
    """Exact mass and stiffness matrices for the hat basis, no rows eliminated."""
    h = mesh.h
    n = mesh.n_nodes
    md = np.full(n, 4.0 * h / 6.0)
    md[0] = md[-1] = 2.0 * h / 6.0
    mo = np.full(n - 1, h / 6.0)
    sd = np.full(n, 2.0 / h)
    sd[0] = sd[-1] = 1.0 / h
    so = np.full(n - 1, -1.0 / h)
    for a in (md, mo, sd, so):
        a.setflags(write=False)
    return FemOperators(mesh, md, mo, sd, so)


_GAUSS = {k: np.polynomial.legendre.leggauss(k) for k in (2, 3, 4, 5)}


def gauss_load(mesh: Mesh1D, f, n_points: int = 3) -> np.ndarray:
    """Load vector :math:`(f, \\phi_i)` by ``n_points``-point Gauss-Legendre per element."""
    xi, wi = _GAUSS[n_points]
    h = mesh.h
    left = mesh.nodes[:-1, None]
    s = 0.5 * (xi + 1.0)  # reference coordinate in [0, 1]
    x = left + h * s
    fx = np.asarray(f(x), dtype=float) * np.ones_like(x)
    wts = 0.5 * h * wi
    load = np.zeros(mesh.n_nodes)
    load[:-1] += (fx * (1.0 - s) * wts).sum(axis=1)
    load[1:] += (fx * s * wts).sum(axis=1)
    return load


def interpolate(mesh: Mesh1D, f) -> np.ndarray:
    """Nodal interpolant of ``f``."""
    return np.asarray(f(mesh.nodes), dtype=float) * np.ones(mesh.n_nodes)


def l2_project(mesh: Mesh1D, ops: FemOperators, f, n_points: int = 3) -> np.ndarray:
    """:math:`L^2` projection :math:`P_h f`."""
    load = gauss_load(mesh, f, n_points)
    p = ops.mass_solve(load)
    resid = np.linalg.norm(ops.mass_matvec(p) - load)
    if resid > 1e-12 * max(np.linalg.norm(load), 1e-300):
        raise np.linalg.LinAlgError(f"mass solve residual too large: {resid:.3e}")
    return p


def ritz_project(mesh: Mesh1D, ops: FemOperators, f, df=None, n_points: int = 3) -> np.ndarray:
    """Mean-preserving Ritz projection :math:`R_h f`.

    The gradient right-hand side :math:`(f', \\phi_i')` is evaluated by Gauss
    quadrature of ``df`` when a derivative is supplied, and otherwise exactly
    from nodal increments of ``f`` (the hat gradients are constant per element).
    The singular Neumann system is solved with the first node pinned and the
    constant then fixed by :math:`\\int R_h f = \\int f`.
    """
    h = mesh.h
    if df is None:
        incr = np.diff(interpolate(mesh, f))
    else:
        xi, wi = _GAUSS[n_points]
        x = mesh.nodes[:-1, None] + h * 0.5 * (xi + 1.0)
        dfx = np.asarray(df(x), dtype=float) * np.ones_like(x)
        incr = (dfx * 0.5 * h * wi).sum(axis=1)
    rhs = np.zeros(mesh.n_nodes)
    rhs[:-1] -= incr / h
    rhs[1:] += incr / h

    w = np.zeros(mesh.n_nodes)
    ab = _upper_band(ops.stiff_diag[1:], ops.stiff_off[1:])
    w[1:] = linalg.solveh_banded(ab, rhs[1:])

    target = float(gauss_load(mesh, f, max(n_points, 3)).sum())
    m = ops.hat_integrals
    w += (target - m @ w) / m.sum()
    mismatch = abs(m @ w - target)
    if mismatch > 1e-10 * abs(target) + 1e-12:
        raise ArithmeticError(f"Ritz projection mean constraint violated by {mismatch:.3e}")
    return w


def discrete_laplacian_apply(ops: FemOperators, u) -> np.ndarray:
    """Nodal coefficients of :math:`\\Delta_h u`, i.e. ``w`` with ``M w = -S u``.

    ``u`` may be a single field or an ``(M + 1, k)`` stack of fields.
    """
    u = np.asarray(u, dtype=float)
    if u.shape[0] != ops.mesh.n_nodes:
        raise ValueError(f"field has {u.shape[0]} entries, mesh has {ops.mesh.n_nodes} nodes")
    return ops.mass_solve(-ops.stiff_matvec(u))


def point_weights(mesh: Mesh1D, x0: float) -> tuple[int, float]:
    """Element index ``i`` and local weight ``s`` with
    ``u(x0) = (1 - s) u[i] + s u[i + 1]``."""
    if not 0.0 <= x0 <= 1.0:
        raise ValueError(f"observation point must lie in [0, 1], got {x0}")
    i = min(int(np.floor(x0 / mesh.h)), mesh.m_intervals - 1)
    s = (x0 - mesh.nodes[i]) / mesh.h
    if abs(s) < 1e-12:
        s = 0.0
    elif abs(s - 1.0) < 1e-12:
        s = 1.0
    return i, s


def eval_at_point(mesh: Mesh1D, u, x0: float):
    """Value of the piecewise-linear field at ``x0``. ``u`` may have trailing axes."""
    u = np.asarray(u, dtype=float)
    if u.shape[0] != mesh.n_nodes:
        raise ValueError(f"field has {u.shape[0]} entries, mesh has {mesh.n_nodes} nodes")
    i, s = point_weights(mesh, x0)
    if s == 0.0:
        return u[i].copy() if u.ndim > 1 else float(u[i])
    if s == 1.0:
        return u[i + 1].copy() if u.ndim > 1 else float(u[i + 1])
    val = (1.0 - s) * u[i] + s * u[i + 1]
    return val if u.ndim > 1 else float(val)
