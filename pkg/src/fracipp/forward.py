"""Fully discrete solver for the subdiffusion problem with a time-dependent
potential

    d_t^alpha u - u_xx + rho(t) u = f   on (0, 1) x (0, T],  u_x = 0 at x = 0, 1,

with BECQ in time and P1 finite elements in space, plus a lagged variant for a
source depending on ``u`` and a spectral Mittag-Leffler solution for constant
``rho``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np
from scipy import linalg

from .fem1d import (
    FemOperators,
    Mesh1D,
    eval_at_point,
    gauss_load,
    interpolate,
    ritz_project,
)
from .fracquad import CqWeights, TimeGrid, cq_weights, gamma_fn, mittag_leffler

__all__ = [
    "PotentialPath",
    "ProblemData",
    "Trajectory",
    "solve_forward",
    "solve_forward_nonlinear",
    "exact_constant_coeff_solution",
    "DEFAULT_C_RHO_BAR",
]

DEFAULT_C_RHO_BAR = 5.0


@dataclass(frozen=True)
class PotentialPath:
    """Grid samples ``rho^1..rho^N`` constrained to ``[0, bound]``."""

    values: np.ndarray
    bound: float = DEFAULT_C_RHO_BAR

    def __post_init__(self):
        v = np.array(self.values, dtype=float, ndmin=1)
        if v.ndim != 1:
            raise ValueError("potential samples must be one-dimensional")
        if not self.bound > 0:
            raise ValueError(f"bound must be positive, got {self.bound}")
        if np.any(~np.isfinite(v)) or np.any(v < 0.0) or np.any(v > self.bound):
            raise ValueError(
                f"potential samples leave the admissible box [0, {self.bound}]: "
                f"range [{v.min():.6g}, {v.max():.6g}]"
            )
        v.setflags(write=False)
        object.__setattr__(self, "values", v)

    def __len__(self):
        return self.values.shape[0]

    @classmethod
    def constant(cls, value: float, N: int, bound: float = DEFAULT_C_RHO_BAR):
        return cls(np.full(N, float(value)), bound)

    @classmethod
    def from_function(cls, rho, grid: TimeGrid, bound: float = DEFAULT_C_RHO_BAR):
        """Sample ``rho`` at ``t_1..t_N``."""
        t = grid.t[1:]
        return cls(np.asarray([rho(s) for s in t], dtype=float), bound)


@dataclass(frozen=True)
class ProblemData:
    """Source ``f``, initial value ``u0`` and observation point ``x0``.

    ``f`` is a function of ``x`` for the linear problem and of ``u`` when
    ``nonlinear`` is set. Both callables must accept numpy arrays.
    """

    f: Callable
    u0: Callable
    x0: float = 0.0
    nonlinear: bool = False

    def __post_init__(self):
        if not 0.0 <= self.x0 <= 1.0:
            raise ValueError(f"x0 must lie in [0, 1], got {self.x0}")


@dataclass(frozen=True)
class Trajectory:
    """Nodal fields ``U^0..U^N`` stacked row-wise, shape ``(N + 1, M + 1)``."""

    grid: TimeGrid
    mesh: Mesh1D
    fields: np.ndarray = field(repr=False)

    def __post_init__(self):
        if self.fields.shape != (self.grid.N + 1, self.mesh.n_nodes):
            raise ValueError(f"trajectory shape {self.fields.shape} does not match grids")

    def __len__(self):
        return self.fields.shape[0]

    def at_point(self, x0: float) -> np.ndarray:
        """``u_h(x0, t_n)`` for ``n = 0..N``."""
        return np.asarray(eval_at_point(self.mesh, self.fields.T, x0))


def _check_context(mesh, ops, grid, alpha, rho):
    if ops.mesh.m_intervals != mesh.m_intervals:
        raise ValueError("operators were assembled on a different mesh")
    if not 0.0 < alpha < 1.0:
        raise ValueError(f"alpha must lie in (0, 1), got {alpha}")
    if len(rho) != grid.N:
        raise ValueError(f"potential has {len(rho)} samples, grid has N={grid.N}")


def _weights(alpha, grid, weights):
    if weights is None:
        return cq_weights(alpha, grid.N)
    if weights.alpha != alpha or len(weights) < grid.N + 1:
        raise ValueError("precomputed weights do not match alpha or grid")
    return weights


def _march(ops, grid, alpha, rho, U0, load_fn, weights):
    """Time-stepping shared by the linear and lagged schemes.

    ``load_fn(n, U)`` returns the load vector for step ``n`` given the history.
    """
    N = grid.N
    w = weights.weights[: N + 1]
    sigma = np.cumsum(w)
    w_rev = np.ascontiguousarray(w[::-1])  # w_rev[k] = w_{N-k}
    scale = grid.tau ** (-alpha)

    n_nodes = U0.shape[0]
    U = np.empty((N + 1, n_nodes))
    U[0] = U0
    base = np.zeros((2, n_nodes))
    base[0, 1:] = scale * w[0] * ops.mass_off + ops.stiff_off
    base[1] = scale * w[0] * ops.mass_diag + ops.stiff_diag
    ab = np.empty_like(base)
    for n in range(1, N + 1):
        hist = w_rev[N - n : N] @ U[:n]  # sum_{j=1}^n w_j U^{n-j}
        rhs = load_fn(n, U) + scale * ops.mass_matvec(sigma[n] * U0 - hist)
        r = rho[n - 1]
        ab[0, 1:] = base[0, 1:] + r * ops.mass_off
        ab[1] = base[1] + r * ops.mass_diag
        try:
            U[n] = linalg.solveh_banded(ab, rhs, check_finite=False)
        except linalg.LinAlgError as exc:
            raise linalg.LinAlgError(
                f"step {n}: system matrix not positive definite (rho={r})"
            ) from exc
    return U


def solve_forward(
    mesh: Mesh1D,
    ops: FemOperators,
    grid: TimeGrid,
    alpha: float,
    rho: PotentialPath,
    data: ProblemData,
    *,
    weights: CqWeights | None = None,
    source: str = "quadrature",
    U0: np.ndarray | None = None,
) -> Trajectory:
    """Solve the fully discrete linear problem.

    ``source="quadrature"`` assembles ``(f, phi_i)`` by Gauss quadrature;
    ``source="interpolate"`` uses the mass-weighted nodal interpolant of ``f``
    so that ``P_h f`` equals ``I_h f`` exactly. ``U0`` defaults to ``R_h u0``.
    """
    if data.nonlinear:
        raise ValueError("use solve_forward_nonlinear for a source depending on u")
    _check_context(mesh, ops, grid, alpha, rho)
    weights = _weights(alpha, grid, weights)
    if source == "quadrature":
        load = gauss_load(mesh, data.f)
    elif source == "interpolate":
        load = ops.mass_matvec(interpolate(mesh, data.f))
    else:
        raise ValueError(f"unknown source mode {source!r}")
    if U0 is None:
        U0 = ritz_project(mesh, ops, data.u0)
    U = _march(ops, grid, alpha, rho.values, np.asarray(U0, float), lambda n, U: load, weights)
    return Trajectory(grid, mesh, U)


def solve_forward_nonlinear(
    mesh: Mesh1D,
    ops: FemOperators,
    grid: TimeGrid,
    alpha: float,
    rho: PotentialPath,
    f_of_u: Callable,
    u0: Callable,
    *,
    weights: CqWeights | None = None,
    U0: np.ndarray | None = None,
) -> Trajectory:
    """Lagged scheme for a source ``f(u)``: step ``n`` uses ``M f(U^{n-1})``."""
    _check_context(mesh, ops, grid, alpha, rho)
    weights = _weights(alpha, grid, weights)
    if U0 is None:
        U0 = ritz_project(mesh, ops, u0)

    def load(n, U):
        return ops.mass_matvec(np.asarray(f_of_u(U[n - 1]), dtype=float) * np.ones(U.shape[1]))

    U = _march(ops, grid, alpha, rho.values, np.asarray(U0, float), load, weights)
    return Trajectory(grid, mesh, U)


def solve(mesh, ops, grid, alpha, rho, data: ProblemData, **kw) -> Trajectory:
    """Dispatch on ``data.nonlinear``."""
    if data.nonlinear:
        kw.pop("source", None)
        return solve_forward_nonlinear(mesh, ops, grid, alpha, rho, data.f, data.u0, **kw)
    return solve_forward(mesh, ops, grid, alpha, rho, data, **kw)


def _cosine_coefficients(fn, n_modes, panels=400, order=8):
    # composite Gauss-Legendre on [0, 1]
    xi, wi = np.polynomial.legendre.leggauss(order)
    a = np.arange(panels) / panels
    x = (a[:, None] + (xi + 1.0) / (2 * panels)).ravel()
    wts = np.tile(wi / (2 * panels), panels)
    fx = np.asarray(fn(x), dtype=float) * np.ones_like(x)
    k = np.arange(n_modes + 1)
    basis = np.cos(np.pi * k[:, None] * x[None, :])
    basis[1:] *= math.sqrt(2.0)
    return basis @ (wts * fx)


def exact_constant_coeff_solution(alpha, rho0, data: ProblemData, n_modes: int, x, t):
    """Eigen-expansion of the solution for constant ``rho = rho0`` and a source
    ``f(x)``, truncated after ``n_modes`` Neumann cosine modes.

    ``x`` and ``t`` broadcast against each other. ``alpha = 1`` gives the
    classical heat equation.
    """
    if int(n_modes) != n_modes or n_modes < 1:
        raise ValueError(f"n_modes must be a positive integer, got {n_modes}")
    if rho0 < 0:
        raise ValueError("rho0 must be non-negative")
    if data.nonlinear:
        raise ValueError("spectral solution requires a source depending on x only")
    x, t = np.broadcast_arrays(np.asarray(x, float), np.asarray(t, float))
    a = _cosine_coefficients(data.u0, n_modes)
    fk = _cosine_coefficients(data.f, n_modes)
    # time factors depend on t only; evaluate them once per distinct time
    t_uniq, t_idx = np.unique(t, return_inverse=True)
    t_idx = t_idx.reshape(t.shape)
    ta = t_uniq**alpha
    out = np.zeros(x.shape)
    for k in range(n_modes + 1):
        if abs(a[k]) < 1e-15 and abs(fk[k]) < 1e-15:
            continue
        mu = (k * math.pi) ** 2 + rho0
        phi = np.cos(k * math.pi * x) * (1.0 if k == 0 else math.sqrt(2.0))
        if mu == 0.0:
            mode = a[k] + fk[k] * ta / gamma_fn(1.0 + alpha)
        else:
            E = mittag_leffler(alpha, -mu * ta)
            mode = E * a[k] + (fk[k] / mu) * (1.0 - E)
        out = out + mode[t_idx] * phi
    return float(out) if out.ndim == 0 else out
