"""Recovery of the potential from noisy observations at a single point by the
projected fixed-point map

    rho_{k+1}^n = clip((F_n + Delta_h u_h^n(x0; rho_k) - dbar^alpha g(t_n)) / g(t_n), 0, c)

where ``F_n`` is ``f(x0)`` for an ``x``-dependent source and
``f(u_h^{n-1}(x0; rho_k))`` for a source depending on ``u``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from . import forward
from .fem1d import FemOperators, Mesh1D, interpolate, point_weights
from .forward import DEFAULT_C_RHO_BAR, PotentialPath, ProblemData
from .fracquad import CqWeights, TimeGrid, caputo_becq, cq_weights
from .metrics import NormSpec, lp_norm

__all__ = [
    "NoisePositivityError",
    "Measurement",
    "SolverContext",
    "ReconstructionConfig",
    "ReconstructionReport",
    "add_noise",
    "cutoff",
    "fixed_point_step",
    "reconstruct",
]


class NoisePositivityError(ValueError):
    """The (noisy) observation is not strictly positive."""


@dataclass(frozen=True)
class Measurement:
    """Observations ``g(t_1..t_N)`` at ``x0`` plus the anchor ``g0`` at ``t_0``.

    ``epsilon`` is the absolute noise amplitude, ``delta_percent`` the relative
    level it was derived from, ``seed`` the generator seed (``None`` if exact).
    """

    grid: TimeGrid
    x0: float
    g: np.ndarray
    g0: float
    epsilon: float = 0.0
    delta_percent: float = 0.0
    seed: int | None = None

    def __post_init__(self):
        g = np.array(self.g, dtype=float, ndmin=1)
        if g.shape != (self.grid.N,):
            raise ValueError(f"expected {self.grid.N} observations, got shape {g.shape}")
        if np.any(~(g > 0)) or not self.g0 > 0:
            raise NoisePositivityError(
                f"observations must be strictly positive; min(g)={g.min():.6g}, g0={self.g0:.6g}"
            )
        g.setflags(write=False)
        object.__setattr__(self, "g", g)

    @property
    def samples(self) -> np.ndarray:
        """``g0, g^1, ..., g^N``."""
        return np.concatenate(([self.g0], self.g))


def add_noise(
    g_exact, delta_percent: float, seed: int, *, grid: TimeGrid, x0: float, g0: float
) -> Measurement:
    """``g + eps * xi`` with ``xi ~ U[-1, 1]`` i.i.d. and ``eps = max g * delta / 100``.

    The maximum runs over ``t_0..t_N`` (``g0`` included). Draws come from
    ``numpy.random.default_rng(seed)`` (PCG64), one ``uniform(-1, 1, N)`` call.
    The anchor ``g0`` stays noise-free.
    """
    g = np.asarray(g_exact, dtype=float)
    if delta_percent < 0:
        raise ValueError("delta_percent must be non-negative")
    if np.any(~(g > 0)) or not g0 > 0:
        raise NoisePositivityError("exact observations must be strictly positive")
    eps = max(float(g.max()), float(g0)) * delta_percent / 100.0
    if delta_percent == 0:
        noisy = g.copy()
    else:
        xi = np.random.default_rng(seed).uniform(-1.0, 1.0, g.shape[0])
        noisy = g + eps * xi
    if np.any(noisy <= 0):
        raise NoisePositivityError(
            f"noise level {delta_percent}% drives an observation non-positive; "
            "lower delta or choose another seed"
        )
    return Measurement(grid, x0, noisy, float(g0), eps, float(delta_percent), seed)


def cutoff(a, c_rho_bar: float):
    """Pointwise projection onto ``[0, c_rho_bar]``."""
    if not c_rho_bar > 0:
        raise ValueError("c_rho_bar must be positive")
    out = np.clip(a, 0.0, c_rho_bar)
    return float(out) if np.ndim(a) == 0 else out


@dataclass(frozen=True)
class SolverContext:
    """Everything the forward map needs besides the potential.

    ``source`` is ``"quadrature"`` (standard) or ``"interpolate"``; the latter
    also replaces ``f(x0)`` by the value of the nodal interpolant, which makes
    same-grid data an exact fixed point of the discrete map.
    """

    mesh: Mesh1D
    ops: FemOperators
    grid: TimeGrid
    alpha: float
    data: ProblemData
    source: str = "quadrature"
    weights: CqWeights = field(default=None, repr=False)

    def __post_init__(self):
        if self.weights is None:
            object.__setattr__(self, "weights", cq_weights(self.alpha, self.grid.N))
        if self.source not in ("quadrature", "interpolate"):
            raise ValueError(f"unknown source mode {self.source!r}")

    def solve(self, rho: PotentialPath) -> forward.Trajectory:
        return forward.solve(
            self.mesh, self.ops, self.grid, self.alpha, rho, self.data,
            weights=self.weights, source=self.source,
        )

    def point_vector(self) -> np.ndarray:
        """``l`` with ``l @ u = u(x0)`` for a nodal field ``u``."""
        i, s = point_weights(self.mesh, self.data.x0)
        ell = np.zeros(self.mesh.n_nodes)
        ell[i] += 1.0 - s
        if s:
            ell[i + 1] += s
        return ell

    def laplacian_row(self) -> np.ndarray:
        """``q`` with ``q @ u = (Delta_h u)(x0)``, i.e. ``q = -S M^{-1} l``."""
        return -self.ops.stiff_matvec(self.ops.mass_solve(self.point_vector()))

    def source_at_x0(self) -> float:
        if self.source == "interpolate":
            return float(self.point_vector() @ interpolate(self.mesh, self.data.f))
        return float(np.asarray(self.data.f(np.asarray(self.data.x0))))


@dataclass(frozen=True)
class ReconstructionConfig:
    c_rho_bar: float = DEFAULT_C_RHO_BAR
    p: float = 2.0
    omega: float = 0.0
    max_iters: int = 200
    rel_tol: float = 1e-10
    initial_guess: PotentialPath | None = None

    def __post_init__(self):
        if not self.c_rho_bar > 0:
            raise ValueError("c_rho_bar must be positive")
        if not 1 < self.p < math.inf:
            raise ValueError(f"p must lie in (1, inf), got {self.p}")
        if self.omega < 0:
            raise ValueError("omega must be non-negative")
        if int(self.max_iters) != self.max_iters or self.max_iters < 0:
            raise ValueError("max_iters must be a non-negative integer")
        if not self.rel_tol > 0:
            raise ValueError("rel_tol must be positive")
        g = self.initial_guess
        if g is not None and (np.any(g.values < 0) or np.any(g.values > self.c_rho_bar)):
            raise ValueError("initial guess lies outside the admissible box")


@dataclass
class ReconstructionReport:
    rho_star: PotentialPath
    iterations_used: int
    converged: bool
    change_lp: list = field(default_factory=list)
    change_lp_omega: list = field(default_factory=list)
    error_lp: list | None = None
    error_lp_omega: list | None = None

    @property
    def per_iteration_change(self):
        return list(zip(self.change_lp, self.change_lp_omega))


def _caputo_of_data(meas: Measurement, ctx: SolverContext):
    if meas.grid.N != ctx.grid.N or not math.isclose(meas.grid.T, ctx.grid.T):
        raise ValueError("measurement and solver context use different time grids")
    return caputo_becq(meas.samples, ctx.alpha, ctx.grid, ctx.weights)


def fixed_point_step(
    rho_k: PotentialPath,
    meas: Measurement,
    ctx: SolverContext,
    c_rho_bar: float | None = None,
    *,
    _dg=None,
) -> PotentialPath:
    """One application of the projected fixed-point map."""
    c = rho_k.bound if c_rho_bar is None else c_rho_bar
    if not math.isclose(meas.x0, ctx.data.x0):
        raise ValueError("measurement point differs from the solver's observation point")
    dg = _caputo_of_data(meas, ctx) if _dg is None else _dg
    U = ctx.solve(rho_k).fields
    lap = U[1:] @ ctx.laplacian_row()
    if ctx.data.nonlinear:
        u_prev = U[:-1] @ ctx.point_vector()
        F = np.asarray(ctx.data.f(u_prev), dtype=float)
    else:
        F = ctx.source_at_x0()
    new = cutoff((F + lap - dg) / meas.g, c)
    return PotentialPath(new, c)


def reconstruct(
    meas: Measurement,
    cfg: ReconstructionConfig,
    ctx: SolverContext,
    rho_true: PotentialPath | None = None,
) -> ReconstructionReport:
    """Iterate :func:`fixed_point_step` from ``cfg.initial_guess`` (constant 2 if
    unset) until the relative l^p change drops below ``cfg.rel_tol``."""
    N = ctx.grid.N
    rho = cfg.initial_guess
    if rho is None:
        rho = PotentialPath.constant(2.0, N, cfg.c_rho_bar)
    elif len(rho) != N:
        raise ValueError("initial guess length does not match the time grid")
    rho = PotentialPath(rho.values, cfg.c_rho_bar)
    plain = NormSpec(cfg.p, 0.0, ctx.grid.tau)
    weighted = NormSpec(cfg.p, cfg.omega, ctx.grid.tau)
    report = ReconstructionReport(rho, 0, False)
    if rho_true is not None:
        report.error_lp, report.error_lp_omega = [], []

    def record_error(r):
        if rho_true is not None:
            d = r.values - rho_true.values
            report.error_lp.append(lp_norm(d, plain))
            report.error_lp_omega.append(lp_norm(d, weighted))

    record_error(rho)
    dg = _caputo_of_data(meas, ctx)
    for k in range(cfg.max_iters):
        new = fixed_point_step(rho, meas, ctx, cfg.c_rho_bar, _dg=dg)
        d = new.values - rho.values
        change = lp_norm(d, plain)
        report.change_lp.append(change)
        report.change_lp_omega.append(lp_norm(d, weighted))
        record_error(new)
        scale = max(lp_norm(rho.values, plain), 1.0)
        rho = new
        report.iterations_used = k + 1
        if change / scale <= cfg.rel_tol:
            report.converged = True
            break
    report.rho_star = rho
    return report
