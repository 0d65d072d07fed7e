"""Experiment orchestration: synthetic data on refined grids, noise, reconstruction
runs and the parameter sweeps behind the convergence studies.

Default problem data (unit interval, homogeneous Neumann conditions)::

    f(x)  = 1 + 20 x^2 (1 - x)^2        (linear runs)
    f(u)  = (u - 1)(u - 3)              (nonlinear runs)
    u0(x) = 2 + cos(2 pi x)
"""

from __future__ import annotations

import dataclasses
import math
import warnings
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .fem1d import assemble, build_mesh
from .forward import DEFAULT_C_RHO_BAR, PotentialPath, ProblemData, solve
from .fracquad import TimeGrid
from .inverse import (
    Measurement,
    ReconstructionConfig,
    ReconstructionReport,
    SolverContext,
    add_noise,
    reconstruct,
)
from .metrics import NormSpec, empirical_rate, fitted_rate, lp_norm

__all__ = [
    "POTENTIALS",
    "ExperimentConfig",
    "SweepResult",
    "builtin_potential",
    "default_problem",
    "generate_data",
    "couple_parameters",
    "coupling_exponents",
    "run_reconstruction",
    "run_sweep",
]

POTENTIALS = ("rho1", "rho2", "rho3", "custom")
SWEEP_KINDS = ("spatial", "temporal", "noise", "tau_ucurve", "iteration_decay")


def source_linear(x):
    x = np.asarray(x, dtype=float)
    return 1.0 + 20.0 * x**2 * (1.0 - x) ** 2


def source_nonlinear(u):
    u = np.asarray(u, dtype=float)
    return (u - 1.0) * (u - 3.0)


def initial_value(x):
    return 2.0 + np.cos(2.0 * np.pi * np.asarray(x, dtype=float))


def builtin_potential(pid: str, t: float, T: float = 0.5, custom=None) -> float:
    """Test potentials on ``[0, T]``.

    ``rho1`` is ``exp(cos 5t)``; ``rho2`` a continuous zig-zag with corners at
    ``T/4, T/2, 3T/4``; ``rho3`` a step function taking 1, 2.5, 1.5, 2 on the
    quarters (left-closed pieces). ``custom`` evaluates the supplied callable.
    """
    if pid == "rho1":
        return math.exp(math.cos(5.0 * t))
    if pid == "rho2":
        s = 8.0 / T
        if t <= T / 4:
            return s * t + 0.7
        if t <= T / 2:
            return -s * t + 4.7
        if t <= 3 * T / 4:
            return s * t - 3.3
        return -s * t + 8.7
    if pid == "rho3":
        if t < T / 4:
            return 1.0
        if t < T / 2:
            return 2.5
        if t < 3 * T / 4:
            return 1.5
        return 2.0
    if pid == "custom":
        if custom is None:
            raise ValueError("potential 'custom' needs a callable or a samples file")
        return float(custom(t))
    raise ValueError(f"unknown potential {pid!r}; expected one of {POTENTIALS}")


def default_problem(x0: float = 0.25, nonlinear: bool = False) -> ProblemData:
    if nonlinear:
        return ProblemData(source_nonlinear, initial_value, x0, nonlinear=True)
    return ProblemData(source_linear, initial_value, x0)


@dataclass(frozen=True)
class ExperimentConfig:
    """One reconstruction experiment.

    Data are generated on ``(N * n_fine_ratio, M * m_fine_ratio)`` so that every
    run time point is a fine time point. With ``source="quadrature"`` both
    ratios must be at least 4; ``source="interpolate"`` (same-grid self-test)
    allows ratio 1.
    """

    alpha: float = 0.5
    T: float = 0.5
    potential: str = "rho1"
    nonlinear: bool = False
    x0: float = 0.25
    N: int = 256
    M: int = 32
    n_fine_ratio: int = 8
    m_fine_ratio: int = 4
    delta_percent: float = 0.0
    seeds: tuple = (0,)
    p: float = 2.0
    omega: float = 0.0
    c_rho_bar: float = DEFAULT_C_RHO_BAR
    max_iters: int = 200
    rel_tol: float | None = None
    initial_guess: float = 2.0
    source: str = "quadrature"
    custom_potential: object = field(default=None, compare=False, repr=False)
    problem_data: ProblemData | None = field(default=None, compare=False, repr=False)

    def __post_init__(self):
        object.__setattr__(self, "seeds", tuple(int(s) for s in self.seeds))
        if not 0 < self.alpha < 1:
            raise ValueError(f"alpha must lie in (0, 1), got {self.alpha}")
        if self.potential not in POTENTIALS:
            raise ValueError(f"unknown potential {self.potential!r}")
        for name in ("N", "M", "n_fine_ratio", "m_fine_ratio"):
            v = getattr(self, name)
            if int(v) != v or v < 1:
                raise ValueError(f"{name} must be a positive integer, got {v}")
        if self.source == "quadrature" and min(self.n_fine_ratio, self.m_fine_ratio) < 4:
            raise ValueError("standard runs need data grids at least 4x finer in N and M")
        if self.source not in ("quadrature", "interpolate"):
            raise ValueError(f"unknown source mode {self.source!r}")
        if self.delta_percent < 0:
            raise ValueError("delta_percent must be non-negative")
        if not self.seeds:
            raise ValueError("at least one seed is required")
        pd = self.problem_data
        if pd is not None and (pd.x0 != self.x0 or pd.nonlinear != self.nonlinear):
            raise ValueError("problem_data disagrees with x0 or nonlinear")

    @property
    def tolerance(self) -> float:
        if self.rel_tol is not None:
            return self.rel_tol
        return 1e-8 if self.nonlinear else 1e-10

    def problem(self) -> ProblemData:
        """``problem_data`` if given (its ``x0`` must agree), else the default data."""
        if self.problem_data is not None:
            return self.problem_data
        return default_problem(self.x0, self.nonlinear)

    def rho_fn(self):
        return lambda t: builtin_potential(self.potential, t, self.T, self.custom_potential)

    def run_grid(self) -> TimeGrid:
        return TimeGrid(self.T, self.N)

    def true_path(self, grid: TimeGrid | None = None) -> PotentialPath:
        grid = grid or self.run_grid()
        return PotentialPath.from_function(self.rho_fn(), grid, self.c_rho_bar)

    def to_dict(self) -> dict:
        d = dataclasses.asdict(self)
        d.pop("custom_potential")
        d.pop("problem_data")
        d["seeds"] = list(self.seeds)
        return d


def _observe(cfg: ExperimentConfig, N_fine: int, M_fine: int) -> np.ndarray:
    """``u_h(x0, t)`` on the fine time grid, ``N_fine + 1`` samples."""
    grid = TimeGrid(cfg.T, N_fine)
    mesh = build_mesh(M_fine)
    rho = PotentialPath.from_function(cfg.rho_fn(), grid, cfg.c_rho_bar)
    traj = solve(mesh, assemble(mesh), grid, cfg.alpha, rho, cfg.problem(), source=cfg.source)
    return traj.at_point(cfg.x0)


def _restrict(trace, N_fine, grid: TimeGrid, x0) -> Measurement:
    if N_fine % grid.N:
        raise ValueError(f"run grid N={grid.N} is not nested in fine grid N={N_fine}")
    sub = trace[:: N_fine // grid.N]
    return Measurement(grid, x0, sub[1:], float(sub[0]))


def generate_data(cfg: ExperimentConfig) -> Measurement:
    """Exact observations at the run time points, computed on the refined grid.

    ``g0`` is the refined solution at ``(x0, 0)``.
    """
    N_fine = cfg.N * cfg.n_fine_ratio
    trace = _observe(cfg, N_fine, cfg.M * cfg.m_fine_ratio)
    return _restrict(trace, N_fine, cfg.run_grid(), cfg.x0)


def coupling_exponents(alpha: float, p: float = 2.0) -> tuple[float, float]:
    """Exponents ``(a, b)`` in ``tau ~ delta^a``, ``h ~ delta^b`` that balance the
    discretisation and noise terms of the error bound."""
    return p / (p * alpha + 1.0), 1.0 / (2.0 * p * alpha + 2.0)


def couple_parameters(
    delta_percent: float,
    alpha: float,
    p: float = 2.0,
    T: float = 0.5,
    c_tau: float = 1.0,
    c_h: float = 1.0,
    min_N: int = 2,
    min_M: int = 4,
) -> tuple[int, int]:
    """Step count ``N`` and interval count ``M`` for a relative noise level.

    ``delta = delta_percent / 100``; ``tau = c_tau delta^a`` and ``h = c_h delta^b``
    are rounded to the nearest powers of two in ``N = T / tau`` and ``M = 1 / h``.
    """
    if not delta_percent > 0:
        raise ValueError("parameter coupling needs a positive noise level")
    a, b = coupling_exponents(alpha, p)
    delta = delta_percent / 100.0
    tau = c_tau * delta**a
    h = c_h * delta**b
    N = max(min_N, 2 ** round(math.log2(T / tau)))
    M = max(min_M, 2 ** round(math.log2(1.0 / h)))
    return int(N), int(M)


def _context(cfg: ExperimentConfig, N: int, M: int, source: str | None = None):
    mesh = build_mesh(M)
    return SolverContext(
        mesh, assemble(mesh), TimeGrid(cfg.T, N), cfg.alpha, cfg.problem(),
        source=source or cfg.source,
    )


def _recon_config(cfg: ExperimentConfig, N: int) -> ReconstructionConfig:
    return ReconstructionConfig(
        c_rho_bar=cfg.c_rho_bar,
        p=cfg.p,
        omega=cfg.omega,
        max_iters=cfg.max_iters,
        rel_tol=cfg.tolerance,
        initial_guess=PotentialPath.constant(cfg.initial_guess, N, cfg.c_rho_bar),
    )


def run_reconstruction(
    cfg: ExperimentConfig, meas: Measurement, ctx: SolverContext | None = None
) -> ReconstructionReport:
    """Reconstruct from ``meas`` on the run grid of ``cfg``; errors are tracked
    against the configured true potential."""
    N = meas.grid.N
    if ctx is None:
        ctx = _context(cfg, N, cfg.M)
    truth = cfg.true_path(meas.grid)
    return reconstruct(meas, _recon_config(cfg, N), ctx, truth)


@dataclass
class SweepResult:
    """Rows of ``(parameter, median error, per-seed errors, rate, status)``.

    ``rate`` of a row is the successive empirical rate against the previous
    row (``nan`` for the first). For ``iteration_decay`` the parameter is the
    iteration index and the extra columns hold the four error/change series.
    """

    kind: str
    param_name: str
    rows: list = field(default_factory=list)
    config: dict = field(default_factory=dict)

    @property
    def params(self) -> np.ndarray:
        return np.array([r["param"] for r in self.rows], dtype=float)

    @property
    def errors(self) -> np.ndarray:
        return np.array([r["error"] for r in self.rows], dtype=float)

    def fitted_rate(self, last: int | None = None) -> float:
        """Least-squares rate over the last ``last`` rows (all by default)."""
        p, e = self.params, self.errors
        if last:
            p, e = p[-last:], e[-last:]
        order = np.argsort(-p)
        return fitted_rate(p[order], e[order])

    def terminal_rate(self) -> float:
        return float(self.rows[-1]["rate"])

    def argmin(self) -> int:
        return int(np.nanargmin(self.errors))

    def monotone_tail(self, n: int = 3) -> tuple[bool, int]:
        """Whether errors decrease over the last ``n`` levels; also returns the
        number of non-decreasing steps (one is tolerated and flagged)."""
        e = self.errors[-n:]
        bad = int(np.sum(np.diff(e) >= 0))
        return bad <= 1, bad


def _seeds_for(cfg: ExperimentConfig, minimum: int) -> tuple:
    if len(cfg.seeds) >= minimum:
        return cfg.seeds
    return tuple(range(cfg.seeds[0], cfg.seeds[0] + minimum))


def _map(fn, jobs, workers):
    if workers and workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            return list(pool.map(fn, jobs))
    return [fn(j) for j in jobs]


def _row_job(cfg, trace, N_fine, N, M, seeds, delta_percent, source=None):
    """Median reconstruction error over ``seeds`` on the run grid ``(N, M)``."""
    try:
        grid = TimeGrid(cfg.T, N)
        exact = _restrict(trace, N_fine, grid, cfg.x0)
        ctx = _context(cfg, N, M, source)
        spec = NormSpec(cfg.p, 0.0, grid.tau)
        truth = cfg.true_path(grid)
        errors = []
        for s in seeds:
            meas = add_noise(
                exact.g, delta_percent, s, grid=grid, x0=cfg.x0, g0=exact.g0
            ) if delta_percent > 0 else exact
            rep = reconstruct(meas, _recon_config(cfg, N), ctx)
            errors.append(lp_norm(rep.rho_star.values - truth.values, spec))
        return {"N": N, "M": M, "error": float(np.median(errors)), "errors": errors, "status": "ok"}
    except Exception as exc:  # reported per row, sweep continues
        return {"N": N, "M": M, "error": math.nan, "errors": [], "status": f"failed: {exc}"}


def _attach_rates(rows):
    prev = None
    for r in rows:
        r["rate"] = math.nan
        if prev is not None and prev["error"] > 0 and r["error"] > 0:
            r["rate"] = float(empirical_rate([prev["param"], r["param"]], [prev["error"], r["error"]])[0])
        if r["status"] == "ok":
            prev = r
    return rows


def run_sweep(kind: str, cfg: ExperimentConfig, levels=None, workers: int = 1, **opts) -> SweepResult:
    """Run one of the convergence studies.

    ``spatial``
        ``tau = T/N`` fixed (``N`` from ``opts``, default 800), ``h = 1/M`` over
        ``levels`` (default ``[20, 40, 80, 160]``), exact data. The data share the
        run time grid and use ``4 max(M)`` intervals, which isolates the spatial
        error.
    ``temporal``
        ``h = 1/M`` fixed (default 100), ``N = 2^k`` for ``k`` in ``levels``
        (default 4..10), exact data on the same mesh with ``16 max(N)`` steps.
    ``noise``
        ``(N, M)`` coupled to ``delta_percent`` in ``levels`` via
        :func:`couple_parameters`; median over at least five seeds.
    ``tau_ucurve``
        ``delta_percent = cfg.delta_percent`` (default 0.1 if zero), fixed ``M``
        (default 32), ``N = 2^k`` for ``k`` in ``levels`` (default 2..13).
    ``iteration_decay``
        One reconstruction on ``cfg``'s grid recording per-iteration errors and
        changes in the plain and weighted norms.
    """
    if kind not in SWEEP_KINDS:
        raise ValueError(f"unknown sweep kind {kind!r}; expected one of {SWEEP_KINDS}")
    result = SweepResult(kind, "", config=cfg.to_dict())

    if kind == "spatial":
        N = int(opts.get("N", 800))
        Ms = sorted(levels or [20, 40, 80, 160])
        M_fine = int(opts.get("M_fine", 4 * Ms[-1]))
        trace = _observe(cfg, N, M_fine)
        rows = _map(lambda M: _row_job(cfg, trace, N, N, M, (0,), 0.0), Ms, workers)
        for r in rows:
            r["param"] = 1.0 / r["M"]
        result.param_name = "h"
    elif kind == "temporal":
        M = int(opts.get("M", 100))
        ks = sorted(levels or range(4, 11))
        N_fine = int(opts.get("N_fine", 16 * 2 ** ks[-1]))
        trace = _observe(cfg, N_fine, M)
        rows = _map(lambda k: _row_job(cfg, trace, N_fine, 2**k, M, (0,), 0.0), ks, workers)
        for r in rows:
            r["param"] = cfg.T / r["N"]
        result.param_name = "tau"
    elif kind == "noise":
        deltas = sorted(levels or [4, 2, 1, 0.5, 0.25, 0.125, 0.0625], reverse=True)
        couple = {k: opts[k] for k in ("c_tau", "c_h", "min_M") if k in opts}
        grids = [couple_parameters(d, cfg.alpha, cfg.p, cfg.T, **couple) for d in deltas]
        N_fine = int(opts.get("N_fine", 8 * max(g[0] for g in grids)))
        M_fine = int(opts.get("M_fine", 4 * max(g[1] for g in grids)))
        trace = _observe(cfg, N_fine, M_fine)
        seeds = _seeds_for(cfg, 5)
        jobs = list(zip(deltas, grids))
        rows = _map(lambda j: _row_job(cfg, trace, N_fine, j[1][0], j[1][1], seeds, j[0]), jobs, workers)
        for r, d in zip(rows, deltas):
            r["param"] = d
        result.param_name = "delta_percent"
    elif kind == "tau_ucurve":
        delta = cfg.delta_percent or 0.1
        M = int(opts.get("M", 32))
        ks = sorted(levels or range(2, 14))
        N_fine = int(opts.get("N_fine", 2 * 2 ** ks[-1]))
        M_fine = int(opts.get("M_fine", 4 * M))
        trace = _observe(cfg, N_fine, M_fine)
        seeds = _seeds_for(cfg, int(opts.get("min_seeds", 5)))
        rows = _map(lambda k: _row_job(cfg, trace, N_fine, 2**k, M, seeds, delta), ks, workers)
        for r in rows:
            r["param"] = cfg.T / r["N"]
        result.param_name = "tau"
    else:
        return _iteration_decay(cfg, result)

    result.rows = _attach_rates(rows)
    if kind in ("spatial", "temporal"):
        ok, bad = result.monotone_tail()
        if bad:
            warnings.warn(f"{kind} sweep: {bad} non-decreasing step(s) in the last three levels")
    return result


def _iteration_decay(cfg: ExperimentConfig, result: SweepResult) -> SweepResult:
    meas = generate_data(cfg)
    if cfg.delta_percent > 0:
        meas = add_noise(meas.g, cfg.delta_percent, cfg.seeds[0], grid=meas.grid, x0=cfg.x0, g0=meas.g0)
    rep = run_reconstruction(cfg, meas)
    result.param_name = "iteration"
    for k in range(rep.iterations_used + 1):
        row = {
            "param": k,
            "error": rep.error_lp[k],
            "error_omega": rep.error_lp_omega[k],
            "change": rep.change_lp[k - 1] if k else math.nan,
            "change_omega": rep.change_lp_omega[k - 1] if k else math.nan,
            "rate": math.nan,
            "status": "ok",
        }
        result.rows.append(row)
    result.config["iterations_used"] = rep.iterations_used
    result.config["converged"] = rep.converged
    return result
