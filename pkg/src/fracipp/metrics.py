"""Discrete (weighted) sequence norms and convergence-rate estimates."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

__all__ = ["NormSpec", "lp_norm", "reconstruction_error", "empirical_rate", "fitted_rate"]


@dataclass(frozen=True)
class NormSpec:
    """Exponent ``p`` in ``[1, inf]``, exponential weight ``omega`` and step ``tau``."""

    p: float = 2.0
    omega: float = 0.0
    tau: float = 1.0

    def __post_init__(self):
        if not self.p >= 1:
            raise ValueError(f"p must be >= 1, got {self.p}")
        if not self.omega >= 0:
            raise ValueError(f"omega must be >= 0, got {self.omega}")
        if not self.tau > 0:
            raise ValueError(f"tau must be positive, got {self.tau}")


def lp_norm(seq, spec: NormSpec) -> float:
    """Norm of ``v^1..v^N`` sampled at ``t_n = n tau``:
    ``(tau sum (exp(-omega t_n)|v^n|)^p)^(1/p)``, or the weighted sup for ``p = inf``.
    """
    v = np.abs(np.asarray(seq, dtype=float))
    if v.ndim != 1:
        raise ValueError("lp_norm expects a one-dimensional sequence")
    if v.size == 0:
        return 0.0
    t = spec.tau * np.arange(1, v.size + 1)
    if spec.omega:
        v = v * np.exp(-spec.omega * t)
    vmax = float(v.max())
    if math.isinf(spec.p) or vmax == 0.0:
        return vmax
    v = v / vmax  # guards v**p against under/overflow
    if spec.p == 2:
        return vmax * math.sqrt(spec.tau * np.dot(v, v))
    return vmax * float((spec.tau * np.sum(v**spec.p)) ** (1.0 / spec.p))


def reconstruction_error(rho_star, rho_true_fn, grid, spec: NormSpec | None = None) -> float:
    """``lp_norm(rho_true(t_n) - rho_star^n)``; defaults to the plain l2 norm on ``grid``."""
    values = getattr(rho_star, "values", rho_star)
    values = np.asarray(values, dtype=float)
    if values.shape[0] != grid.N:
        raise ValueError(f"{values.shape[0]} samples for a grid with N={grid.N}")
    if spec is None:
        spec = NormSpec(2.0, 0.0, grid.tau)
    truth = np.array([rho_true_fn(t) for t in grid.t[1:]], dtype=float)
    return lp_norm(truth - values, spec)


def _rate_inputs(params, errors):
    p = np.asarray(params, dtype=float)
    e = np.asarray(errors, dtype=float)
    if p.shape != e.shape or p.ndim != 1 or p.size < 2:
        raise ValueError("params and errors must be 1-D of equal length >= 2")
    if np.any(p <= 0) or np.any(np.diff(p) >= 0):
        raise ValueError("params must be positive and strictly decreasing")
    if np.any(~(e > 0)):
        raise ValueError("errors must be strictly positive for a rate to be defined")
    return p, e


def empirical_rate(params, errors) -> np.ndarray:
    """Successive rates ``log(e_i/e_{i+1}) / log(p_i/p_{i+1})``."""
    p, e = _rate_inputs(params, errors)
    return np.log(e[:-1] / e[1:]) / np.log(p[:-1] / p[1:])


def fitted_rate(params, errors) -> float:
    """Least-squares slope of ``log e`` against ``log p``."""
    p, e = _rate_inputs(params, errors)
    slope, _ = np.polyfit(np.log(p), np.log(e), 1)
    return float(slope)
