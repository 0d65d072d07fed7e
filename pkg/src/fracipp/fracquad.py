"""Fractional calculus kernels.

Backward-Euler convolution quadrature (BECQ) weights and the discrete Caputo
derivative built from them, an L1-scheme derivative used as an independent
cross-check, an in-house Gamma function, and the Mittag-Leffler function
:math:`E_{\\alpha,1}(z)` on the non-positive real axis.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy import integrate

__all__ = [
    "CqWeights",
    "TimeGrid",
    "cq_weights",
    "caputo_becq",
    "caputo_l1_oracle",
    "gamma_fn",
    "log_gamma_fn",
    "mittag_leffler",
]


@dataclass(frozen=True)
class TimeGrid:
    """Uniform partition of :math:`[0, T]` into ``N`` steps."""

    T: float
    N: int
    tau: float = field(init=False)

    def __post_init__(self):
        if not self.T > 0:
            raise ValueError(f"final time must be positive, got T={self.T}")
        if int(self.N) != self.N or self.N < 1:
            raise ValueError(f"step count must be a positive integer, got N={self.N}")
        object.__setattr__(self, "N", int(self.N))
        object.__setattr__(self, "tau", self.T / self.N)

    @property
    def t(self) -> np.ndarray:
        """Grid points :math:`t_0, \\dots, t_N`."""
        return np.arange(self.N + 1) * self.tau


@dataclass(frozen=True)
class CqWeights:
    """Coefficients of :math:`(1-\\xi)^\\alpha = \\sum_j \\omega_j \\xi^j`."""

    alpha: float
    weights: np.ndarray

    @property
    def partial_sums(self) -> np.ndarray:
        """:math:`\\sigma_n = \\sum_{j\\le n} \\omega_j`."""
        return np.cumsum(self.weights)

    def __len__(self):
        return len(self.weights)


def _check_alpha(alpha):
    if not 0.0 < alpha < 1.0:
        raise ValueError(f"alpha must lie in (0, 1), got {alpha}")


def cq_weights(alpha: float, n_terms: int) -> CqWeights:
    """BECQ weights :math:`\\omega_0, \\dots, \\omega_{n}` by the recursion
    :math:`\\omega_j = \\omega_{j-1}(j-1-\\alpha)/j`."""
    _check_alpha(alpha)
    if int(n_terms) != n_terms or n_terms < 1:
        raise ValueError(f"n_terms must be a positive integer, got {n_terms}")
    j = np.arange(1, int(n_terms) + 1, dtype=float)
    w = np.empty(int(n_terms) + 1)
    w[0] = 1.0
    w[1:] = np.cumprod((j - 1.0 - alpha) / j)
    w.setflags(write=False)
    return CqWeights(alpha=alpha, weights=w)


def _check_samples(samples, grid):
    v = np.asarray(samples, dtype=float)
    if v.ndim != 1 or v.shape[0] != grid.N + 1:
        raise ValueError(
            f"expected {grid.N + 1} samples for a grid with N={grid.N}, got shape {v.shape}"
        )
    return v


def caputo_becq(samples, alpha: float, grid: TimeGrid, weights: CqWeights | None = None):
    """Discrete Caputo derivative
    :math:`\\tau^{-\\alpha}\\sum_{j=0}^n \\omega_j (v^{n-j} - v^0)` for ``n = 1..N``.

    Returns an array of length ``N``.
    """
    _check_alpha(alpha)
    v = _check_samples(samples, grid)
    if weights is None:
        weights = cq_weights(alpha, grid.N)
    elif len(weights) < grid.N + 1 or weights.alpha != alpha:
        raise ValueError("weights do not match alpha or do not reach index N")
    w = weights.weights[: grid.N + 1]
    conv = np.convolve(w, v - v[0])[: grid.N + 1]
    return conv[1:] * grid.tau ** (-alpha)


def caputo_l1_oracle(samples, alpha: float, grid: TimeGrid):
    """L1 discretisation of the Caputo derivative (piecewise-linear interpolant
    of the samples, integrated exactly against the kernel)."""
    _check_alpha(alpha)
    v = _check_samples(samples, grid)
    N = grid.N
    j = np.arange(N, dtype=float)
    b = (j + 1.0) ** (1.0 - alpha) - j ** (1.0 - alpha)
    dv = np.diff(v)
    # d^n = c * sum_{k=0}^{n-1} b_{n-1-k} dv_k
    conv = np.convolve(b, dv)[:N]
    return conv * grid.tau ** (-alpha) / gamma_fn(2.0 - alpha)


# Lanczos approximation, g = 7, n = 9.
_LANCZOS_G = 7.0
_LANCZOS_COEF = (
    0.99999999999980993,
    676.5203681218851,
    -1259.1392167224028,
    771.32342877765313,
    -176.61502916214059,
    12.507343278686905,
    -0.13857109526572012,
    9.9843695780195716e-6,
    1.5056327351493116e-7,
)
_LOG_SQRT_2PI = 0.5 * math.log(2.0 * math.pi)


def _lanczos_log_gamma(x):
    # valid for x >= 0.5
    z = x - 1.0
    a = _LANCZOS_COEF[0]
    for k in range(1, 9):
        a += _LANCZOS_COEF[k] / (z + k)
    t = z + _LANCZOS_G + 0.5
    return _LOG_SQRT_2PI + (z + 0.5) * math.log(t) - t + math.log(a)


def log_gamma_fn(x: float) -> float:
    """:math:`\\log\\Gamma(x)` for ``x > 0``."""
    x = float(x)
    if not x > 0:
        raise ValueError(f"log_gamma_fn is defined here only for x > 0, got {x}")
    if x < 0.5:
        return math.log(math.pi / math.sin(math.pi * x)) - _lanczos_log_gamma(1.0 - x)
    return _lanczos_log_gamma(x)


def gamma_fn(x: float) -> float:
    """:math:`\\Gamma(x)` for ``x > 0``.

    Uses the Lanczos series directly below 20 and ``exp(log_gamma_fn)`` above;
    overflows to ``inf`` past ~171.6 like the IEEE gamma.
    """
    x = float(x)
    if not x > 0:
        raise ValueError(f"gamma_fn is defined here only for x > 0, got {x}")
    if x < 0.5:
        return math.pi / (math.sin(math.pi * x) * gamma_fn(1.0 - x))
    if x <= 20.0:
        z = x - 1.0
        a = _LANCZOS_COEF[0]
        for k in range(1, 9):
            a += _LANCZOS_COEF[k] / (z + k)
        t = z + _LANCZOS_G + 0.5
        return math.sqrt(2.0 * math.pi) * t ** (z + 0.5) * math.exp(-t) * a
    lg = _lanczos_log_gamma(x)
    if lg > 709.7:
        return math.inf
    return math.exp(lg)


# Below this |z| the power series is summed; above it the real-line integral.
_ML_SERIES_MAX = 1.0


def _ml_series(alpha, z):
    z = np.asarray(z, dtype=float)
    out = np.ones_like(z)  # k = 0 term, exact
    for k in range(1, 400):
        term = z**k / gamma_fn(alpha * k + 1.0)
        out = out + term
        if k > 5 and np.max(np.abs(term)) < 1e-17:
            break
    return out


def _ml_integral(alpha, z):
    # E_a(-x) = w/(a pi) * int_0^inf exp(-(s x)^(1/a)) / ((s - s0)^2 + w^2) ds,
    # s0 = -cos(a pi), w = sin(a pi). For a > 1/2 the kernel peaks at s0 > 0 and
    # degenerates to a pole as a -> 1, so the Lorentzian part is integrated exactly.
    x = -np.asarray(z, dtype=float)
    s0 = -math.cos(alpha * math.pi)
    w = math.sin(alpha * math.pi)
    inv_a = 1.0 / alpha

    def g(s):
        return np.exp(-((s * x) ** inv_a))

    if s0 <= 0.0:
        val, _ = integrate.quad_vec(
            lambda s: g(s) / ((s - s0) ** 2 + w * w), 0.0, np.inf, epsabs=1e-14, epsrel=1e-13, limit=500
        )
        return w / (alpha * math.pi) * val

    g0 = g(s0)

    def resid(s):
        return (g(s) - g0) / ((s - s0) ** 2 + w * w)

    kw = dict(epsabs=1e-14, epsrel=1e-13, limit=500)
    left, _ = integrate.quad_vec(resid, 0.0, s0, **kw)
    mid, _ = integrate.quad_vec(resid, s0, 2.0 * s0, **kw)
    right, _ = integrate.quad_vec(resid, 2.0 * s0, np.inf, **kw)
    # int_0^inf ds / ((s - s0)^2 + w^2) = (pi/2 + atan(s0/w)) / w
    lorentz = (0.5 * math.pi + math.atan2(s0, w)) / w
    return (w * (left + mid + right) + w * lorentz * g0) / (alpha * math.pi)


def mittag_leffler(alpha: float, z):
    """:math:`E_{\\alpha,1}(z)` for ``0 < alpha <= 1`` and real ``z <= 0``.

    Accepts a scalar or an array of arguments.
    """
    if not 0.0 < alpha <= 1.0:
        raise ValueError(f"alpha must lie in (0, 1], got {alpha}")
    za = np.asarray(z, dtype=float)
    if np.any(za > 0) or np.any(~np.isfinite(za)):
        raise ValueError("mittag_leffler is implemented for finite z <= 0 only")
    if alpha == 1.0:
        out = np.exp(za)
    else:
        out = np.empty_like(za)
        flat = za.ravel()
        res = out.reshape(-1)
        small = np.abs(flat) <= _ML_SERIES_MAX
        if np.any(small):
            res[small] = _ml_series(alpha, flat[small])
        if np.any(~small):
            res[~small] = _ml_integral(alpha, flat[~small])
    if np.ndim(z) == 0:
        return float(out)
    return out
