import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from fracipp.forward import PotentialPath
from fracipp.fracquad import TimeGrid
from fracipp.harness import ExperimentConfig, _context, _recon_config, generate_data
from fracipp.inverse import (
    Measurement,
    NoisePositivityError,
    ReconstructionConfig,
    add_noise,
    cutoff,
    fixed_point_step,
    reconstruct,
)
from fracipp.metrics import NormSpec, lp_norm


def crime_setup(potential, N=64, M=16):
    cfg = ExperimentConfig(potential=potential, N=N, M=M, source="interpolate", n_fine_ratio=1, m_fine_ratio=1)
    return cfg, generate_data(cfg), _context(cfg, N, M)


@pytest.mark.parametrize("potential", ["rho1", "rho2", "rho3"])
def test_inverse_crime_fixed_point(potential):
    cfg, meas, ctx = crime_setup(potential)
    truth = cfg.true_path()
    step = fixed_point_step(truth, meas, ctx)
    assert np.max(np.abs(step.values - truth.values)) <= 1e-9


def test_contraction_from_shifted_guess():
    cfg = ExperimentConfig(N=64, M=16)
    meas = generate_data(cfg)
    ctx = _context(cfg, 64, 16)
    truth = cfg.true_path()
    rho = PotentialPath(np.clip(truth.values + 0.5, 0, 5))
    nxt = fixed_point_step(rho, meas, ctx)
    spec = NormSpec(2, 0, ctx.grid.tau)
    assert lp_norm(nxt.values - truth.values, spec) < lp_norm(rho.values - truth.values, spec)


def test_zero_iterations_returns_guess():
    cfg, meas, ctx = crime_setup("rho1", N=16, M=8)
    guess = PotentialPath.constant(1.3, 16)
    rep = reconstruct(meas, ReconstructionConfig(max_iters=0, initial_guess=guess), ctx)
    assert rep.iterations_used == 0 and not rep.converged
    assert np.array_equal(rep.rho_star.values, guess.values)
    assert rep.change_lp == [] and rep.per_iteration_change == []


def test_report_bookkeeping():
    cfg = ExperimentConfig(N=32, M=16)
    meas = generate_data(cfg)
    ctx = _context(cfg, 32, 16)
    rep = reconstruct(meas, _recon_config(cfg, 32), ctx, cfg.true_path())
    assert rep.converged
    assert len(rep.per_iteration_change) == rep.iterations_used
    assert len(rep.error_lp) == rep.iterations_used + 1
    assert np.all((rep.rho_star.values >= 0) & (rep.rho_star.values <= cfg.c_rho_bar))


def test_iterates_stay_in_box():
    # large noise makes the raw update leave the box; the cutoff must catch it
    cfg = ExperimentConfig(N=64, M=16)
    exact = generate_data(cfg)
    meas = add_noise(exact.g, 20.0, 3, grid=exact.grid, x0=cfg.x0, g0=exact.g0)
    ctx = _context(cfg, 64, 16)
    rho = PotentialPath.constant(0.5, 64, 1.0)
    for _ in range(4):
        rho = fixed_point_step(rho, meas, ctx, 1.0)
        assert rho.values.min() >= 0 and rho.values.max() <= 1.0
    assert rho.values.max() == 1.0 or rho.values.min() == 0.0


def test_step_rejects_other_point():
    cfg, meas, ctx = crime_setup("rho1", N=8, M=4)
    other = Measurement(meas.grid, 0.5, meas.g, meas.g0)
    with pytest.raises(ValueError):
        fixed_point_step(cfg.true_path(), other, ctx)


# --- cutoff --------------------------------------------------------------


def test_cutoff_values():
    assert np.array_equal(cutoff(np.array([-1.0, 0.5, 7.0]), 5.0), [0.0, 0.5, 5.0])
    assert cutoff(9.0, 2.0) == 2.0
    with pytest.raises(ValueError):
        cutoff(1.0, 0.0)


pairs = arrays(np.float64, 20, elements=st.floats(-20, 20))


@given(pairs, pairs, st.floats(0.1, 10))
def test_cutoff_non_expansive(a, b, c):
    assert np.all(np.abs(cutoff(a, c) - cutoff(b, c)) <= np.abs(a - b))
    assert np.all((cutoff(a, c) >= 0) & (cutoff(a, c) <= c))


# --- noise ---------------------------------------------------------------


def _exact():
    grid = TimeGrid(1.0, 50)
    g = 1.5 + np.sin(grid.t[1:])
    return grid, g


def test_noise_amplitude_and_anchor():
    grid, g = _exact()
    m = add_noise(g, 2.0, 7, grid=grid, x0=0.2, g0=1.5)
    assert m.epsilon == pytest.approx(g.max() * 0.02)
    assert np.max(np.abs(m.g - g)) <= m.epsilon
    assert m.g0 == 1.5 and m.seed == 7 and m.delta_percent == 2.0
    expected = g + m.epsilon * np.random.default_rng(7).uniform(-1, 1, 50)
    assert np.array_equal(m.g, expected)


@given(st.integers(0, 2**32 - 1), st.floats(0.01, 10))
@settings(max_examples=30)
def test_noise_deterministic(seed, delta):
    grid, g = _exact()
    a = add_noise(g, delta, seed, grid=grid, x0=0.0, g0=1.5)
    b = add_noise(g, delta, seed, grid=grid, x0=0.0, g0=1.5)
    assert np.array_equal(a.g, b.g)


def test_noise_seed_changes_draw():
    grid, g = _exact()
    a = add_noise(g, 1.0, 1, grid=grid, x0=0.0, g0=1.5)
    b = add_noise(g, 1.0, 2, grid=grid, x0=0.0, g0=1.5)
    assert not np.array_equal(a.g, b.g)


def test_reconstruction_deterministic():
    cfg = ExperimentConfig(N=32, M=8, delta_percent=1.0)
    exact = generate_data(cfg)
    ctx = _context(cfg, 32, 8)
    reps = [
        reconstruct(add_noise(exact.g, 1.0, 11, grid=exact.grid, x0=cfg.x0, g0=exact.g0), _recon_config(cfg, 32), ctx)
        for _ in range(2)
    ]
    assert np.array_equal(reps[0].rho_star.values, reps[1].rho_star.values)
    assert reps[0].change_lp == reps[1].change_lp


def test_noise_positivity_violation():
    grid = TimeGrid(1.0, 50)
    g = np.full(50, 0.01)
    g[0] = 1.0  # eps = 1 * 50% = 0.5 swamps the small values
    with pytest.raises(NoisePositivityError):
        add_noise(g, 50.0, 0, grid=grid, x0=0.0, g0=0.01)
    with pytest.raises(ValueError):
        add_noise(g, -1.0, 0, grid=grid, x0=0.0, g0=1.0)


def test_measurement_rejects_nonpositive():
    grid = TimeGrid(1.0, 3)
    with pytest.raises(NoisePositivityError):
        Measurement(grid, 0.0, [1.0, 0.0, 1.0], 1.0)
    with pytest.raises(NoisePositivityError):
        Measurement(grid, 0.0, [1.0, 1.0, 1.0], -1.0)
    with pytest.raises(ValueError):
        Measurement(grid, 0.0, [1.0, 1.0], 1.0)


@pytest.mark.parametrize(
    "kw",
    [
        dict(c_rho_bar=0.0),
        dict(p=1.0),
        dict(p=float("inf")),
        dict(omega=-1.0),
        dict(max_iters=-1),
        dict(rel_tol=0.0),
        dict(initial_guess=PotentialPath([4.0], 5.0), c_rho_bar=3.0),
    ],
)
def test_config_validation(kw):
    with pytest.raises(ValueError):
        ReconstructionConfig(**kw)
