import logging
import math

import numpy as np
import pytest

from errors import AxisMismatch, GridMismatch, ShapeMismatch, StepUnderflow
from ground_state import imaginary_time_evolve
import spectral_propagator
from spectral_propagator import (
    Grid2D, SplitOperatorKernel, StepperConfig, WaveFunction, _check_momentum_window, comoving_step,
    fft_forward, fft_inverse, observables, propagate, set_fft_workers, strang_step_static,
)
from sta_trajectory import Axis, PolynomialTrajectory
from transport_experiment import fidelity


def test_grid_coordinates(small_grid):
    assert small_grid.x[0] == pytest.approx(-math.pi)
    assert small_grid.dx == pytest.approx(2 * math.pi / 32)
    assert small_grid.x[-1] < math.pi
    assert small_grid.k_x[1] == pytest.approx(1.0)
    assert small_grid.k_x[-1] == pytest.approx(-1.0)


def test_fft_is_unitary(small_grid, rng):
    field = rng.normal(size=small_grid.shape) + 1j * rng.normal(size=small_grid.shape)
    spectrum = fft_forward(field, small_grid)
    assert np.sum(np.abs(spectrum) ** 2) == pytest.approx(np.sum(np.abs(field) ** 2))
    np.testing.assert_allclose(fft_inverse(spectrum, small_grid), field, atol=1e-12)


def test_plane_wave_is_a_single_mode(small_grid):
    X, _ = small_grid.mesh
    spectrum = np.abs(fft_forward(np.exp(1j * small_grid.k_x[3] * X), small_grid))
    assert np.argmax(spectrum) == np.ravel_multi_index((3, 0), small_grid.shape)
    assert np.sum(spectrum > 1e-9) == 1


def test_shape_mismatch(small_grid):
    with pytest.raises(ShapeMismatch):
        fft_forward(np.zeros((16, 16)), small_grid)
    with pytest.raises(ShapeMismatch):
        WaveFunction(np.zeros((16, 32)), small_grid)


def test_gaussian_observables():
    grid = Grid2D.from_periods(64, 64, 2, 2)
    sigma = 0.8
    psi = WaveFunction.gaussian(grid, (0.5, -0.3), (sigma, sigma), momentum=(1.0, 0.0))
    obs = observables(psi)
    assert obs.norm == pytest.approx(1.0, abs=1e-12)
    assert obs.x_mean == pytest.approx(0.5, abs=1e-8)
    assert obs.y_mean == pytest.approx(-0.3, abs=1e-8)
    assert obs.px_mean == pytest.approx(1.0, abs=1e-8)
    assert obs.kinetic == pytest.approx(1 / (4 * sigma ** 2) + 0.5, rel=1e-8)


def test_free_packet_moves_with_group_velocity():
    grid = Grid2D.from_periods(64, 64, 2, 2)
    psi = WaveFunction.gaussian(grid, (-1.0, 0.0), (0.8, 0.8), momentum=(2.0, 0.0))
    zero = np.zeros(grid.shape)
    for _ in range(10):
        psi = strang_step_static(psi, zero, 0.1)
    assert observables(psi).x_mean == pytest.approx(1.0, abs=1e-4)
    assert psi.norm() == pytest.approx(1.0, abs=1e-12)


def test_comoving_step_without_boost_matches_static(harmonic_field):
    grid, potential = harmonic_field()
    psi = WaveFunction.gaussian(grid, (0.1, 0.0), (0.3, 0.3))
    a = strang_step_static(psi, potential, 0.01)
    b = comoving_step(psi, potential, (0.0, 0.0), 0.01)
    np.testing.assert_allclose(a.amplitudes, b.amplitudes, atol=1e-14)


def test_boost_changes_momentum(harmonic_field):
    grid, _ = harmonic_field()
    psi = WaveFunction.gaussian(grid, (0.0, 0.0), (0.4, 0.4))
    kicked = comoving_step(psi, np.zeros(grid.shape), (0.5, 0.0), 1e-6)
    assert observables(kicked).px_mean == pytest.approx(-0.5, abs=1e-6)


def test_shifted_translates_density():
    grid = Grid2D.from_periods(64, 64, 2, 2)
    psi = WaveFunction.gaussian(grid, (0.0, 0.0), (0.5, 0.5))
    moved = psi.shifted(1.0, -0.5)
    obs = observables(moved)
    assert obs.x_mean == pytest.approx(1.0, abs=1e-8)
    assert obs.y_mean == pytest.approx(-0.5, abs=1e-8)


def test_inner_product_requires_same_grid(small_grid):
    other = Grid2D.from_periods(32, 32, 2, 1)
    a = WaveFunction.gaussian(small_grid, (0, 0), (0.5, 0.5))
    b = WaveFunction.gaussian(other, (0, 0), (0.5, 0.5))
    with pytest.raises(GridMismatch):
        a.inner(b)


def _trajectories(d_x, t_f, omega_x, omega_y, d_y=0.0):
    return (PolynomialTrajectory.design(Axis.X, d_x, t_f, omega_x),
            PolynomialTrajectory.design(Axis.Y, d_y, t_f, omega_y))


def test_zero_distance_keeps_ground_state(harmonic_field):
    grid, potential = harmonic_field()
    psi0, _ = imaginary_time_evolve(potential, grid)
    result = propagate(psi0, potential, _trajectories(0.0, 2.0, 4.0, 3.0))
    assert fidelity(psi0, result.psi) == pytest.approx(1.0, abs=1e-8)
    assert result.n_steps >= 50


def test_sta_transport_in_harmonic_trap_is_exact(harmonic_field):
    grid, potential = harmonic_field()
    psi0, _ = imaginary_time_evolve(potential, grid)
    t_f = 2 * (2 * math.pi / 4.0)
    result = propagate(psi0, potential, _trajectories(3.0, t_f, 4.0, 3.0, d_y=1.5),
                       StepperConfig(rel_tol=1e-6, record_trace=True))
    assert 1 - fidelity(psi0, result.psi) < 1e-6
    assert abs(result.psi.norm() - 1) < 1e-10
    assert list(result.trace.columns) == ["t", "norm", "x_mean", "y_mean", "dt_accepted"]
    assert result.trace["t"].iloc[-1] == pytest.approx(t_f)
    assert np.all(np.abs(result.trace["norm"] - 1) < 1e-10)


def test_non_sta_ramp_excites_the_atom(harmonic_field):
    grid, potential = harmonic_field()
    psi0, _ = imaginary_time_evolve(potential, grid)
    t_f = 0.5 * (2 * math.pi / 4.0)
    config = StepperConfig(rel_tol=1e-7)
    sta = _trajectories(0.5, t_f, 4.0, 3.0)
    # a trajectory designed for a much stiffer trap misses the compensation term
    naive = (PolynomialTrajectory.design(Axis.X, 0.5, t_f, 400.0), sta[1])
    exact = propagate(psi0, potential, sta, config)
    detuned = propagate(psi0, potential, naive, config)
    assert fidelity(psi0, detuned.psi) < 0.99 < fidelity(psi0, exact.psi)


def test_mismatched_durations(harmonic_field):
    grid, potential = harmonic_field()
    psi0 = WaveFunction.gaussian(grid, (0, 0), (0.3, 0.3))
    trajectories = (PolynomialTrajectory.design(Axis.X, 1.0, 1.0, 4.0),
                    PolynomialTrajectory.design(Axis.Y, 0.0, 2.0, 3.0))
    with pytest.raises(AxisMismatch):
        propagate(psi0, potential, trajectories)


def test_unreachable_tolerance_underflows(harmonic_field):
    grid, potential = harmonic_field()
    psi0 = WaveFunction.gaussian(grid, (0.2, 0), (0.3, 0.3))
    with pytest.raises(StepUnderflow):
        propagate(psi0, potential, _trajectories(1.0, 1.0, 4.0, 3.0), StepperConfig(rel_tol=1e-300))


def test_macro_steps_are_clamped():
    assert StepperConfig(n_t_initial=5).macro_steps == 20
    assert StepperConfig(n_t_initial=500).macro_steps == 100
    assert StepperConfig().macro_steps == 50


def _evolve(kernel, amplitudes, dt, n_steps):
    for _ in range(n_steps):
        amplitudes = kernel.step(amplitudes, dt)
    return amplitudes


def _width_x(psi):
    X, _ = psi.grid.mesh
    density = psi.density() * psi.grid.cell_area
    mean = np.sum(X * density)
    return math.sqrt(np.sum((X - mean) ** 2 * density))


def test_free_gaussian_spreads_at_the_analytic_rate():
    grid = Grid2D.from_periods(128, 128, 4, 4)
    sigma0 = 0.5
    psi = WaveFunction.gaussian(grid, (0.0, 0.0), (sigma0, sigma0))
    zero = np.zeros(grid.shape)
    for t in (sigma0 ** 2, 5 * sigma0 ** 2):
        spread = strang_step_static(psi, zero, t)
        expected = sigma0 * math.sqrt(1 + (t / (2 * sigma0 ** 2)) ** 2)
        assert _width_x(spread) == pytest.approx(expected, rel=1e-5)


def test_strang_step_is_second_order(harmonic_field):
    grid, potential = harmonic_field()
    kernel = SplitOperatorKernel(potential, grid)
    psi = WaveFunction.gaussian(grid, (0.3, -0.2), (0.3, 0.3)).amplitudes
    t_total = 1.0
    reference = _evolve(kernel, psi, t_total / 3200, 3200)
    steps = np.array([0.02, 0.01, 0.005])
    errors = [math.sqrt(np.sum(np.abs(_evolve(kernel, psi, dt, round(t_total / dt)) - reference) ** 2)
                        * grid.cell_area) for dt in steps]
    order = np.polyfit(np.log(steps), np.log(errors), 1)[0]
    assert order == pytest.approx(2.0, abs=0.1)


def test_norm_drift_over_many_steps(harmonic_field):
    grid, potential = harmonic_field(n=32)
    kernel = SplitOperatorKernel(potential, grid)
    psi = WaveFunction.gaussian(grid, (0.4, 0.1), (0.3, 0.3), momentum=(2.0, 0.0))
    evolved = WaveFunction(_evolve(kernel, psi.amplitudes, 1e-3, 10000), grid)
    assert abs(evolved.norm() - 1) < 1e-9


def test_macro_step_boundaries_leave_no_sliver_steps(harmonic_field):
    grid, potential = harmonic_field()
    psi0, _ = imaginary_time_evolve(potential, grid)
    # 0.7 * pi over 50 macro steps puts the boundaries on inexact floats
    t_f = 0.7 * math.pi
    config = StepperConfig(rel_tol=1e-6, n_t_initial=50)
    result = propagate(psi0, potential, _trajectories(2.0, t_f, 4.0, 3.0, d_y=-1.0), config)
    times = [t for t, _, _ in result.step_history]
    steps = [dt for _, dt, _ in result.step_history]
    assert times[-1] == t_f
    assert np.all(np.diff(times) > 0)
    assert min(steps) > 1e-6 * t_f / 50
    assert result.n_steps >= 50


def test_lab_and_comoving_frames_agree():
    grid = Grid2D.from_periods(64, 64, 2, 2)
    omega_x, omega_y, d, start = 4.0, 3.0, 3.0, -1.5
    X, Y = grid.mesh

    def trap(center):
        return 0.5 * (omega_x ** 2 * (X - center) ** 2 + omega_y ** 2 * Y ** 2)

    psi0, _ = imaginary_time_evolve(trap(0.0), grid)
    t_f = 2 * math.pi / omega_x
    trajectories = _trajectories(d, t_f, omega_x, omega_y)
    comoving = propagate(psi0, trap(0.0), trajectories, StepperConfig(rel_tol=1e-7)).psi

    kinetic = np.exp(-1j * grid.k_squared / 2 * (t_f / 4000))
    amplitudes = psi0.shifted(start, 0.0).amplitudes
    dt = t_f / 4000
    for n in range(4000):
        before = trap(start + trajectories[0].eval(n * dt))
        after = trap(start + trajectories[0].eval(min((n + 1) * dt, t_f)))
        amplitudes = np.exp(-0.5j * before * dt) * amplitudes
        amplitudes = fft_inverse(kinetic * fft_forward(amplitudes, grid), grid)
        amplitudes = np.exp(-0.5j * after * dt) * amplitudes
    lab = WaveFunction(amplitudes, grid)
    assert fidelity(comoving.shifted(start + d, 0.0), lab) == pytest.approx(1.0, abs=1e-3)


def test_repeated_runs_are_bit_identical(harmonic_field):
    grid, potential = harmonic_field()
    psi0, _ = imaginary_time_evolve(potential, grid)
    trajectories = _trajectories(1.0, 1.5, 4.0, 3.0)
    first = propagate(psi0, potential, trajectories, StepperConfig(rel_tol=1e-6))
    second = propagate(psi0, potential, trajectories, StepperConfig(rel_tol=1e-6))
    assert np.array_equal(first.psi.amplitudes, second.psi.amplitudes)
    assert first.step_history == second.step_history


def test_momentum_window_warning(small_grid, caplog):
    fast = _trajectories(20.0, 0.5, 4.0, 3.0)
    slow = _trajectories(0.5, 5.0, 4.0, 3.0)
    with caplog.at_level(logging.WARNING, logger="spectral_propagator"):
        assert _check_momentum_window(slow, small_grid)
        assert not caplog.records
        assert not _check_momentum_window(fast, small_grid)
    assert "momentum limit" in caplog.text


def test_fft_worker_count_is_settable():
    previous = spectral_propagator.FFT_WORKERS
    try:
        set_fft_workers(1)
        assert spectral_propagator.FFT_WORKERS == 1
    finally:
        set_fft_workers(previous)
