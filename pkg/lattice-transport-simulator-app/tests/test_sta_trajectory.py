import math

import numpy as np
import pytest
from scipy.integrate import trapezoid

from config import K_L
from errors import AxisMismatch, InvalidDuration, OutOfWindow
from lattice_potential import harmonic_approximation
from sta_trajectory import (
    Axis, ClassicalTrajectory, PolynomialTrajectory, TransportSpec, aom_program, classical_coefficients,
    forced_oscillator_residual, max_acceleration, sta_coefficients, trajectory_2d,
)


def test_coefficients_approach_classical_for_slow_transport():
    b = sta_coefficients(20.0, 1e6)
    np.testing.assert_allclose(b, [0, 0, 126, -420, 540, -315, 70], atol=1e-6)


def test_coefficients_sum_to_one():
    for omega, t_f in [(20.0, 0.5), (3.0, 7.0)]:
        assert sum(sta_coefficients(omega, t_f)) == pytest.approx(1.0, abs=1e-9)


def test_invalid_duration():
    with pytest.raises(InvalidDuration):
        sta_coefficients(20.0, 0.0)
    with pytest.raises(InvalidDuration):
        TransportSpec(1.0, 0.0, -1.0)


def test_boundary_conditions_are_exact():
    traj = PolynomialTrajectory.design(Axis.X, 18.85, 3.0, 20.0)
    assert traj.eval(0.0) == 0.0
    assert traj.eval(traj.t_f) == traj.d
    for order in (1, 2):
        assert traj.eval(0.0, order) == 0.0
        assert traj.eval(traj.t_f, order) == 0.0


def test_trajectory_is_antisymmetric_about_midpoint():
    traj = PolynomialTrajectory.design(Axis.X, 5.0, 1.3, 4.0)
    t = np.linspace(0.0, traj.t_f, 11)
    np.testing.assert_allclose(traj.eval(traj.t_f - t), traj.d - traj.eval(t), atol=1e-10)


def test_residual_vanishes_with_offset():
    a_x = -180.0
    traj = PolynomialTrajectory.design(Axis.X, 10.0, 2.0, 20.0, a_offset=-a_x / 400.0)
    qc = ClassicalTrajectory(Axis.X, 10.0, 2.0)
    t = np.linspace(0.0, 2.0, 21)
    residual = forced_oscillator_residual(traj, qc, a_x, t)
    np.testing.assert_allclose(residual, 0.0, atol=1e-8)


def test_residual_without_offset_is_constant():
    traj = PolynomialTrajectory.design(Axis.X, 10.0, 2.0, 20.0)
    qc = ClassicalTrajectory(Axis.X, 10.0, 2.0)
    residual = forced_oscillator_residual(traj, qc, -180.0, np.linspace(0.0, 2.0, 9), apply_offset=False)
    np.testing.assert_allclose(residual, 180.0, atol=1e-8)


def test_residual_y_axis():
    traj = PolynomialTrajectory.design(Axis.Y, 3.0, 1.0, 14.0)
    qc = ClassicalTrajectory(Axis.Y, 3.0, 1.0)
    np.testing.assert_allclose(forced_oscillator_residual(traj, qc, -180.0, [0.1, 0.5, 0.9]), 0.0, atol=1e-8)


def test_residual_axis_mismatch():
    traj = PolynomialTrajectory.design(Axis.Y, 3.0, 1.0, 14.0)
    with pytest.raises(AxisMismatch):
        forced_oscillator_residual(traj, ClassicalTrajectory(Axis.X, 3.0, 1.0), 0.0, 0.5)


def test_classical_coefficients():
    qc = classical_coefficients(10.0, 2.0, Axis.Y)
    assert qc == ClassicalTrajectory(Axis.Y, 10.0, 2.0)
    np.testing.assert_array_equal(qc.b, [126, -420, 540, -315, 70])
    assert qc.eval(2.0) == pytest.approx(10.0, abs=1e-12)


@pytest.mark.parametrize("t_f", [0.0, -1.0, math.nan])
def test_classical_reference_rejects_bad_duration(t_f):
    with pytest.raises(InvalidDuration):
        classical_coefficients(1.0, t_f)
    with pytest.raises(InvalidDuration):
        ClassicalTrajectory(Axis.X, 1.0, t_f)


def test_boundary_identities_hold_for_random_designs(rng):
    n = np.arange(3, 10)
    for omega, t_f in zip(rng.uniform(1.0, 50.0, 100), rng.uniform(0.1, 20.0, 100)):
        b = sta_coefficients(omega, t_f)
        for weights in (n, n * (n - 1)):
            terms = weights * b
            assert abs(np.sum(terms)) <= 1e-12 * max(1.0, np.sum(np.abs(terms)))
        assert np.sum(b) == pytest.approx(1.0, abs=1e-12 * np.sum(np.abs(b)))


def test_lattice_path_leads_the_atom_by_its_acceleration(rng):
    for omega, t_f in zip(rng.uniform(2.0, 30.0, 10), rng.uniform(0.2, 5.0, 10)):
        traj = PolynomialTrajectory.design(Axis.X, 1.0, t_f, omega)
        qc = classical_coefficients(1.0, t_f)
        expected = qc.polynomial + qc.polynomial.deriv(2) / (t_f * omega) ** 2
        coef = traj.polynomial.coef
        np.testing.assert_allclose(coef, expected.coef[:len(coef)], rtol=0, atol=1e-12 * np.max(np.abs(coef)))


def test_out_of_window():
    traj = PolynomialTrajectory.design(Axis.X, 1.0, 1.0, 5.0)
    with pytest.raises(OutOfWindow):
        traj.eval(1.5)
    with pytest.raises(OutOfWindow):
        traj.eval(-0.1)


def test_aom_program_integrates_to_the_distance(honeycomb):
    hp = harmonic_approximation(honeycomb)
    traj = PolynomialTrajectory.design(Axis.X, 18.85, 3 * 2 * math.pi / hp.omega_x, hp.omega_x)
    times, detuning = aom_program(traj, k_l=K_L, n_samples=40001)
    assert trapezoid(math.pi * detuning / K_L, times) == pytest.approx(traj.d, rel=1e-6)


def test_aom_program_endpoints_and_scale():
    traj = PolynomialTrajectory.design(Axis.X, 18.85, 3.0, 20.0)
    times, detuning = aom_program(traj, k_l=1.0, n_samples=51)
    assert detuning[0] == 0.0 and detuning[-1] == 0.0
    assert detuning[25] == pytest.approx(traj.eval(times[25], 1) / math.pi)


def test_trajectory_2d_zero_distance(honeycomb):
    hp = harmonic_approximation(honeycomb)
    traj_x, traj_y = trajectory_2d(TransportSpec(0.0, 0.0, 1.0), hp)
    t = np.linspace(0.0, 1.0, 7)
    for traj in (traj_x, traj_y):
        for order in (0, 1, 2):
            np.testing.assert_array_equal(traj.eval(t, order), 0.0)
    assert traj_x.a_offset == pytest.approx(180.0 / 400.0)
    assert traj_y.a_offset == 0.0


def test_diagonal_transport_uses_axis_frequencies(honeycomb):
    hp = harmonic_approximation(honeycomb)
    traj_x, traj_y = trajectory_2d(TransportSpec(2 * math.pi, 2 * math.pi, 1.0), hp)
    assert traj_x.omega == pytest.approx(hp.omega_x)
    assert traj_y.omega == pytest.approx(hp.omega_y)
    assert traj_x.b != traj_y.b


def test_collocation_samples():
    traj = PolynomialTrajectory.design(Axis.X, 2.0, 1.0, 10.0)
    samples = traj.collocation_samples()
    assert samples.shape == (6,)
    assert samples[0] == pytest.approx(traj.eval(1.0 / 7))
    assert np.all(np.diff(samples) > 0)


def test_retimed_and_rescaled_keep_shape():
    traj = PolynomialTrajectory.design(Axis.X, 2.0, 1.0, 10.0)
    slow = traj.retimed(1.1)
    assert slow.b == traj.b and slow.t_f == pytest.approx(1.1)
    assert traj.rescaled(1.05).eval(1.0) == pytest.approx(2.1)


def test_max_acceleration_grows_for_short_transport(honeycomb):
    hp = harmonic_approximation(honeycomb)
    fast = max_acceleration(trajectory_2d(TransportSpec(6.0, 0.0, 1.0), hp))
    slow = max_acceleration(trajectory_2d(TransportSpec(6.0, 0.0, 4.0), hp))
    assert fast > slow > 0


def test_classical_acceleration_scales_as_inverse_square_duration():
    peaks = []
    for t_f in (0.5, 1.0, 4.0):
        qc = classical_coefficients(3.0, t_f)
        peaks.append(np.max(np.abs(qc.eval(np.linspace(0.0, t_f, 2001), 2))) * t_f ** 2)
    np.testing.assert_allclose(peaks, peaks[0], rtol=1e-12)


def test_adiabatic_acceleration_scales_as_inverse_square_duration(honeycomb):
    hp = harmonic_approximation(honeycomb)
    slow = max_acceleration(trajectory_2d(TransportSpec(6.0, 0.0, 40.0), hp))
    slower = max_acceleration(trajectory_2d(TransportSpec(6.0, 0.0, 80.0), hp))
    assert slow / slower == pytest.approx(4.0, rel=1e-3)
