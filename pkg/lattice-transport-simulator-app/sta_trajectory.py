# sta_trajectory.py - Shortcut-to-adiabaticity lattice trajectories
import logging
import math
from dataclasses import dataclass, replace
from enum import Enum
from typing import Tuple

import numpy as np
from numpy.polynomial import Polynomial

from config import K_L
from errors import AxisMismatch, InvalidDuration, OutOfWindow, UnstableAxis

logger = logging.getLogger(__name__)

# Classical minimum-jerk-like reference: q_c(s)/d for s = t/t_f
CLASSICAL_COEFFICIENTS = (0.0, 0.0, 0.0, 0.0, 0.0, 126.0, -420.0, 540.0, -315.0, 70.0)
COLLOCATION_POINTS = 7
ENDPOINT_TOLERANCE = 1e-12


class Axis(str, Enum):
    X = "x"
    Y = "y"


@dataclass(frozen=True)
class TransportSpec:
    """Transport distances along each axis and duration (internal units)"""
    d_x: float
    d_y: float
    t_f: float

    def __post_init__(self):
        if not (math.isfinite(self.t_f) and self.t_f > 0):
            raise InvalidDuration(f"transport time must be positive, got {self.t_f}")


def _check_inputs(omega: float, t_f: float):
    if not (math.isfinite(t_f) and t_f > 0):
        raise InvalidDuration(f"transport time must be positive, got {t_f}")
    if not omega > 0:
        raise UnstableAxis(f"trap frequency must be positive, got {omega}")


def sta_coefficients(omega: float, t_f: float) -> np.ndarray:
    """Coefficients b_3..b_9 of the lattice trajectory q_0(s)/d"""
    _check_inputs(omega, t_f)
    s = 1.0 / (t_f * omega) ** 2
    return np.array([
        2520 * s,
        -12600 * s,
        22680 * s + 126,
        -17640 * s - 420,
        5040 * s + 540,
        -315.0,
        70.0,
    ])


def _full_series(b) -> np.ndarray:
    return np.concatenate([np.zeros(3), np.asarray(b, dtype=float)])


@dataclass(frozen=True)
class PolynomialTrajectory:
    """Lattice position q_0(t) = d * sum_n b_n (t/t_f)^n along one axis.

    a_offset is the equilibrium shift -a_x/omega_x^2 of the atom relative to
    the lattice (zero for the y axis).
    """
    axis: Axis
    d: float
    t_f: float
    omega: float
    b: Tuple[float, ...]
    a_offset: float = 0.0

    @classmethod
    def design(cls, axis: Axis, d: float, t_f: float, omega: float, a_offset: float = 0.0
               ) -> "PolynomialTrajectory":
        return cls(axis=Axis(axis), d=float(d), t_f=float(t_f), omega=float(omega),
                   b=tuple(float(v) for v in sta_coefficients(omega, t_f)), a_offset=float(a_offset))

    @property
    def polynomial(self) -> Polynomial:
        return Polynomial(self.d * _full_series(self.b))

    def _scaled_time(self, t):
        t = np.asarray(t, dtype=float)
        slack = ENDPOINT_TOLERANCE * self.t_f
        if np.any(t < -slack) or np.any(t > self.t_f + slack):
            raise OutOfWindow(f"time outside [0, {self.t_f:.6g}]")
        return np.clip(t, 0.0, self.t_f) / self.t_f

    def eval(self, t, order: int = 0):
        """Position (order 0), velocity (1) or acceleration (2) at time(s) t"""
        if order not in (0, 1, 2):
            raise ValueError(f"derivative order must be 0, 1 or 2, got {order}")
        s = self._scaled_time(t)
        values = self.polynomial.deriv(order)(s) / self.t_f ** order if order else self.polynomial(s)
        # boundary conditions hold exactly at the endpoints
        values = np.where(s == 1.0, self.d if order == 0 else 0.0, values)
        values = np.where(s == 0.0, 0.0, values)
        return float(values) if np.ndim(values) == 0 else values

    def retimed(self, factor: float) -> "PolynomialTrajectory":
        """Same coefficients executed over t_f * factor"""
        return replace(self, t_f=self.t_f * factor)

    def rescaled(self, factor: float) -> "PolynomialTrajectory":
        """Same shape with the distance multiplied by factor"""
        return replace(self, d=self.d * factor)

    def collocation_samples(self) -> np.ndarray:
        """q_0 at the interior points j*t_f/7, j = 1..6"""
        times = self.t_f * np.arange(1, COLLOCATION_POINTS) / COLLOCATION_POINTS
        return np.asarray(self.eval(times))


@dataclass(frozen=True)
class ClassicalTrajectory:
    """Reference trajectory of the atom: q_c(s) = d(126s^5 - 420s^6 + 540s^7 - 315s^8 + 70s^9)"""
    axis: Axis
    d: float
    t_f: float

    def __post_init__(self):
        if not (math.isfinite(self.t_f) and self.t_f > 0):
            raise InvalidDuration(f"transport time must be positive, got {self.t_f}")

    @property
    def b(self) -> np.ndarray:
        """Coefficients b_5..b_9 of q_c(s)/d"""
        return np.array(CLASSICAL_COEFFICIENTS[5:])

    @property
    def polynomial(self) -> Polynomial:
        return Polynomial(self.d * np.array(CLASSICAL_COEFFICIENTS))

    def eval(self, t, order: int = 0):
        if order not in (0, 1, 2):
            raise ValueError(f"derivative order must be 0, 1 or 2, got {order}")
        t = np.asarray(t, dtype=float)
        slack = ENDPOINT_TOLERANCE * self.t_f
        if np.any(t < -slack) or np.any(t > self.t_f + slack):
            raise OutOfWindow(f"time outside [0, {self.t_f:.6g}]")
        s = np.clip(t, 0.0, self.t_f) / self.t_f
        values = self.polynomial.deriv(order)(s) / self.t_f ** order if order else self.polynomial(s)
        return float(values) if np.ndim(values) == 0 else values


def classical_coefficients(d: float, t_f: float, axis: Axis = Axis.X) -> ClassicalTrajectory:
    """Classical reference of the atom for a transport over d in time t_f"""
    return ClassicalTrajectory(Axis(axis), float(d), float(t_f))


def forced_oscillator_residual(traj: PolynomialTrajectory, qc: ClassicalTrajectory, a_x: float, t,
                               apply_offset: bool = True):
    """Residual q_c'' + omega^2 (q_c + shift - q_0) - a of the driven oscillator.

    For the x axis the classical trajectory is taken relative to the shifted
    equilibrium (shift = a_x/omega^2) so the residual vanishes; leaving the
    shift out gives a constant -a_x.
    """
    if traj.axis != qc.axis:
        raise AxisMismatch(f"trajectory axis {traj.axis.value} vs classical axis {qc.axis.value}")
    if not (math.isclose(traj.d, qc.d, rel_tol=1e-12, abs_tol=1e-300)
            and math.isclose(traj.t_f, qc.t_f, rel_tol=1e-12)):
        raise AxisMismatch("trajectory and classical reference describe different transports")
    drive = a_x if traj.axis == Axis.X else 0.0
    shift = drive / traj.omega ** 2 if apply_offset else 0.0
    omega_sq = traj.omega ** 2
    return (np.asarray(qc.eval(t, 2)) + omega_sq * (np.asarray(qc.eval(t)) + shift - np.asarray(traj.eval(t)))
            - drive)


def aom_program(traj: PolynomialTrajectory, k_l: float = K_L, n_samples: int = 201
                ) -> Tuple[np.ndarray, np.ndarray]:
    """Frequency detuning delta_f(t) = q_0'(t) k_l / pi realising the trajectory"""
    if n_samples < 2:
        raise ValueError("n_samples must be at least 2")
    times = np.linspace(0.0, traj.t_f, n_samples)
    detuning = np.asarray(traj.eval(times, 1)) * k_l / math.pi
    return times, detuning


def trajectory_2d(spec: TransportSpec, hp) -> Tuple[PolynomialTrajectory, PolynomialTrajectory]:
    """Independent x and y trajectories for a diagonal transport"""
    traj_x = PolynomialTrajectory.design(Axis.X, spec.d_x, spec.t_f, hp.omega_x,
                                         a_offset=-hp.a_x / hp.omega_x ** 2)
    traj_y = PolynomialTrajectory.design(Axis.Y, spec.d_y, spec.t_f, hp.omega_y)
    logger.debug(f"Designed trajectories d=({spec.d_x:.6g}, {spec.d_y:.6g}) over t_f={spec.t_f:.6g}")
    return traj_x, traj_y


def max_acceleration(trajectories, n_samples: int = 1001) -> float:
    """Peak |q_0''| of the combined 2D lattice motion"""
    traj_x, traj_y = trajectories
    times = np.linspace(0.0, traj_x.t_f, n_samples)
    return float(np.max(np.hypot(traj_x.eval(times, 2), traj_y.eval(times, 2))))
