# lattice_potential.py - Tunable 2D optical lattice potential and its harmonic approximation
import logging
import math
from dataclasses import dataclass, replace
from enum import Enum
from functools import lru_cache
from typing import Dict, List, Tuple

import numpy as np
import pandas as pd

from config import (
    DEFAULT_LATTICE_PHASES, FIND_MINIMUM, K_L, LATTICE_PRESETS, MASS,
)
from errors import InvalidConfigValue, NoConvergence, NonCommensurateGrid, UnstableAxis
from spectral_propagator import Grid2D
from utils import er_to_internal, is_integer_multiple, lattice_period

logger = logging.getLogger(__name__)


class LatticeKind(str, Enum):
    HONEYCOMB = "honeycomb"
    SQUARE = "square"
    CHAINS_1D = "chains1d"
    DIMERIZED = "dimerized"
    CHECKERBOARD = "checkerboard"


@dataclass(frozen=True)
class LatticeParams:
    """Beam depths in E_R, phases in radians, interference visibility alpha"""
    u_x: float
    u_xbar: float
    u_y: float
    theta: float = 0.0
    phi: float = 0.0
    alpha: float = 0.9
    k_l: float = K_L

    def __post_init__(self):
        for name in ("u_x", "u_xbar", "u_y"):
            value = getattr(self, name)
            if not math.isfinite(value) or value < 0:
                raise InvalidConfigValue(f"{name} must be a finite non-negative depth, got {value}")
        if not 0.0 <= self.alpha <= 1.0:
            raise InvalidConfigValue(f"alpha must lie in [0, 1], got {self.alpha}")
        if self.k_l <= 0:
            raise InvalidConfigValue("k_l must be positive")

    @property
    def depths(self) -> Tuple[float, float, float]:
        return (self.u_x, self.u_xbar, self.u_y)


@dataclass(frozen=True)
class HarmonicParams:
    """Quadratic expansion around the lattice minimum.

    v_d0 is in E_R; omega_x, omega_y and a_x are in internal units.
    """
    v_d0: float
    omega_x: float
    omega_y: float
    a_x: float


@dataclass(frozen=True)
class LatticePreset:
    name: str
    display_name: str
    description: str
    depths_E_R: Tuple[float, float, float]
    experimental: bool


class LatticePresetManager:
    """Registry of named lattice geometries"""

    PRESETS: Dict[str, LatticePreset] = {
        key: LatticePreset(
            name=key,
            display_name=spec["display_name"],
            description=spec["description"],
            depths_E_R=tuple(spec["depths_E_R"]),
            experimental=spec["experimental"],
        )
        for key, spec in LATTICE_PRESETS.items()
    }

    @classmethod
    def get_preset(cls, kind) -> LatticePreset:
        key = kind.value if isinstance(kind, LatticeKind) else str(kind)
        if key not in cls.PRESETS:
            raise InvalidConfigValue(f"unknown lattice preset '{key}' (choose from {', '.join(cls.PRESETS)})")
        return cls.PRESETS[key]

    @classmethod
    def get_all_presets(cls) -> List[LatticePreset]:
        return list(cls.PRESETS.values())

    @classmethod
    def build_params(cls, kind, **overrides) -> LatticeParams:
        entry = cls.get_preset(kind)
        u_x, u_xbar, u_y = entry.depths_E_R
        settings = dict(DEFAULT_LATTICE_PHASES)
        settings.update(overrides)
        return LatticeParams(u_x=u_x, u_xbar=u_xbar, u_y=u_y,
                             theta=settings["theta_rad"], phi=settings["phi_rad"],
                             alpha=settings["alpha"])


def preset(kind) -> LatticeParams:
    return LatticePresetManager.build_params(kind)


def scale_depths(params: LatticeParams, factor: float) -> LatticeParams:
    """Multiply all three depths by factor; phases and alpha unchanged"""
    if not factor > 0:
        raise InvalidConfigValue(f"depth scale must be positive, got {factor}")
    return replace(params, u_x=params.u_x * factor, u_xbar=params.u_xbar * factor,
                   u_y=params.u_y * factor)


def _potential(params: LatticeParams, x, y):
    k = params.k_l
    coupling = 2 * params.alpha * math.sqrt(params.u_x * params.u_y) * math.cos(params.phi)
    return (-params.u_x * np.sin(k * x) ** 2
            - params.u_y * np.cos(k * y) ** 2
            - params.u_xbar * np.cos(k * x + params.theta / 2) ** 2
            - coupling * np.sin(k * x) * np.cos(k * y))


def evaluate_potential(params: LatticeParams, x: float, y: float) -> float:
    """Lattice potential in E_R at a single point"""
    return float(_potential(params, x, y))


def _check_commensurate(params: LatticeParams, grid: Grid2D):
    period = lattice_period(params.k_l)
    if not (is_integer_multiple(grid.l_x_extent, period) and is_integer_multiple(grid.l_y_extent, period)):
        raise NonCommensurateGrid(
            f"window {grid.l_x_extent:.6g} x {grid.l_y_extent:.6g} is not a whole number of "
            f"lattice periods ({period:.6g})")


@lru_cache(maxsize=32)
def evaluate_potential_batch(params: LatticeParams, grid: Grid2D) -> np.ndarray:
    """Lattice potential in E_R on every grid point (read-only, cached per params and grid)"""
    _check_commensurate(params, grid)
    X, Y = grid.mesh
    field = _potential(params, X, Y)
    field.setflags(write=False)
    logger.debug(f"Evaluated potential on {grid.n_x}x{grid.n_y} grid, min={field.min():.6g} E_R")
    return field


def harmonic_approximation(params: LatticeParams) -> HarmonicParams:
    """Second-order expansion of the lattice potential around the origin.

    Raises UnstableAxis if either squared frequency is not positive.
    """
    u_x, u_xbar, u_y = (er_to_internal(u) for u in params.depths)
    k = params.k_l
    omega_x_sq = 2 * k ** 2 * (u_xbar * math.cos(params.theta) - u_x) / MASS
    omega_y_sq = 2 * k ** 2 * u_y / MASS
    if omega_x_sq <= 0:
        raise UnstableAxis(f"omega_x^2 = {omega_x_sq:.6g} <= 0: no confining minimum along x")
    if omega_y_sq <= 0:
        raise UnstableAxis(f"omega_y^2 = {omega_y_sq:.6g} <= 0: no confining minimum along y")
    a_x = (k / MASS) * (u_xbar * math.sin(params.theta)
                        - 2 * params.alpha * math.sqrt(u_x * u_y) * math.cos(params.phi))
    v_d0 = params.u_y + params.u_xbar * math.cos(params.theta / 2) ** 2
    return HarmonicParams(v_d0=v_d0, omega_x=math.sqrt(omega_x_sq), omega_y=math.sqrt(omega_y_sq), a_x=a_x)


def harmonic_potential_batch(hp: HarmonicParams, grid: Grid2D) -> np.ndarray:
    """Harmonic-approximation potential in E_R on the grid"""
    X, Y = grid.mesh
    internal = (MASS * hp.a_x * X
                + 0.5 * MASS * (hp.omega_x ** 2 * X ** 2 + hp.omega_y ** 2 * Y ** 2))
    return internal / er_to_internal(1.0) - hp.v_d0


def _gradient_hessian(params: LatticeParams, x: float, y: float):
    k = params.k_l
    c = 2 * params.alpha * math.sqrt(params.u_x * params.u_y) * math.cos(params.phi)
    sx, cx = math.sin(k * x), math.cos(k * x)
    sy, cy = math.sin(k * y), math.cos(k * y)
    shifted = 2 * k * x + params.theta
    gx = k * (-params.u_x * math.sin(2 * k * x) + params.u_xbar * math.sin(shifted) - c * cx * cy)
    gy = k * (params.u_y * math.sin(2 * k * y) + c * sx * sy)
    hxx = k ** 2 * (-2 * params.u_x * math.cos(2 * k * x) + 2 * params.u_xbar * math.cos(shifted) + c * sx * cy)
    hyy = k ** 2 * (2 * params.u_y * math.cos(2 * k * y) + c * sx * cy)
    hxy = k ** 2 * c * cx * sy
    return np.array([gx, gy]), np.array([[hxx, hxy], [hxy, hyy]])


def find_minimum(params: LatticeParams, seed: Tuple[float, float] = (0.0, 0.0)) -> Tuple[float, float]:
    """Damped Newton search for the local minimum nearest the seed"""
    point = np.array(seed, dtype=float)
    tol = FIND_MINIMUM["gradient_tol"]
    value = evaluate_potential(params, *point)
    for iteration in range(FIND_MINIMUM["max_iterations"]):
        grad, hess = _gradient_hessian(params, *point)
        if np.linalg.norm(grad) < tol:
            logger.debug(f"Minimum at ({point[0]:.12g}, {point[1]:.12g}) after {iteration} iterations")
            return float(point[0]), float(point[1])
        eigenvalues = np.linalg.eigvalsh(hess)
        if eigenvalues[0] > 0:
            direction = -np.linalg.solve(hess, grad)
        else:
            direction = -grad / max(abs(eigenvalues[-1]), 1.0)
        step = 1.0
        while step > 1e-12:
            candidate = point + step * direction
            candidate_value = evaluate_potential(params, *candidate)
            if candidate_value <= value:
                break
            step /= 2
        else:
            # Newton step is below roundoff; accept the point if the gradient is small
            break
        point, value = candidate, candidate_value
    grad, _ = _gradient_hessian(params, *point)
    if np.linalg.norm(grad) < tol:
        return float(point[0]), float(point[1])
    raise NoConvergence(f"minimum search from {seed} stalled with |grad|={np.linalg.norm(grad):.3e}")


def max_lattice_force(params: LatticeParams, samples: int = 256) -> float:
    """Largest |grad U| over one unit cell, internal units (restoring-force ceiling)"""
    period = lattice_period(params.k_l)
    axis = np.linspace(-period / 2, period / 2, samples, endpoint=False)
    X, Y = np.meshgrid(axis, axis, indexing="ij")
    k = params.k_l
    c = 2 * params.alpha * math.sqrt(params.u_x * params.u_y) * math.cos(params.phi)
    gx = k * (-params.u_x * np.sin(2 * k * X) + params.u_xbar * np.sin(2 * k * X + params.theta)
              - c * np.cos(k * X) * np.cos(k * Y))
    gy = k * (params.u_y * np.sin(2 * k * Y) + c * np.sin(k * X) * np.sin(k * Y))
    return float(er_to_internal(np.max(np.hypot(gx, gy))))


def potential_field_frame(params: LatticeParams, grid: Grid2D) -> pd.DataFrame:
    """Long-format (x, y, U) table of the potential on the grid"""
    X, Y = grid.mesh
    field = evaluate_potential_batch(params, grid)
    return pd.DataFrame({"x": X.ravel(), "y": Y.ravel(), "U": np.asarray(field).ravel()})
