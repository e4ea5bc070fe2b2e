# spectral_propagator.py - Split-operator propagation on a periodic 2D grid
import logging
import math
from dataclasses import dataclass, field
from functools import cached_property
from typing import Dict, List, Optional, Tuple

import numpy as np
import pandas as pd
import scipy.fft

from config import DEFAULT_STEPPER, LATTICE_PERIOD, MACRO_SNAP_FRACTION, N_T_BOUNDS, STEP_UNDERFLOW_FRACTION
from errors import (
    AxisMismatch, GridMismatch, InvalidConfigValue, ShapeMismatch, StepUnderflow,
)

logger = logging.getLogger(__name__)

FFT_WORKERS = -1


@dataclass(frozen=True)
class Grid2D:
    """Uniform periodic grid centred on the origin, x in [-L/2, L/2)"""
    n_x: int
    n_y: int
    l_x_extent: float
    l_y_extent: float

    def __post_init__(self):
        if self.n_x < 2 or self.n_y < 2:
            raise InvalidConfigValue(f"grid needs at least 2 points per axis, got {self.n_x}x{self.n_y}")
        if self.l_x_extent <= 0 or self.l_y_extent <= 0:
            raise InvalidConfigValue("grid extents must be positive")

    @classmethod
    def from_periods(cls, n_x: int, n_y: int, periods_x: int, periods_y: int,
                     period: float = LATTICE_PERIOD) -> "Grid2D":
        return cls(int(n_x), int(n_y), periods_x * period, periods_y * period)

    @property
    def shape(self) -> Tuple[int, int]:
        return (self.n_x, self.n_y)

    @property
    def dx(self) -> float:
        return self.l_x_extent / self.n_x

    @property
    def dy(self) -> float:
        return self.l_y_extent / self.n_y

    @property
    def cell_area(self) -> float:
        return self.dx * self.dy

    @cached_property
    def x(self) -> np.ndarray:
        return -self.l_x_extent / 2 + self.dx * np.arange(self.n_x)

    @cached_property
    def y(self) -> np.ndarray:
        return -self.l_y_extent / 2 + self.dy * np.arange(self.n_y)

    @cached_property
    def mesh(self) -> Tuple[np.ndarray, np.ndarray]:
        return np.meshgrid(self.x, self.y, indexing="ij")

    @cached_property
    def k_x(self) -> np.ndarray:
        """Angular wavenumbers in FFT ordering"""
        return 2 * np.pi * scipy.fft.fftfreq(self.n_x, d=self.dx)

    @cached_property
    def k_y(self) -> np.ndarray:
        return 2 * np.pi * scipy.fft.fftfreq(self.n_y, d=self.dy)

    @cached_property
    def k_mesh(self) -> Tuple[np.ndarray, np.ndarray]:
        return np.meshgrid(self.k_x, self.k_y, indexing="ij")

    @cached_property
    def k_squared(self) -> np.ndarray:
        kx, ky = self.k_mesh
        return kx ** 2 + ky ** 2


@dataclass
class WaveFunction:
    """Complex amplitudes on a grid, normalized so sum |psi|^2 dA = 1"""
    amplitudes: np.ndarray
    grid: Grid2D

    def __post_init__(self):
        if self.amplitudes.shape != self.grid.shape:
            raise ShapeMismatch(f"amplitudes {self.amplitudes.shape} do not match grid {self.grid.shape}")
        self.amplitudes = np.asarray(self.amplitudes, dtype=np.complex128)

    def norm(self) -> float:
        return math.sqrt(float(np.sum(np.abs(self.amplitudes) ** 2)) * self.grid.cell_area)

    def normalized(self) -> "WaveFunction":
        return WaveFunction(self.amplitudes / self.norm(), self.grid)

    def density(self) -> np.ndarray:
        return np.abs(self.amplitudes) ** 2

    def inner(self, other: "WaveFunction") -> complex:
        """<self|other>"""
        if self.grid != other.grid:
            raise GridMismatch("wave functions live on different grids")
        return complex(np.vdot(self.amplitudes, other.amplitudes) * self.grid.cell_area)

    def shifted(self, dx: float, dy: float) -> "WaveFunction":
        """Periodic translation by (dx, dy) applied as a spectral phase"""
        kx, ky = self.grid.k_mesh
        spectrum = fft_forward(self.amplitudes, self.grid)
        return WaveFunction(fft_inverse(spectrum * np.exp(-1j * (kx * dx + ky * dy)), self.grid), self.grid)

    @classmethod
    def gaussian(cls, grid: Grid2D, center: Tuple[float, float], sigma: Tuple[float, float],
                 momentum: Tuple[float, float] = (0.0, 0.0)) -> "WaveFunction":
        """Normalized Gaussian wave packet sampled on the grid"""
        X, Y = grid.mesh
        envelope = np.exp(-((X - center[0]) ** 2) / (4 * sigma[0] ** 2)
                          - ((Y - center[1]) ** 2) / (4 * sigma[1] ** 2))
        phase = np.exp(1j * (momentum[0] * X + momentum[1] * Y))
        return cls(envelope * phase, grid).normalized()


@dataclass(frozen=True)
class Observables:
    x_mean: float
    y_mean: float
    px_mean: float
    py_mean: float
    kinetic: float
    norm: float


@dataclass
class StepperConfig:
    rel_tol: float = DEFAULT_STEPPER["rel_tol"]
    n_t_initial: int = DEFAULT_STEPPER["n_t_initial"]
    max_substeps: int = DEFAULT_STEPPER["max_substeps"]
    record_trace: bool = False

    def __post_init__(self):
        if not self.rel_tol > 0:
            raise InvalidConfigValue(f"rel_tol must be positive, got {self.rel_tol}")
        if self.max_substeps < 1:
            raise InvalidConfigValue("max_substeps must be at least 1")

    @property
    def macro_steps(self) -> int:
        lo, hi = N_T_BOUNDS
        return int(min(max(self.n_t_initial, lo), hi))


@dataclass
class PropagationResult:
    psi: WaveFunction
    n_steps: int
    step_history: List[Tuple[float, float, float]] = field(default_factory=list)
    trace: Optional[pd.DataFrame] = None


def fft_forward(amplitudes: np.ndarray, grid: Grid2D) -> np.ndarray:
    """Unitary 2D FFT of a real-space field"""
    if amplitudes.shape != grid.shape:
        raise ShapeMismatch(f"field {amplitudes.shape} does not match grid {grid.shape}")
    return scipy.fft.fft2(amplitudes, norm="ortho", workers=FFT_WORKERS)


def fft_inverse(spectrum: np.ndarray, grid: Grid2D) -> np.ndarray:
    if spectrum.shape != grid.shape:
        raise ShapeMismatch(f"spectrum {spectrum.shape} does not match grid {grid.shape}")
    return scipy.fft.ifft2(spectrum, norm="ortho", workers=FFT_WORKERS)


class SplitOperatorKernel:
    """Caches the exponential factors of one potential field, keyed by time step"""

    def __init__(self, potential: np.ndarray, grid: Grid2D, imaginary: bool = False):
        if potential.shape != grid.shape:
            raise ShapeMismatch(f"potential {potential.shape} does not match grid {grid.shape}")
        self.potential = potential
        self.grid = grid
        self.imaginary = imaginary
        self._factors: Dict[float, Tuple[np.ndarray, np.ndarray]] = {}

    def _exp(self, generator: np.ndarray, dt: float) -> np.ndarray:
        if self.imaginary:
            return np.exp(-generator * dt)
        return np.exp(-1j * generator * dt)

    def factors(self, dt: float) -> Tuple[np.ndarray, np.ndarray]:
        if dt not in self._factors:
            if len(self._factors) > 64:
                self._factors.clear()
            self._factors[dt] = (
                self._exp(self.potential, dt / 2),
                self._exp(self.grid.k_squared / 2, dt),
            )
        return self._factors[dt]

    def step(self, amplitudes: np.ndarray, dt: float,
             dq_dot: Tuple[float, float] = (0.0, 0.0)) -> np.ndarray:
        half_kick, kinetic = self.factors(dt)
        psi = half_kick * amplitudes
        boosted = dq_dot[0] != 0.0 or dq_dot[1] != 0.0
        if boosted:
            X, Y = self.grid.mesh
            psi = psi * np.exp(-1j * (X * dq_dot[0] + Y * dq_dot[1]))
        spectrum = fft_forward(psi, self.grid) * kinetic
        if boosted:
            kx, ky = self.grid.k_mesh
            spectrum = spectrum * np.exp(-0.5j * dt * (kx * dq_dot[0] + ky * dq_dot[1]))
        return half_kick * fft_inverse(spectrum, self.grid)


def strang_step_static(psi: WaveFunction, potential: np.ndarray, dt: float) -> WaveFunction:
    """One symmetric split step exp(-iV dt/2) exp(-iT dt) exp(-iV dt/2)"""
    kernel = SplitOperatorKernel(potential, psi.grid)
    return WaveFunction(kernel.step(psi.amplitudes, dt), psi.grid)


def comoving_step(psi: WaveFunction, potential: np.ndarray, dq_dot: Tuple[float, float],
                  dt: float) -> WaveFunction:
    """Split step in the frame moving with the lattice.

    dq_dot is the change of the lattice velocity across the step; the inertial
    force enters as a momentum boost plus a matching spectral phase.
    """
    kernel = SplitOperatorKernel(potential, psi.grid)
    return WaveFunction(kernel.step(psi.amplitudes, dt, dq_dot), psi.grid)


def observables(psi: WaveFunction) -> Observables:
    grid = psi.grid
    density = psi.density() * grid.cell_area
    X, Y = grid.mesh
    spectral_density = np.abs(fft_forward(psi.amplitudes, grid)) ** 2 * grid.cell_area
    kx, ky = grid.k_mesh
    return Observables(
        x_mean=float(np.sum(X * density)),
        y_mean=float(np.sum(Y * density)),
        px_mean=float(np.sum(kx * spectral_density)),
        py_mean=float(np.sum(ky * spectral_density)),
        kinetic=float(np.sum(grid.k_squared / 2 * spectral_density)),
        norm=math.sqrt(float(np.sum(density))),
    )


def _phase_aligned_distance(a: np.ndarray, b: np.ndarray, cell_area: float) -> float:
    """||a - e^{i phi} b|| with the global phase phi chosen to align b onto a"""
    overlap = np.vdot(b, a)
    phase = overlap / abs(overlap) if abs(overlap) > 0 else 1.0
    return math.sqrt(float(np.sum(np.abs(a - phase * b) ** 2)) * cell_area)


def set_fft_workers(workers: int) -> None:
    """Thread count used by every FFT in this process (-1 = all cores)"""
    global FFT_WORKERS
    FFT_WORKERS = workers


def _check_momentum_window(trajectories, grid: Grid2D, samples: int = 201) -> bool:
    """Warn when the lattice speed reaches the grid's Nyquist wavenumber (hbar = m = 1)"""
    inside = True
    for traj, spacing in zip(trajectories, (grid.dx, grid.dy)):
        times = np.linspace(0.0, traj.t_f, samples)
        peak = float(np.max(np.abs(traj.eval(times, 1))))
        k_max = math.pi / spacing
        if peak >= k_max:
            logger.warning(f"Peak lattice speed {peak:.4g} on axis {traj.axis.value} reaches the grid "
                           f"momentum limit {k_max:.4g}; refine the grid for faithful results")
            inside = False
    return inside


def _resolve_potential(potential, grid: Grid2D) -> np.ndarray:
    if isinstance(potential, np.ndarray):
        return potential
    # Import here to avoid circular imports
    from lattice_potential import evaluate_potential_batch
    from utils import er_to_internal
    return er_to_internal(np.asarray(evaluate_potential_batch(potential, grid)))


def propagate(psi0: WaveFunction, potential, trajectories, config: Optional[StepperConfig] = None
              ) -> PropagationResult:
    """Adaptive comoving propagation over [0, t_f].

    potential is either a LatticeParams (evaluated on the grid) or a field in
    internal energy units. trajectories is the (x, y) pair of lattice
    trajectories; both must share t_f. Each macro step of t_f/N_t is covered by
    Strang substeps; a substep is accepted when the phase-aligned distance
    between one full step and two half steps is below rel_tol.
    """
    config = config or StepperConfig()
    traj_x, traj_y = trajectories
    if not math.isclose(traj_x.t_f, traj_y.t_f, rel_tol=1e-12):
        raise AxisMismatch(f"trajectories end at different times ({traj_x.t_f} vs {traj_y.t_f})")
    t_f = traj_x.t_f
    grid = psi0.grid
    field = _resolve_potential(potential, grid)
    kernel = SplitOperatorKernel(field, grid)

    def velocity(t: float) -> np.ndarray:
        return np.array([traj_x.eval(t, 1), traj_y.eval(t, 1)])

    def step(amplitudes: np.ndarray, t: float, dt: float) -> np.ndarray:
        dq = velocity(min(t + dt, t_f)) - velocity(t)
        return kernel.step(amplitudes, dt, (float(dq[0]), float(dq[1])))

    n_macro = config.macro_steps
    macro = t_f / n_macro
    min_step = t_f * STEP_UNDERFLOW_FRACTION
    snap = macro * MACRO_SNAP_FRACTION
    amplitudes = psi0.amplitudes.copy()
    history: List[Tuple[float, float, float]] = []
    trace_rows = []
    dt = macro
    n_steps = 0

    _check_momentum_window(trajectories, grid)
    logger.info(f"Propagating to t_f={t_f:.6g} with {n_macro} macro steps, rel_tol={config.rel_tol:g}")
    for m in range(n_macro):
        t = m * macro
        t_end = t_f if m == n_macro - 1 else (m + 1) * macro
        substeps = 0
        while t < t_end:
            # a remainder below the snap length is absorbed into this substep
            closing = dt >= t_end - t - snap
            if closing:
                dt = t_end - t
            full = step(amplitudes, t, dt)
            half = step(step(amplitudes, t, dt / 2), t + dt / 2, dt / 2)
            err = _phase_aligned_distance(full, half, grid.cell_area)
            if err < config.rel_tol:
                amplitudes = half
                t = t_end if closing else t + dt
                substeps += 1
                n_steps += 1
                history.append((t, dt, err))
                if config.record_trace:
                    obs = observables(WaveFunction(amplitudes, grid))
                    trace_rows.append({"t": t, "norm": obs.norm, "x_mean": obs.x_mean,
                                       "y_mean": obs.y_mean, "dt_accepted": dt})
                if substeps > config.max_substeps:
                    raise StepUnderflow(f"macro step {m} needed more than {config.max_substeps} substeps")
                if err < 0.25 * config.rel_tol:
                    dt = min(2 * dt, macro)
            else:
                dt /= 2
                logger.debug(f"Rejected step at t={t:.6g}, err={err:.3e}, retrying with dt={dt:.3e}")
                if dt < min_step:
                    raise StepUnderflow(f"time step {dt:.3e} fell below {min_step:.3e} at t={t:.6g}")
        logger.debug(f"Macro step {m + 1}/{n_macro} done with {substeps} substeps")

    psi = WaveFunction(amplitudes, grid)
    trace = pd.DataFrame(trace_rows, columns=["t", "norm", "x_mean", "y_mean", "dt_accepted"]) \
        if config.record_trace else None
    logger.info(f"Propagation finished after {n_steps} accepted steps, norm={psi.norm():.12f}")
    return PropagationResult(psi=psi, n_steps=n_steps, step_history=history, trace=trace)
