# ground_state.py - Imaginary-time relaxation to the lattice ground state
import logging
import math
from dataclasses import dataclass
from typing import List, Optional, Tuple

import numpy as np

from config import DEFAULT_ITE, DEGENERATE_SEED_OVERLAP, E_R_INTERNAL, ITE_REFINEMENT, SEED_WIDTH_FRACTION
from errors import DegenerateSeed, InvalidConfigValue, NoConvergence
from spectral_propagator import Grid2D, SplitOperatorKernel, WaveFunction, fft_forward
from utils import er_to_internal

logger = logging.getLogger(__name__)


@dataclass
class ItetConfig:
    """Imaginary-time schedule: start at dtau_start, halve on convergence, finish at dtau"""
    dtau: float = DEFAULT_ITE["dtau"]
    dtau_start: float = DEFAULT_ITE["dtau_start"]
    max_halvings: int = DEFAULT_ITE["max_halvings"]
    energy_tol: float = DEFAULT_ITE["energy_tol"]
    max_iterations: int = DEFAULT_ITE["max_iterations"]

    def __post_init__(self):
        if not (self.dtau > 0 and self.dtau_start > 0):
            raise InvalidConfigValue("imaginary time steps must be positive")
        if self.max_halvings < 0:
            raise InvalidConfigValue("max_halvings must be non-negative")
        if not self.energy_tol > 0:
            raise InvalidConfigValue("energy_tol must be positive")

    @property
    def initial_step(self) -> float:
        return max(self.dtau_start, self.dtau)


def energy_expectation(psi: WaveFunction, potential: np.ndarray) -> float:
    """<psi|T + V|psi> in internal units for a normalized psi"""
    grid = psi.grid
    spectrum = fft_forward(psi.amplitudes, grid)
    kinetic = np.sum(grid.k_squared / 2 * np.abs(spectrum) ** 2)
    potential_energy = np.sum(potential * np.abs(psi.amplitudes) ** 2)
    return float((kinetic + potential_energy) * grid.cell_area)


def seed_gaussian(grid: Grid2D, potential: np.ndarray, center: Optional[Tuple[float, float]] = None
                  ) -> WaveFunction:
    """Broad Gaussian at center, or at the lowest grid point of the potential"""
    if center is None:
        i, j = np.unravel_index(np.argmin(potential), potential.shape)
        center = (float(grid.x[i]), float(grid.y[j]))
    sigma = (SEED_WIDTH_FRACTION * grid.l_x_extent, SEED_WIDTH_FRACTION * grid.l_y_extent)
    return WaveFunction.gaussian(grid, center, sigma)


def dtau_schedule(config: ItetConfig) -> List[float]:
    """Step sizes run to convergence in turn: dtau_start, halved max_halvings times, then dtau"""
    steps = [config.initial_step]
    for _ in range(config.max_halvings):
        smaller = max(steps[-1] / 2, config.dtau)
        if smaller == steps[-1]:
            break
        steps.append(smaller)
    if steps[-1] > config.dtau:
        steps.append(config.dtau)
    return steps


def imaginary_time_evolve(potential: np.ndarray, grid: Grid2D, config: Optional[ItetConfig] = None,
                          seed: Optional[WaveFunction] = None,
                          center: Optional[Tuple[float, float]] = None) -> Tuple[WaveFunction, float]:
    """Relax a seed state to the ground state of potential (internal units).

    Returns the normalized ground state and its energy. Each step size of the
    schedule runs until |dE| / (scale * dtau) < energy_tol with
    scale = max(|E|, E_R). After the dtau stage the step keeps halving while
    the converged energy still moves by more than the refinement tolerance.
    """
    config = config or ItetConfig()
    if seed is None:
        seed = seed_gaussian(grid, potential, center)
    if seed.norm() == 0 or not np.isfinite(seed.norm()):
        raise DegenerateSeed("seed state has zero norm")
    kernel = SplitOperatorKernel(potential, grid, imaginary=True)
    psi = seed.normalized()
    seed_amplitudes = psi.amplitudes.copy()
    energy = energy_expectation(psi, potential)

    schedule = dtau_schedule(config)
    stage_tol = er_to_internal(ITE_REFINEMENT["stage_energy_tol_E_R"])
    stage, extra_halvings = 0, 0
    dtau = schedule[0]
    stage_energy = None
    for iteration in range(1, config.max_iterations + 1):
        amplitudes = kernel.step(psi.amplitudes, dtau)
        norm = math.sqrt(float(np.sum(np.abs(amplitudes) ** 2)) * grid.cell_area)
        if norm == 0 or not np.isfinite(norm):
            raise DegenerateSeed("imaginary-time iterate collapsed")
        psi = WaveFunction(amplitudes / norm, grid)
        if iteration == 10:
            overlap = abs(np.vdot(seed_amplitudes, psi.amplitudes)) * grid.cell_area
            if overlap < DEGENERATE_SEED_OVERLAP:
                raise DegenerateSeed(f"seed overlap with relaxed state is {overlap:.3e}")

        new_energy = energy_expectation(psi, potential)
        change = abs(new_energy - energy) / (max(abs(new_energy), E_R_INTERNAL) * dtau)
        if new_energy > energy + 1e-12 * max(abs(energy), 1.0):
            logger.debug(f"Energy rose from {energy:.12g} to {new_energy:.12g} at dtau={dtau:g}")
        energy = new_energy
        if change >= config.energy_tol:
            continue

        drop = None if stage_energy is None else abs(stage_energy - energy)
        stage_energy = energy
        if stage + 1 < len(schedule):
            stage += 1
            dtau = schedule[stage]
        elif drop is not None and drop > stage_tol and extra_halvings < ITE_REFINEMENT["max_extra_halvings"]:
            extra_halvings += 1
            dtau /= 2
        else:
            logger.info(f"Ground state converged after {iteration} iterations at dtau={dtau:g}, "
                        f"E0={energy:.12g}")
            return _fix_phase(psi), energy
        logger.debug(f"Converged at iteration {iteration}; continuing with dtau={dtau:g}")

    raise NoConvergence(f"imaginary-time evolution did not converge in {config.max_iterations} iterations")


def _fix_phase(psi: WaveFunction) -> WaveFunction:
    """Rotate the global phase so the largest amplitude is real and positive"""
    peak = psi.amplitudes.flat[np.argmax(np.abs(psi.amplitudes))]
    return WaveFunction(psi.amplitudes * (abs(peak) / peak), psi.grid)
