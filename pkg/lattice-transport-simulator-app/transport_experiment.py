# transport_experiment.py - End-to-end transport runs, sweeps and figure reproduction
import logging
import math
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np
import pandas as pd
from tqdm import tqdm

from config import (
    CSV_COLUMNS, DEFAULT_GRID, DEFAULT_SWEEP, FIGURE_PANELS, LATTICE_PERIOD, PANEL_DEPTH_SCALE,
    ROBUSTNESS_PERTURBATIONS,
)
from data_processing import DataExporter
from errors import GridMismatch, InvalidConfigValue, LatticeTransportError, NoBracket
from ground_state import ItetConfig, energy_expectation, imaginary_time_evolve
from lattice_potential import (
    LatticeParams, evaluate_potential_batch, find_minimum, harmonic_approximation,
    harmonic_potential_batch, max_lattice_force, preset, scale_depths,
)
from spectral_propagator import Grid2D, StepperConfig, WaveFunction, propagate, set_fft_workers
from sta_trajectory import TransportSpec, max_acceleration, trajectory_2d
from utils import characteristic_scales, er_to_internal, internal_to_er

logger = logging.getLogger(__name__)


@dataclass
class GridSettings:
    nx: int = DEFAULT_GRID["nx"]
    ny: int = DEFAULT_GRID["ny"]
    periods_x: int = DEFAULT_GRID["periods_x"]
    periods_y: int = DEFAULT_GRID["periods_y"]

    def build(self, period: float = LATTICE_PERIOD) -> Grid2D:
        return Grid2D.from_periods(self.nx, self.ny, self.periods_x, self.periods_y, period)


@dataclass
class TransportConfig:
    """One transport experiment. Distances are in l_x, t_f in T_x of the scaled lattice."""
    lattice: LatticeParams
    t_f_T_x: float
    distance_x_l_x: float = 100.0
    distance_y_l_x: float = 0.0
    depth_scale: float = 1.0
    grid: GridSettings = field(default_factory=GridSettings)
    stepper: StepperConfig = field(default_factory=StepperConfig)
    ite: ItetConfig = field(default_factory=ItetConfig)
    harmonic_mode: bool = False
    depth_error_pct: float = 0.0
    timing_error_pct: float = 0.0
    trajectory_amplitude_error_pct: float = 0.0


@dataclass
class TransportResult:
    t_f_over_Tx: float
    fidelity: float
    d_actual_x: float
    d_actual_y: float
    max_accel: float
    E_initial: float
    E_final: float
    n_steps: int
    step_history: List[Tuple[float, float, float]] = field(default_factory=list, repr=False)
    trace: Optional[pd.DataFrame] = field(default=None, repr=False)

    def to_row(self) -> Dict[str, float]:
        return {column: getattr(self, column) for column in CSV_COLUMNS["transport"]}


def fidelity(a: WaveFunction, b: WaveFunction) -> float:
    """|<a|b>|^2 for normalized states on the same grid"""
    if a.grid != b.grid:
        raise GridMismatch("fidelity requires both states on the same grid")
    return abs(a.inner(b)) ** 2


def snap_distance(distance: float, period: float = LATTICE_PERIOD) -> float:
    """Round a transport distance to the nearest whole number of lattice periods"""
    return round(distance / period) * period


def acceleration_ceiling(config: TransportConfig) -> float:
    """Largest lattice restoring acceleration of the design lattice, in l_x/T_x^2"""
    design = scale_depths(config.lattice, config.depth_scale)
    scales = characteristic_scales(harmonic_approximation(design))
    return max_lattice_force(design) * scales.T_x ** 2 / scales.l_x


def run_transport(config: TransportConfig) -> TransportResult:
    """Ground state -> comoving propagation -> overlap with the displaced ground state"""
    design = scale_depths(config.lattice, config.depth_scale)
    hp = harmonic_approximation(design)
    scales = characteristic_scales(hp)
    plant = scale_depths(design, 1 + config.depth_error_pct / 100) if config.depth_error_pct else design
    plant_hp = harmonic_approximation(plant)

    d_x = snap_distance(config.distance_x_l_x * scales.l_x, LATTICE_PERIOD)
    d_y = snap_distance(config.distance_y_l_x * scales.l_x, LATTICE_PERIOD)
    t_f = config.t_f_T_x * scales.T_x
    designed = trajectory_2d(TransportSpec(d_x, d_y, t_f), hp)
    executed = designed
    if config.timing_error_pct:
        executed = tuple(traj.retimed(1 + config.timing_error_pct / 100) for traj in executed)
    if config.trajectory_amplitude_error_pct:
        executed = tuple(traj.rescaled(1 + config.trajectory_amplitude_error_pct / 100) for traj in executed)

    grid = config.grid.build(LATTICE_PERIOD)
    if config.harmonic_mode:
        field_er = harmonic_potential_batch(plant_hp, grid)
        center = (-plant_hp.a_x / plant_hp.omega_x ** 2, 0.0)
    else:
        field_er = evaluate_potential_batch(plant, grid)
        center = find_minimum(plant, (0.0, 0.0))
    potential = er_to_internal(np.asarray(field_er))

    psi0, energy0 = imaginary_time_evolve(potential, grid, config.ite, center=center)
    outcome = propagate(psi0, potential, executed, config.stepper)

    # Comoving frame: the target is the initial state, displaced by any shortfall of the executed path
    target = psi0
    miss = [traj_d.d - traj_e.d for traj_d, traj_e in zip(designed, executed)]
    if any(abs(m) > 0 for m in miss):
        target = psi0.shifted(miss[0], miss[1])
    result = TransportResult(
        t_f_over_Tx=config.t_f_T_x,
        fidelity=fidelity(target, outcome.psi),
        d_actual_x=d_x / scales.l_x,
        d_actual_y=d_y / scales.l_x,
        max_accel=max_acceleration(executed) * scales.T_x ** 2 / scales.l_x,
        E_initial=internal_to_er(energy0),
        E_final=internal_to_er(energy_expectation(outcome.psi, potential)),
        n_steps=outcome.n_steps,
        step_history=outcome.step_history,
        trace=outcome.trace,
    )
    logger.info(f"t_f={config.t_f_T_x:g} T_x: fidelity={result.fidelity:.6f} ({outcome.n_steps} steps)")
    return result


def _run_point(config: TransportConfig) -> Dict[str, float]:
    """Worker entry point; failures become NaN rows instead of aborting the sweep"""
    try:
        row = run_transport(config).to_row()
        row["error"] = ""
    except LatticeTransportError as exc:
        logger.warning(f"t_f={config.t_f_T_x:g} T_x failed: {type(exc).__name__}: {exc}")
        row = {column: math.nan for column in CSV_COLUMNS["transport"]}
        row["t_f_over_Tx"] = config.t_f_T_x
        row["error"] = f"{type(exc).__name__}: {exc}"
    return row


def _map_points(configs: List[TransportConfig], jobs: Optional[int], progress: bool, label: str) -> list:
    jobs = jobs or os.cpu_count() or 1
    if jobs == 1 or len(configs) == 1:
        return [_run_point(c) for c in tqdm(configs, desc=label, disable=not progress)]
    # one FFT thread per worker process; the pool supplies the parallelism
    with ProcessPoolExecutor(max_workers=min(jobs, len(configs)), initializer=set_fft_workers,
                             initargs=(1,)) as executor:
        return list(tqdm(executor.map(_run_point, configs), total=len(configs), desc=label,
                         disable=not progress))


def _validate_tf_list(t_f_list: Sequence[float]) -> List[float]:
    values = [float(v) for v in t_f_list]
    if not values:
        raise InvalidConfigValue("t_f list is empty")
    if any(not (v > 0) for v in values):
        raise InvalidConfigValue("t_f values must be positive")
    if any(b <= a for a, b in zip(values, values[1:])):
        raise InvalidConfigValue("t_f values must be strictly ascending")
    return values


def sweep_tf(config: TransportConfig, t_f_list: Sequence[float], jobs: Optional[int] = None,
             progress: bool = False) -> pd.DataFrame:
    """Fidelity curve over transport times (in T_x), one independent run per point"""
    values = _validate_tf_list(t_f_list)
    configs = [replace(config, t_f_T_x=v) for v in values]
    rows = _map_points(configs, jobs, progress, "t_f sweep")
    df = pd.DataFrame(rows, columns=CSV_COLUMNS["transport"] + ["error"])
    return df.sort_values("t_f_over_Tx").reset_index(drop=True)


def breakdown_time(curve, threshold: float = DEFAULT_SWEEP["threshold"]) -> float:
    """Smallest t_f at which the fidelity crosses threshold from below (linear interpolation)"""
    if isinstance(curve, pd.DataFrame):
        points = list(zip(curve["t_f_over_Tx"], curve["fidelity"]))
    else:
        points = [(float(t), float(f)) for t, f in curve]
    points = sorted((t, f) for t, f in points if not math.isnan(f))
    for (t0, f0), (t1, f1) in zip(points, points[1:]):
        if f0 < threshold <= f1:
            return t0 + (threshold - f0) * (t1 - t0) / (f1 - f0)
    raise NoBracket(f"fidelity never crosses {threshold} from below on the sampled curve")


def robustness_sweep(config: TransportConfig, perturbation: str, magnitudes_pct: Sequence[float],
                     jobs: Optional[int] = None, progress: bool = False) -> pd.DataFrame:
    """Fidelity when the plant deviates from the design by each magnitude (percent)"""
    if perturbation not in ROBUSTNESS_PERTURBATIONS:
        raise InvalidConfigValue(f"unknown perturbation '{perturbation}' "
                                 f"(choose from {', '.join(ROBUSTNESS_PERTURBATIONS)})")
    magnitudes = [float(m) for m in magnitudes_pct]
    if not magnitudes:
        raise InvalidConfigValue("magnitude list is empty")
    configs = [replace(config, **{perturbation: m}) for m in magnitudes]
    rows = _map_points(configs, jobs, progress, perturbation)
    return pd.DataFrame({
        "magnitude_pct": magnitudes,
        "fidelity": [row["fidelity"] for row in rows],
        "error": [row["error"] for row in rows],
    })


def figure_config(figure_id: int, panel: str, distance_l_x: float, base: Optional[TransportConfig] = None
                  ) -> TransportConfig:
    if figure_id not in FIGURE_PANELS:
        raise InvalidConfigValue(f"unknown figure {figure_id} (choose from {sorted(FIGURE_PANELS)})")
    if panel not in PANEL_DEPTH_SCALE:
        raise InvalidConfigValue(f"unknown panel '{panel}' (choose from {', '.join(PANEL_DEPTH_SCALE)})")
    lattice = preset(FIGURE_PANELS[figure_id]["preset"])
    if base is None:
        base = TransportConfig(lattice=lattice, t_f_T_x=1.0)
    return replace(base, lattice=lattice, depth_scale=PANEL_DEPTH_SCALE[panel],
                   distance_x_l_x=float(distance_l_x), distance_y_l_x=0.0)
def reproduce_figure(figure_id: int, panel: str, distance_l_x: float, out_dir: str,
                     t_f_list: Optional[Sequence[float]] = None, jobs: Optional[int] = None,
                     base: Optional[TransportConfig] = None, progress: bool = False,
                     resolved_config: Optional[dict] = None) -> str:
    """Run the sweep behind one figure panel and write its CSV (plus sidecar)"""
    config = figure_config(figure_id, panel, distance_l_x, base)
    curve = sweep_tf(config, t_f_list or DEFAULT_SWEEP["t_f_list_T_x"], jobs=jobs, progress=progress)
    path = os.path.join(out_dir, f"fig{figure_id}{panel}_d{int(round(distance_l_x))}.csv")
    DataExporter.write_csv(curve, path)
    DataExporter.write_sidecar(path, resolved_config or {}, {
        "figure": {
            "id": figure_id,
            "panel": panel,
            "preset": FIGURE_PANELS[figure_id]["preset"],
            "depth_scale": config.depth_scale,
            "distance_x_l_x": distance_l_x,
        },
    })
    return path
