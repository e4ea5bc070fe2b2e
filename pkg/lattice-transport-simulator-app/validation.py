# validation.py - Range checks on a resolved run configuration

import math

from config import LATTICE_PRESETS, ROBUSTNESS_PERTURBATIONS


def _is_number(value) -> bool:
    return isinstance(value, (int, float)) and not isinstance(value, bool) and math.isfinite(value)


def validate_lattice_settings(doc: dict) -> list:
    """Check the lattice block (preset, depths, phases, visibility)"""
    errors = []
    name = doc.get("lattice")
    if name is not None and name not in LATTICE_PRESETS:
        errors.append(f"lattice: unknown preset '{name}'")
    depths = doc.get("depths_E_R")
    if not (isinstance(depths, (list, tuple)) and len(depths) == 3 and all(_is_number(d) for d in depths)):
        errors.append("depths_E_R: expected three finite numbers (U_X, U_Xbar, U_Y)")
    elif any(d < 0 for d in depths):
        errors.append(f"depths_E_R: depths must be non-negative, got {list(depths)}")
    for key in ("theta_rad", "phi_rad"):
        if not _is_number(doc.get(key)):
            errors.append(f"{key}: expected a finite number")
    alpha = doc.get("alpha")
    if not _is_number(alpha) or not 0 <= alpha <= 1:
        errors.append(f"alpha: expected a number in [0, 1], got {alpha!r}")
    scale = doc.get("depth_scale")
    if not _is_number(scale) or scale <= 0:
        errors.append(f"depth_scale: expected a positive number, got {scale!r}")
    return errors


def validate_grid_settings(grid: dict) -> list:
    errors = []
    for key in ("nx", "ny", "periods_x", "periods_y"):
        value = grid.get(key)
        if not (isinstance(value, int) and not isinstance(value, bool) and value > 0):
            errors.append(f"grid.{key}: expected a positive integer, got {value!r}")
    for key in ("nx", "ny"):
        value = grid.get(key)
        if isinstance(value, int) and value < 2:
            errors.append(f"grid.{key}: need at least 2 points")
    return errors


def validate_numerics(doc: dict) -> list:
    errors = []
    stepper = doc.get("stepper", {})
    if not _is_number(stepper.get("rel_tol")) or stepper.get("rel_tol") <= 0:
        errors.append("stepper.rel_tol: expected a positive number")
    for key in ("n_t_initial", "max_substeps"):
        value = stepper.get(key)
        if not (isinstance(value, int) and value > 0):
            errors.append(f"stepper.{key}: expected a positive integer")
    ite = doc.get("ite", {})
    for key in ("dtau", "dtau_start", "energy_tol"):
        value = ite.get(key)
        if not _is_number(value) or value <= 0:
            errors.append(f"ite.{key}: expected a positive number")
    for key in ("max_halvings", "max_iterations"):
        value = ite.get(key)
        if not (isinstance(value, int) and value >= 0):
            errors.append(f"ite.{key}: expected a non-negative integer")
    return errors


def validate_transport_settings(doc: dict) -> list:
    errors = []
    for key in ("distance_x_l_x", "distance_y_l_x"):
        if not _is_number(doc.get(key)):
            errors.append(f"{key}: expected a finite number")
    t_f = doc.get("t_f_T_x")
    if not _is_number(t_f) or t_f <= 0:
        errors.append(f"t_f_T_x: expected a positive number, got {t_f!r}")
    t_f_list = doc.get("t_f_list_T_x")
    if not (isinstance(t_f_list, list) and t_f_list and all(_is_number(v) and v > 0 for v in t_f_list)):
        errors.append("t_f_list_T_x: expected a non-empty list of positive numbers")
    elif any(b <= a for a, b in zip(t_f_list, t_f_list[1:])):
        errors.append("t_f_list_T_x: values must be strictly ascending")
    threshold = doc.get("threshold")
    if not _is_number(threshold) or not 0 < threshold < 1:
        errors.append(f"threshold: expected a number in (0, 1), got {threshold!r}")
    if doc.get("perturbation") not in ROBUSTNESS_PERTURBATIONS:
        errors.append(f"perturbation: choose from {', '.join(ROBUSTNESS_PERTURBATIONS)}")
    magnitudes = doc.get("magnitudes_pct")
    if not (isinstance(magnitudes, list) and magnitudes and all(_is_number(m) and m > -100 for m in magnitudes)):
        errors.append("magnitudes_pct: expected a non-empty list of numbers above -100")
    if not isinstance(doc.get("harmonic_mode"), bool):
        errors.append("harmonic_mode: expected true or false")
    jobs = doc.get("jobs")
    if jobs is not None and not (isinstance(jobs, int) and jobs > 0):
        errors.append(f"jobs: expected a positive integer or null, got {jobs!r}")
    return errors


def run_comprehensive_validation(doc: dict) -> list:
    """All range errors of a resolved configuration document"""
    errors = []
    errors.extend(validate_lattice_settings(doc))
    errors.extend(validate_grid_settings(doc.get("grid", {})))
    errors.extend(validate_numerics(doc))
    errors.extend(validate_transport_settings(doc))
    return errors
