# config.py - Centralized configuration management

import math

# Internal unit system: hbar = m = k_L = 1, so the recoil energy is 1/2
HBAR = 1.0
MASS = 1.0
K_L = 1.0
E_R_INTERNAL = HBAR ** 2 * K_L ** 2 / (2 * MASS)
LATTICE_PERIOD = 2 * math.pi / K_L

# Lattice presets (depths in E_R as (U_X, U_Xbar, U_Y))
LATTICE_PRESETS = {
    "honeycomb": {
        "display_name": "Honeycomb",
        "depths_E_R": (200.0, 600.0, 200.0),
        "description": "Two degenerate minima per rectangular cell",
        "experimental": False,
    },
    "square": {
        "display_name": "Square",
        "depths_E_R": (0.0, 200.0, 200.0),
        "description": "Separable square lattice, no interference term",
        "experimental": False,
    },
    "chains1d": {
        "display_name": "1D Chains",
        "depths_E_R": (50.0, 1000.0, 200.0),
        "description": "Strongly coupled chains along y",
        "experimental": False,
    },
    "dimerized": {
        "display_name": "Dimerized",
        "depths_E_R": (200.0, 400.0, 200.0),
        "description": "Pairs of strongly coupled sites",
        "experimental": False,
    },
    "checkerboard": {
        "display_name": "Checkerboard",
        "depths_E_R": (200.0, 0.0, 200.0),
        "description": "No Xbar beam; minimum leaves the origin",
        "experimental": True,
    },
}

# Phases and visibility used whenever a preset is requested without overrides
DEFAULT_LATTICE_PHASES = {
    "theta_rad": 0.0,
    "phi_rad": 0.0,
    "alpha": 0.9,
}

# Fidelity figures: figure id -> preset, panels -> depth scale factor
FIGURE_PANELS = {
    5: {"preset": "honeycomb", "title": "Honeycomb lattice"},
    6: {"preset": "square", "title": "Square lattice"},
    7: {"preset": "chains1d", "title": "1D-chain lattice"},
    8: {"preset": "dimerized", "title": "Dimerized lattice"},
}
PANEL_DEPTH_SCALE = {"a": 1.0, "b": 2.0, "c": 4.0}
FIGURE_DISTANCES_L_X = (100, 400)

# Computational window: 2x2 lattice periods at 128x128 points
DEFAULT_GRID = {
    "nx": 128,
    "ny": 128,
    "periods_x": 2,
    "periods_y": 2,
}

DEFAULT_STEPPER = {
    "rel_tol": 1e-4,
    "n_t_initial": 50,
    "max_substeps": 4096,
}
N_T_BOUNDS = (20, 100)
STEP_UNDERFLOW_FRACTION = 1e-9
# substeps ending this close to a macro-step boundary (fraction of the macro step) land on it
MACRO_SNAP_FRACTION = 1e-9

DEFAULT_ITE = {
    "dtau": 1e-3,
    "dtau_start": 1e-2,
    "max_halvings": 2,
    "energy_tol": 1e-10,
    "max_iterations": 200000,
}
# below dtau, keep halving while one refinement still moves E0 by more than this
ITE_REFINEMENT = {
    "stage_energy_tol_E_R": 1e-7,
    "max_extra_halvings": 3,
}
DEGENERATE_SEED_OVERLAP = 1e-14
SEED_WIDTH_FRACTION = 0.05

FIND_MINIMUM = {
    "max_iterations": 200,
    "gradient_tol": 1e-10,
}

# Desk-scale sweep defaults (t_f in units of T_x)
DEFAULT_SWEEP = {
    "t_f_list_T_x": [2.0, 3.0, 4.0, 5.0, 6.0, 7.0, 8.0, 10.0, 12.0, 15.0, 20.0, 30.0],
    "threshold": 0.9,
}

ROBUSTNESS_PERTURBATIONS = (
    "depth_error_pct",
    "timing_error_pct",
    "trajectory_amplitude_error_pct",
)

# CSV schemas
CSV_COLUMNS = {
    "transport": [
        "t_f_over_Tx", "fidelity", "d_actual_x", "d_actual_y", "max_accel",
        "E_initial", "E_final", "n_steps",
    ],
    "trajectory": ["t", "q0", "q0dot", "q0ddot"],
    "aom": ["t_in_Tx", "delta_f_times_Tx"],
    "potential": ["x", "y", "U"],
    "density": ["x", "y", "density"],
    "step_trace": ["t", "norm", "x_mean", "y_mean", "dt_accepted"],
    "robustness": ["magnitude_pct", "fidelity"],
}
CSV_FLOAT_FORMAT = "%.17g"

# PDF Report Templates
PDF_TEMPLATES = {
    "sweep": {
        "title": "Lattice Transport Fidelity Report",
        "subtitle": "Transport-time sweep with STA trajectories",
        "sections": ["executive_summary", "curve_table", "insights"],
    },
    "figure": {
        "title": "Lattice Transport Figure Panel",
        "subtitle": "Fidelity versus transport time",
        "sections": ["executive_summary", "curve_table", "insights"],
    },
    "robustness": {
        "title": "Lattice Transport Robustness Report",
        "subtitle": "Fidelity under mismatched control",
        "sections": ["executive_summary", "curve_table"],
    },
}
