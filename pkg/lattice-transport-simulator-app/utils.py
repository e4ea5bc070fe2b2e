# utils.py - Unit conversion and formatting helpers

import math
from dataclasses import dataclass

from config import E_R_INTERNAL, HBAR, MASS, K_L


@dataclass(frozen=True)
class CharacteristicScales:
    """Oscillation periods, zero-point lengths and recoil energy (internal units)"""
    T_x: float
    T_y: float
    l_x: float
    l_y: float
    E_R: float = E_R_INTERNAL


def characteristic_scales(hp) -> CharacteristicScales:
    """Scales of the harmonic approximation: T = 2*pi/omega, l = sqrt(hbar/(2 m omega))"""
    return CharacteristicScales(
        T_x=2 * math.pi / hp.omega_x,
        T_y=2 * math.pi / hp.omega_y,
        l_x=math.sqrt(HBAR / (2 * MASS * hp.omega_x)),
        l_y=math.sqrt(HBAR / (2 * MASS * hp.omega_y)),
    )


def er_to_internal(energy_er):
    """E_R -> internal energy units (works on scalars and arrays)"""
    return energy_er * E_R_INTERNAL


def internal_to_er(energy):
    return energy / E_R_INTERNAL


def lattice_period(k_l: float = K_L) -> float:
    return 2 * math.pi / k_l


def is_integer_multiple(value: float, unit: float, rel_tol: float = 1e-9) -> bool:
    """True when value is a positive whole number of units (up to rel_tol)"""
    if unit <= 0 or value <= 0:
        return False
    ratio = value / unit
    return abs(ratio - round(ratio)) <= rel_tol * max(1.0, ratio)


def format_energy_value(energy_er: float) -> str:
    """Format energies in E_R for listings"""
    if abs(energy_er) >= 1000:
        return f"{energy_er:,.0f} E_R"
    return f"{energy_er:.2f} E_R"


def format_float(value: float) -> str:
    """17 significant digits, locale independent"""
    return f"{value:.17g}"


def format_depths(depths) -> str:
    return "(" + ", ".join(f"{d:g}" for d in depths) + ") E_R"
