# conftest.py - Shared fixtures for the test suite
import os
import sys

import numpy as np
import pytest

sys.path.insert(0, os.path.dirname(os.path.abspath(__file__)))

from lattice_potential import HarmonicParams, harmonic_potential_batch, preset  # noqa: E402
from spectral_propagator import Grid2D  # noqa: E402
from utils import er_to_internal  # noqa: E402


@pytest.fixture
def honeycomb():
    return preset("honeycomb")


@pytest.fixture
def small_grid():
    """One lattice period per axis at 32x32"""
    return Grid2D.from_periods(32, 32, 1, 1)


@pytest.fixture
def harmonic_field():
    """Isotropic-ish harmonic trap (omega_x=4, omega_y=3) in internal units on a 48x48 grid"""
    def build(omega_x=4.0, omega_y=3.0, a_x=0.0, n=48):
        grid = Grid2D.from_periods(n, n, 1, 1)
        hp = HarmonicParams(v_d0=0.0, omega_x=omega_x, omega_y=omega_y, a_x=a_x)
        return grid, er_to_internal(harmonic_potential_batch(hp, grid))
    return build


@pytest.fixture
def rng():
    return np.random.default_rng(1234)
