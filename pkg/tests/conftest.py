"""Shared fixtures for maxwellgas tests."""

import json

import numpy as np
import pytest

from maxwellgas.fields import FieldState, Grid
from maxwellgas.thermostatics import KineticConstants
from maxwellgas.transport import lambda_moments


@pytest.fixture(scope="session")
def nondim():
    """Unit system with m = k_B = sigma = a = epsilon = 1."""
    return KineticConstants.nondimensional_units()


@pytest.fixture(scope="session")
def transport_table(nondim):
    """Transport table at the default quadrature settings (computed once)."""
    return lambda_moments(nondim)


@pytest.fixture
def periodic_grid():
    """64-cell periodic grid on the unit interval."""
    return Grid.uniform(64, 1.0, "periodic")


@pytest.fixture
def smooth_state(periodic_grid):
    """Smooth 1-D state with every field varying."""
    x = periodic_grid.coordinates(0)
    u = np.zeros((3, x.size))
    u[0] = 0.1 * np.sin(2 * np.pi * x)
    u[1] = 0.05 * np.cos(2 * np.pi * x)
    return FieldState(
        grid=periodic_grid,
        rho=1.0 + 0.1 * np.sin(2 * np.pi * x),
        u=u,
        theta=1.0 + 0.05 * np.cos(4 * np.pi * x),
    )


@pytest.fixture
def write_config(tmp_path):
    """Write a scenario dict to a JSON file and return its path."""
    def _write(document: dict, name: str = "scenario.json"):
        path = tmp_path / name
        path.write_text(json.dumps(document))
        return path
    return _write


@pytest.fixture
def fluid_document():
    """Minimal valid nondimensional fluid scenario."""
    return {
        "mode": "fluid",
        "constants": {"nondimensional": True},
        "grid": {"cells": [32], "length": [1.0]},
        "initial": {"profile": "sinusoid", "rho": 1.0, "theta": 1.0,
                    "amplitude": 0.05, "wavelength": 1.0},
        "run": {"t_end": 0.002, "output_every": 5},
    }


@pytest.fixture
def lattice_document():
    """Small lattice relaxation scenario."""
    return {
        "mode": "lattice",
        "constants": {"m": 1.0, "k_B": 1.0, "sigma": 1.0, "a": 1.0, "epsilon": 0.6},
        "lattice": {"sites": 16, "occupation": 0.3, "theta": 1.0, "steps": 6,
                    "amplitude": 0.05, "width": 2.0, "bins": 12, "dt": 0.1, "output_every": 2},
    }
