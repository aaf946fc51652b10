"""Named initial-condition profiles for fluid scenarios."""

import numpy as np

from .config import InitialConfig
from .errors import ConfigError
from .fields import FieldState, Grid

VELOCITY_COMPONENTS = {"ux": 0, "uy": 1, "uz": 2}


def _velocity(values) -> np.ndarray:
    u = np.zeros(3)
    values = list(values or [])
    if len(values) > 3:
        raise ConfigError(f"u has at most 3 components, got {len(values)}")
    u[:len(values)] = values
    return u


def _periodic_offset(x: np.ndarray, center: float, length: float, periodic: bool) -> np.ndarray:
    d = x - center
    return (d + 0.5 * length) % length - 0.5 * length if periodic else d


def uniform_profile(grid: Grid, p: dict) -> FieldState:
    return FieldState.uniform(grid, p["rho"], _velocity(p["u"]), p["theta"])


def gaussian_bump_profile(grid: Grid, p: dict) -> FieldState:
    """Bump of relative height amplitude in rho or theta about the domain centre.

    With isobaric set, a theta bump lowers rho so that rho theta stays fixed.
    """
    center = p["center"] if p["center"] is not None else [0.5 * L for L in grid.lengths]
    if len(center) != grid.dimension:
        raise ConfigError(f"initial.center: expected {grid.dimension} coordinates, got {len(center)}")
    mesh = grid.mesh()
    r2 = sum(
        _periodic_offset(mesh[a], grid.origin[a] + center[a], grid.lengths[a],
                         grid.boundary[a] == "periodic") ** 2
        for a in range(grid.dimension)
    )
    bump = 1.0 + p["amplitude"] * np.exp(-0.5 * r2 / p["width"] ** 2)
    rho = np.full(grid.shape, p["rho"])
    theta = np.full(grid.shape, p["theta"])
    if p["field"] == "theta":
        theta = theta * bump
        if p["isobaric"]:
            rho = rho / bump
    else:
        rho = rho * bump
    return FieldState(grid=grid, rho=rho, u=np.zeros(3), theta=theta)


def shear_layer_profile(grid: Grid, p: dict) -> FieldState:
    """Double tanh shear layer u_y(x), periodic along x.

    A non-zero perturbation adds u_x = perturbation sin(2 pi y / L_y) on 2-D
    and 3-D grids.
    """
    mesh = grid.mesh()
    L = grid.lengths[0]
    x = mesh[0] - grid.origin[0]
    delta = p["thickness"]
    u = np.zeros((3,) + grid.shape)
    u[1] = p["velocity"] * (np.tanh((x - 0.25 * L) / delta) - np.tanh((x - 0.75 * L) / delta) - 1.0)
    if p["perturbation"] and grid.dimension > 1:
        y = mesh[1] - grid.origin[1]
        u[0] = p["perturbation"] * np.sin(2.0 * np.pi * y / grid.lengths[1])
    return FieldState(grid=grid, rho=p["rho"], u=u, theta=p["theta"])


def sod_like_profile(grid: Grid, p: dict) -> FieldState:
    """Smoothed two-state Riemann problem along the first axis.

    The interface sits at the fraction interface of the domain and is
    smoothed over a tanh width (two cells unless given).
    """
    if grid.boundary[0] != "reflective":
        raise ConfigError("initial.profile: sod-like needs a reflective first axis")
    if not 0 < p["interface"] < 1:
        raise ConfigError(f"initial.interface: must lie in (0, 1), got {p['interface']}")
    x = grid.mesh()[0] - grid.origin[0]
    width = p["smoothing"] if p["smoothing"] is not None else 2.0 * grid.spacing[0]
    left = 0.5 * (1.0 - np.tanh((x - p["interface"] * grid.lengths[0]) / width))
    rho = p["rho_right"] + (p["rho_left"] - p["rho_right"]) * left
    theta = p["theta_right"] + (p["theta_left"] - p["theta_right"]) * left
    return FieldState(grid=grid, rho=rho, u=np.zeros(3), theta=theta)


def sinusoid_profile(grid: Grid, p: dict) -> FieldState:
    """One Fourier mode along an axis.

    rho and theta are modulated relatively, velocity components absolutely.
    """
    axis = p["axis"]
    if axis >= grid.dimension:
        raise ConfigError(f"initial.axis: grid has {grid.dimension} axes, got axis {axis}")
    x = grid.mesh()[axis] - grid.origin[axis]
    wave = np.sin(2.0 * np.pi * x / p["wavelength"])
    rho = np.full(grid.shape, p["rho"])
    theta = np.full(grid.shape, p["theta"])
    u = np.broadcast_to(_velocity(p["u"]).reshape((3,) + (1,) * grid.dimension), (3,) + grid.shape).copy()
    if p["field"] == "rho":
        rho = rho * (1.0 + p["amplitude"] * wave)
    elif p["field"] == "theta":
        theta = theta * (1.0 + p["amplitude"] * wave)
    else:
        u[VELOCITY_COMPONENTS[p["field"]]] += p["amplitude"] * wave
    return FieldState(grid=grid, rho=rho, u=u, theta=theta)


PROFILES = {
    "uniform": uniform_profile,
    "gaussian-bump": gaussian_bump_profile,
    "shear-layer": shear_layer_profile,
    "sod-like": sod_like_profile,
    "sinusoid": sinusoid_profile,
}


def build_initial_state(initial: InitialConfig, grid: Grid) -> FieldState:
    """Evaluate a named profile on a grid.

    Raises:
        ConfigError: if the profile is unknown or its parameters do not fit the grid
    """
    if initial.profile not in PROFILES:
        raise ConfigError(f"Unknown profile: {initial.profile}. Must be one of: {', '.join(PROFILES)}")
    state = PROFILES[initial.profile](grid, initial.params)
    state.check_positive()
    return state
