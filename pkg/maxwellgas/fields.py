"""Grid and grid-sampled macroscopic fields.

Velocity always carries three components; on a grid of dimension d < 3
the fields are uniform along the inactive axes, so gradients there vanish.
"""

from dataclasses import dataclass, replace

import numpy as np

from .errors import DomainError, PositivityError
from .thermostatics import KineticConstants

BOUNDARY_CONDITIONS = ("periodic", "reflective")

# Narrowest grid the central stencils support
MIN_CELLS = 4


@dataclass(frozen=True)
class Grid:
    """Cell-centred Cartesian grid.

    Attributes:
        cells: number of cells per active axis
        spacing: cell width per active axis
        boundary: 'periodic' or 'reflective' per active axis
        origin: coordinate of the lower domain corner per active axis
    """
    cells: tuple[int, ...]
    spacing: tuple[float, ...]
    boundary: tuple[str, ...]
    origin: tuple[float, ...] | None = None

    def __post_init__(self):
        object.__setattr__(self, "cells", tuple(int(n) for n in self.cells))
        object.__setattr__(self, "spacing", tuple(float(h) for h in self.spacing))
        object.__setattr__(self, "boundary", tuple(self.boundary))
        if self.origin is None:
            object.__setattr__(self, "origin", (0.0,) * len(self.cells))
        object.__setattr__(self, "origin", tuple(float(o) for o in self.origin))

        d = len(self.cells)
        if d not in (1, 2, 3):
            raise DomainError(f"Unknown dimension: {d}. Must be one of: (1, 2, 3)")
        if not len(self.spacing) == len(self.boundary) == len(self.origin) == d:
            raise DomainError("cells, spacing, boundary and origin must have one entry per axis")
        for n in self.cells:
            if n < MIN_CELLS:
                raise DomainError(f"Each axis needs at least {MIN_CELLS} cells, got {n}")
        for h in self.spacing:
            if not h > 0:
                raise DomainError(f"Cell spacing must be positive, got {h}")
        for bc in self.boundary:
            if bc not in BOUNDARY_CONDITIONS:
                raise DomainError(f"Unknown boundary: {bc}. Must be one of: {BOUNDARY_CONDITIONS}")

    @classmethod
    def uniform(cls, cells, length, boundary="periodic") -> "Grid":
        """Grid from per-axis cell counts and domain lengths (scalars broadcast)."""
        cells = tuple(np.atleast_1d(cells).astype(int))
        d = len(cells)
        length = np.broadcast_to(np.asarray(length, dtype=float), (d,))
        if isinstance(boundary, str):
            boundary = (boundary,) * d
        return cls(cells=cells, spacing=tuple(length / np.asarray(cells)), boundary=tuple(boundary))

    @property
    def dimension(self) -> int:
        return len(self.cells)

    @property
    def shape(self) -> tuple[int, ...]:
        return self.cells

    @property
    def lengths(self) -> tuple[float, ...]:
        return tuple(n * h for n, h in zip(self.cells, self.spacing))

    @property
    def cell_volume(self) -> float:
        return float(np.prod(self.spacing))

    @property
    def all_periodic(self) -> bool:
        return all(bc == "periodic" for bc in self.boundary)

    def coordinates(self, axis: int) -> np.ndarray:
        """Cell-centre coordinates along one axis."""
        n, h, x0 = self.cells[axis], self.spacing[axis], self.origin[axis]
        return x0 + (np.arange(n) + 0.5) * h

    def face_coordinates(self, axis: int) -> np.ndarray:
        """Coordinates of the n + 1 faces along one axis."""
        n, h, x0 = self.cells[axis], self.spacing[axis], self.origin[axis]
        return x0 + np.arange(n + 1) * h

    def mesh(self) -> tuple[np.ndarray, ...]:
        return np.meshgrid(*(self.coordinates(a) for a in range(self.dimension)), indexing="ij")


@dataclass(frozen=True)
class FieldState:
    """Density, velocity and temperature sampled on a grid at time t.

    u has shape (3,) + grid.shape.
    """
    grid: Grid
    rho: np.ndarray
    u: np.ndarray
    theta: np.ndarray
    t: float = 0.0

    def __post_init__(self):
        shape = self.grid.shape
        rho = np.array(np.broadcast_to(np.asarray(self.rho, dtype=float), shape))
        theta = np.array(np.broadcast_to(np.asarray(self.theta, dtype=float), shape))
        u = np.asarray(self.u, dtype=float)
        if u.shape == (3,):
            u = u.reshape((3,) + (1,) * len(shape))
        u = np.array(np.broadcast_to(u, (3,) + shape))
        object.__setattr__(self, "rho", rho)
        object.__setattr__(self, "theta", theta)
        object.__setattr__(self, "u", u)
        object.__setattr__(self, "t", float(self.t))

    @classmethod
    def uniform(cls, grid: Grid, rho: float, u, theta: float, t: float = 0.0) -> "FieldState":
        return cls(grid=grid, rho=rho, u=np.asarray(u, dtype=float), theta=theta, t=t)

    def with_time(self, t: float) -> "FieldState":
        return replace(self, t=t)

    def check_positive(self):
        """Raise PositivityError naming the first cell with rho <= 0 or theta <= 0."""
        for name, values in (("rho", self.rho), ("theta", self.theta)):
            bad = ~(values > 0)
            if np.any(bad):
                index = np.unravel_index(np.argmax(bad), values.shape)
                raise PositivityError(name, index, values[index], self.t)

    def conserved(self, constants: KineticConstants):
        """Mass, momentum and total energy densities."""
        momentum = self.rho * self.u
        kinetic = 0.5 * np.sum(self.u ** 2, axis=0)
        internal = 1.5 * constants.k_B * self.theta / constants.m
        return self.rho, momentum, self.rho * (internal + kinetic)

    @classmethod
    def from_conserved(cls, grid: Grid, mass, momentum, energy, constants: KineticConstants,
                       t: float = 0.0) -> "FieldState":
        """Invert conserved(); aborts on non-positive density or temperature."""
        bad = ~(mass > 0)
        if np.any(bad):
            index = np.unravel_index(np.argmax(bad), mass.shape)
            raise PositivityError("rho", index, mass[index], t)
        u = momentum / mass
        internal = energy / mass - 0.5 * np.sum(u ** 2, axis=0)
        theta = internal * 2.0 * constants.m / (3.0 * constants.k_B)
        state = cls(grid=grid, rho=mass, u=u, theta=theta, t=t)
        state.check_positive()
        return state


def conserved_totals(state: FieldState, constants: KineticConstants) -> dict:
    """Domain totals of mass, momentum and energy."""
    mass, momentum, energy = state.conserved(constants)
    volume = state.grid.cell_volume
    return {
        "mass": float(np.sum(mass) * volume),
        "momentum": [float(np.sum(momentum[i]) * volume) for i in range(3)],
        "energy": float(np.sum(energy) * volume),
    }
