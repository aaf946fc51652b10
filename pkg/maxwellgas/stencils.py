"""Ghost-cell padding and second-order central differences on a Grid."""

import numpy as np

from .fields import Grid


def along(axis: int, ndim: int, sl: slice) -> tuple:
    """Index tuple applying sl on one axis of an ndim array."""
    index = [slice(None)] * ndim
    index[axis] = sl
    return tuple(index)


def pad(field: np.ndarray, grid: Grid, axis: int, odd: bool = False) -> np.ndarray:
    """Add one ghost cell on each side of the given grid axis.

    field may carry leading component axes; the grid axes are its last
    grid.dimension axes. Periodic axes wrap. Reflective axes mirror, with
    the sign flipped when odd is set (the wall-normal velocity).
    """
    offset = field.ndim - grid.dimension
    width = [(0, 0)] * field.ndim
    width[offset + axis] = (1, 1)
    if grid.boundary[axis] == "periodic":
        return np.pad(field, width, mode="wrap")
    padded = np.pad(field, width, mode="symmetric")
    if odd:
        ax = offset + axis
        padded[along(ax, padded.ndim, slice(0, 1))] *= -1.0
        padded[along(ax, padded.ndim, slice(-1, None))] *= -1.0
    return padded


def central_difference(field: np.ndarray, grid: Grid, axis: int, odd: bool = False) -> np.ndarray:
    """(f[i+1] - f[i-1]) / (2 h) along one grid axis."""
    padded = pad(field, grid, axis, odd)
    ax = field.ndim - grid.dimension + axis
    upper = padded[along(ax, padded.ndim, slice(2, None))]
    lower = padded[along(ax, padded.ndim, slice(None, -2))]
    return (upper - lower) / (2.0 * grid.spacing[axis])


def gradient(field: np.ndarray, grid: Grid, odd_axis: int | None = None) -> np.ndarray:
    """Gradient with three components; inactive axes contribute zero.

    odd_axis names the axis across which the field changes sign at a
    reflective wall, which is the component index for a velocity.
    """
    result = np.zeros((3,) + field.shape)
    for axis in range(grid.dimension):
        result[axis] = central_difference(field, grid, axis, odd=(odd_axis == axis))
    return result


def velocity_gradient(u: np.ndarray, grid: Grid) -> np.ndarray:
    """G[i, j] = d u_i / d x_j at cell centres."""
    return np.stack([gradient(u[i], grid, odd_axis=i) for i in range(3)])


def divergence(vector: np.ndarray, grid: Grid) -> np.ndarray:
    """Central divergence of a 3-component field."""
    total = np.zeros(vector.shape[1:])
    for axis in range(grid.dimension):
        total += central_difference(vector[axis], grid, axis, odd=True)
    return total
