"""Collision and free-flight layer.

A particle of momentum k travels the straight world line (x + k s / m,
t0 + s) until it thermalises. The collision rate C along that line
determines the survival probability W, the free-time density w = W C and,
through the fundamental relation, the phase density N p at (x, k, t0) as
an average of the thermalised density over where the particle last
thermalised.
"""

import math
from abc import ABC, abstractmethod
from dataclasses import dataclass
from typing import Callable, NamedTuple

import numpy as np
from scipy import integrate
from scipy.interpolate import RegularGridInterpolator

from .errors import DomainError, NormalizationError, QuadratureError, WindowTooShortError
from .fields import FieldState
from .log_config import get_logger
from .stencils import gradient, velocity_gradient
from .thermostatics import KineticConstants
from .transport import TransportTable, relative_speed_factor

logger = get_logger(__name__)

# Lookback in units of the longest mean free time on the world line.
DEFAULT_WINDOW_FACTOR = 16.0

GAUSS_ORDER = 16
GRADED_LEVELS = 48


class LocalFields(NamedTuple):
    """rho (n,), u (n, 3), theta (n,) at a batch of space-time points."""
    rho: np.ndarray
    u: np.ndarray
    theta: np.ndarray


class FieldTrajectory(ABC):
    """Space-time fields along which characteristics are traced."""

    @property
    def earliest_time(self) -> float:
        """First time at which fields are available."""
        return -math.inf

    @abstractmethod
    def fields_at(self, positions: np.ndarray, times: np.ndarray) -> LocalFields:
        """Fields at positions (n, 3) and times (n,)."""

    def boosted(self, v) -> "FieldTrajectory":
        """The same flow seen from a frame moving with velocity -v."""
        return BoostedTrajectory(self, v)


class AnalyticTrajectory(FieldTrajectory):
    """Fields given by vectorised callables f(positions, times)."""

    def __init__(self, rho: Callable, u: Callable, theta: Callable):
        self._rho = rho
        self._u = u
        self._theta = theta

    @classmethod
    def uniform(cls, rho: float, u, theta: float) -> "AnalyticTrajectory":
        u = np.asarray(u, dtype=float).reshape(3)
        return cls(
            rho=lambda x, t: np.full(len(t), float(rho)),
            u=lambda x, t: np.tile(u, (len(t), 1)),
            theta=lambda x, t: np.full(len(t), float(theta)),
        )

    def fields_at(self, positions, times) -> LocalFields:
        return LocalFields(
            rho=np.asarray(self._rho(positions, times), dtype=float),
            u=np.asarray(self._u(positions, times), dtype=float).reshape(-1, 3),
            theta=np.asarray(self._theta(positions, times), dtype=float),
        )


class BoostedTrajectory(FieldTrajectory):
    """Galilean image of another trajectory: rho'(x + v t) = rho(x), u' = u + v."""

    def __init__(self, base: FieldTrajectory, v):
        self.base = base
        self.v = np.asarray(v, dtype=float).reshape(3)

    @property
    def earliest_time(self) -> float:
        return self.base.earliest_time

    def fields_at(self, positions, times) -> LocalFields:
        positions = np.asarray(positions, dtype=float)
        times = np.asarray(times, dtype=float)
        base = self.base.fields_at(positions - times[:, None] * self.v, times)
        return LocalFields(base.rho, base.u + self.v, base.theta)


class SampledTrajectory(FieldTrajectory):
    """Piecewise-linear interpolation in (t, x) between solver snapshots.

    Periodic axes wrap; reflective axes clamp to the outermost cell
    centres. Times after the last snapshot see the last snapshot, which
    stands in for the intermediate-time fields to second order.
    """

    def __init__(self, snapshots: list[FieldState]):
        if len(snapshots) < 2:
            raise DomainError(f"A sampled trajectory needs at least 2 snapshots, got {len(snapshots)}")
        times = np.array([s.t for s in snapshots])
        if np.any(np.diff(times) <= 0):
            raise DomainError("Snapshot times must be strictly increasing")
        self.grid = grid = snapshots[0].grid
        self.times = times

        stacked = np.stack([
            np.concatenate([s.rho[None], s.u, s.theta[None]], axis=0) for s in snapshots
        ])  # (nt, 5, *shape)
        values = np.moveaxis(stacked, 1, -1)  # (nt, *shape, 5)
        axes = [times]
        for a in range(grid.dimension):
            coords = grid.coordinates(a)
            if grid.boundary[a] == "periodic":
                coords = np.append(coords, coords[0] + grid.lengths[a])
                first = np.take(values, [0], axis=a + 1)
                values = np.concatenate([values, first], axis=a + 1)
            axes.append(coords)
        self._axes = axes
        self._interpolator = RegularGridInterpolator(tuple(axes), values, method="linear")

    @property
    def earliest_time(self) -> float:
        return float(self.times[0])

    def fields_at(self, positions, times) -> LocalFields:
        positions = np.asarray(positions, dtype=float).reshape(-1, 3)
        times = np.asarray(times, dtype=float).reshape(-1)
        if times.size and times.min() < self.times[0] - 1e-12 * max(1.0, abs(self.times[0])):
            raise WindowTooShortError(
                f"Requested time {times.min():.6g} precedes the first snapshot at {self.times[0]:.6g}"
            )
        query = [np.clip(times, self.times[0], self.times[-1])]
        for a in range(self.grid.dimension):
            coords = self._axes[a + 1]
            x = positions[:, a]
            if self.grid.boundary[a] == "periodic":
                x = coords[0] + np.mod(x - coords[0], self.grid.lengths[a])
            query.append(np.clip(x, coords[0], coords[-1]))
        values = self._interpolator(np.stack(query, axis=-1))
        return LocalFields(rho=values[:, 0], u=values[:, 1:4], theta=values[:, 4])


def collision_rate(fields, momentum, k: KineticConstants):
    """C = (sigma / m^2) integral |k - q| rho p(q) d^3q = sigma rho c G(kappa) / m.

    fields is anything with rho, u and theta attributes: a FieldPoint or
    LocalFields with batch axes.
    """
    rho = np.asarray(fields.rho, dtype=float)
    if np.any(rho <= 0):
        raise DomainError(f"Density must be positive along the characteristic, got min {rho.min():.6g}")
    c = k.thermal_speed(fields.theta)
    velocity = np.asarray(momentum, dtype=float) / k.m
    kappa = np.linalg.norm(velocity - np.asarray(fields.u, dtype=float), axis=-1) / c
    return k.sigma * rho * c * relative_speed_factor(kappa) / k.m


def phase_density(fields, momentum, k: KineticConstants):
    """Thermalised phase density N p(k): occupation times the Maxwellian density."""
    rho = np.asarray(fields.rho, dtype=float)
    theta = np.asarray(fields.theta, dtype=float)
    beta = 1.0 / (k.k_B * theta)
    peculiar = np.asarray(momentum, dtype=float) - k.m * np.asarray(fields.u, dtype=float)
    occupation = rho * k.a ** 3 / k.m
    return occupation * (beta / (2.0 * np.pi * k.m)) ** 1.5 * np.exp(
        -beta * np.sum(peculiar ** 2, axis=-1) / (2.0 * k.m))


class WorldLine:
    """The characteristic (x + k s / m, t0 + s) through a trajectory."""

    def __init__(self, traj: FieldTrajectory, x, momentum, t0: float, constants: KineticConstants):
        self.traj = traj
        self.x = np.zeros(3)
        x = np.atleast_1d(np.asarray(x, dtype=float))
        self.x[:x.size] = x
        self.momentum = np.asarray(momentum, dtype=float).reshape(3)
        self.t0 = float(t0)
        self.constants = constants

    def fields(self, s) -> LocalFields:
        s = np.asarray(s, dtype=float)
        flat = s.reshape(-1)
        positions = self.x + flat[:, None] * (self.momentum / self.constants.m)
        return self.traj.fields_at(positions, self.t0 + flat)

    def rate(self, s):
        s = np.asarray(s, dtype=float)
        return collision_rate(self.fields(s), self.momentum, self.constants).reshape(s.shape)

    def phase(self, s):
        s = np.asarray(s, dtype=float)
        return phase_density(self.fields(s), self.momentum, self.constants).reshape(s.shape)

    def longest_free_time(self, window_factor: float) -> float:
        """Largest 1/C on the line within the reach of the collision window."""
        reach = 2.0 * window_factor / float(self.rate(0.0))
        earliest = max(-reach, self.traj.earliest_time - self.t0)
        samples = np.linspace(earliest, reach, 65)
        return float(np.max(1.0 / self.rate(samples)))


class PanelRule:
    """Composite Gauss-Legendre rule on consecutive panels.

    Edges run outward from a base point and may decrease; weights then
    carry the orientation, so integrate() returns the signed integral from
    edges[0].
    """

    def __init__(self, edges, order: int = GAUSS_ORDER):
        edges = np.asarray(edges, dtype=float)
        self._x, self._w = np.polynomial.legendre.leggauss(order)
        self.start = edges[:-1]
        half = 0.5 * (edges[1:] - edges[:-1])
        self.nodes = (0.5 * (edges[1:] + edges[:-1]))[:, None] + half[:, None] * self._x
        self.weights = half[:, None] * self._w

    @classmethod
    def graded(cls, length: float, levels: int = GRADED_LEVELS,
               order: int = GAUSS_ORDER) -> "PanelRule":
        """Panels halving toward the base point: edges 0, L 2^-levels, ..., L/2, L."""
        edges = np.concatenate([[0.0], length * 2.0 ** -np.arange(levels, -1, -1)])
        return cls(edges, order)

    @classmethod
    def uniform(cls, length: float, panels: int, order: int = GAUSS_ORDER) -> "PanelRule":
        return cls(np.linspace(0.0, length, panels + 1), order)

    def integrate(self, values) -> float:
        return float(np.sum(values * self.weights))

    def cumulative(self, func: Callable) -> np.ndarray:
        """integral of func from edges[0] to every node."""
        panel = np.sum(func(self.nodes) * self.weights, axis=1)
        before = np.concatenate([[0.0], np.cumsum(panel)[:-1]])
        span = self.nodes - self.start[:, None]
        sub = self.start[:, None, None] + span[..., None] * 0.5 * (self._x + 1.0)
        partial = np.sum(func(sub) * (0.5 * span)[..., None] * self._w, axis=-1)
        return before[:, None] + partial


def survival_W(traj: FieldTrajectory, x, k, t0: float, t: float, constants: KineticConstants,
               quad_tol: float = 1e-10) -> float:
    """W = exp(-integral_0^t C(x + k t1 / m, k, t0 + t1) dt1)."""
    if t < 0:
        raise DomainError(f"Flight time must be non-negative, got {t}")
    if t == 0:
        return 1.0
    line = WorldLine(traj, x, k, t0, constants)
    result = integrate.quad(lambda s: float(line.rate(s)), 0.0, t,
                            epsabs=quad_tol * 1e-4, epsrel=quad_tol, limit=200, full_output=1)
    if len(result) > 3:
        raise QuadratureError(f"Optical depth on [0, {t:.6g}] did not converge: {result[3]}")
    return math.exp(-result[0])


def free_time_density(traj: FieldTrajectory, x, k, t0: float, t: float,
                      constants: KineticConstants, quad_tol: float = 1e-10) -> float:
    """w(t) = W(t) C(x + k t / m, k, t0 + t)."""
    line = WorldLine(traj, x, k, t0, constants)
    return survival_W(traj, x, k, t0, t, constants, quad_tol) * float(line.rate(t))


class FreeTimeMoments(NamedTuple):
    normalization: float
    mean: float
    window: float


def free_time_moments(traj: FieldTrajectory, x, k, t0: float, constants: KineticConstants,
                      window_factor: float = DEFAULT_WINDOW_FACTOR, tol: float = 1e-6,
                      panels: int = 64) -> FreeTimeMoments:
    """Integral and mean of w over the collision window, plus the tail beyond it.

    The tail past T keeps the rate frozen at C(T): it adds exp(-Lambda(T))
    to the normalisation and (T + 1/C(T)) exp(-Lambda(T)) to the mean.

    Raises:
        NormalizationError: if the normalisation misses one by more than tol
    """
    line = WorldLine(traj, x, k, t0, constants)
    window = window_factor * line.longest_free_time(window_factor)
    rule = PanelRule.uniform(window, panels)
    rates = line.rate(rule.nodes)
    depth = rule.cumulative(line.rate)
    w = rates * np.exp(-depth)

    rate_end = float(line.rate(window))
    tail = math.exp(-rule.integrate(rates))
    normalization = rule.integrate(w) + tail
    mean = rule.integrate(rule.nodes * w) + (window + 1.0 / rate_end) * tail
    logger.debug("free-time moments: norm=%.15g mean=%.15g window=%.6g", normalization, mean, window)
    if abs(normalization - 1.0) > tol:
        raise NormalizationError(
            f"Free-time density integrates to {normalization:.12g}, expected 1 within {tol:g}"
        )
    return FreeTimeMoments(normalization=normalization, mean=mean, window=window)


def fundamental_relation(traj: FieldTrajectory, x, k, t0: float, constants: KineticConstants,
                         window_factor: float = DEFAULT_WINDOW_FACTOR,
                         levels: int = GRADED_LEVELS, order: int = GAUSS_ORDER) -> float:
    """Phase density N p at (x, k, t0) from the thermalised density along the past.

    Writing a <= 0 for the last thermalisation and b >= 0 for the next
    collision on the world line, the relation reads

        N p = integral da integral db  Np_bar(a) C(b) exp(-(Lambda(b) - Lambda(a))) / (b - a)

    with Lambda the optical depth from s = 0. The 1/(b - a) weight is
    singular only at the corner a = b = 0, so both axes use panels halving
    toward zero. Contributions from flights longer than the window are
    dropped; their weight is below exp(-window_factor).

    Raises:
        WindowTooShortError: if the trajectory starts after t0 - window
    """
    line = WorldLine(traj, x, k, t0, constants)
    window = window_factor * line.longest_free_time(window_factor)
    if traj.earliest_time > t0 - window:
        raise WindowTooShortError(
            f"Trajectory starts at {traj.earliest_time:.6g}; the collision window needs "
            f"fields from {t0 - window:.6g}"
        )

    past = PanelRule.graded(-window, levels, order)
    future = PanelRule.graded(window, levels, order)
    a = past.nodes.ravel()
    b = future.nodes.ravel()
    weight_a = np.abs(past.weights).ravel()
    weight_b = future.weights.ravel()

    origin = weight_a * line.phase(a) * np.exp(past.cumulative(line.rate).ravel())
    arrival = weight_b * line.rate(b) * np.exp(-future.cumulative(line.rate).ravel())
    kernel = 1.0 / (b[None, :] - a[:, None])
    value = float(origin @ kernel @ arrival)
    logger.debug("fundamental relation at t0=%.6g: %.17g (window %.6g)", t0, value, window)
    return value


def first_order_relation(traj: FieldTrajectory, x, k, t0: float, constants: KineticConstants,
                         step_fraction: float = 0.05) -> float:
    """Np_bar - (1/2)(k.grad / m + d/dt)(Np_bar t_l) at (x, k, t0).

    The derivative runs along the world line with a five-point stencil of
    spacing step_fraction * t_l; t_l = 1 / C is the local mean free time.
    """
    line = WorldLine(traj, x, k, t0, constants)
    h = step_fraction / float(line.rate(0.0))
    s = np.array([-2.0, -1.0, 1.0, 2.0]) * h
    carried = line.phase(s) / line.rate(s)
    derivative = (carried[0] - 8.0 * carried[1] + 8.0 * carried[2] - carried[3]) / (12.0 * h)
    return float(line.phase(0.0)) - 0.5 * derivative


@dataclass(frozen=True)
class Jet:
    """A value with its three spatial derivatives and its time derivative."""
    value: float
    grad: np.ndarray
    dot: float

    def __add__(self, other):
        other = _as_jet(other)
        return Jet(self.value + other.value, self.grad + other.grad, self.dot + other.dot)

    __radd__ = __add__

    def __neg__(self):
        return Jet(-self.value, -self.grad, -self.dot)

    def __sub__(self, other):
        return self + (-_as_jet(other))

    def __rsub__(self, other):
        return _as_jet(other) - self

    def __mul__(self, other):
        other = _as_jet(other)
        return Jet(
            self.value * other.value,
            self.grad * other.value + self.value * other.grad,
            self.dot * other.value + self.value * other.dot,
        )

    __rmul__ = __mul__

    def __pow__(self, exponent: float):
        scale = exponent * self.value ** (exponent - 1.0)
        return Jet(self.value ** exponent, scale * self.grad, scale * self.dot)

    def __truediv__(self, other):
        return self * _as_jet(other) ** -1.0


def _as_jet(value) -> Jet:
    if isinstance(value, Jet):
        return value
    return Jet(float(value), np.zeros(3), 0.0)


def _divergence(vector: list[Jet]) -> float:
    return sum(vector[j].grad[j] for j in range(3))


@dataclass(frozen=True)
class PointGradients:
    """Fields and first derivatives at one point.

    grad_u[i, j] = d u_i / d x_j.
    """
    rho: float
    u: np.ndarray
    theta: float
    grad_rho: np.ndarray
    grad_u: np.ndarray
    grad_theta: np.ndarray

    @classmethod
    def from_state(cls, state: FieldState, index: tuple) -> "PointGradients":
        """Central-difference gradients of a grid state at one cell."""
        grid = state.grid
        index = tuple(index)
        grad_rho = gradient(state.rho, grid)
        grad_theta = gradient(state.theta, grid)
        grad_u = velocity_gradient(state.u, grid)
        at = (slice(None),) + index
        return cls(
            rho=float(state.rho[index]),
            u=state.u[at].copy(),
            theta=float(state.theta[index]),
            grad_rho=grad_rho[at].copy(),
            grad_u=grad_u[(slice(None), slice(None)) + index].copy(),
            grad_theta=grad_theta[at].copy(),
        )

    def jets(self, constants: KineticConstants) -> tuple[Jet, list[Jet], Jet]:
        """rho, u_i and theta as jets, with time derivatives from the short Eulers."""
        u = np.asarray(self.u, dtype=float)
        div = float(np.trace(self.grad_u))
        advect = lambda g: float(u @ g)
        grad_pressure = (self.theta * self.grad_rho + self.rho * self.grad_theta) * constants.k_B / constants.m
        rho_dot = -advect(self.grad_rho) - self.rho * div
        u_dot = -self.grad_u @ u - grad_pressure / self.rho
        theta_dot = -advect(self.grad_theta) - (2.0 / 3.0) * self.theta * div
        rho = Jet(self.rho, np.asarray(self.grad_rho, dtype=float), rho_dot)
        velocity = [Jet(float(u[i]), np.asarray(self.grad_u[i], dtype=float), float(u_dot[i]))
                    for i in range(3)]
        theta = Jet(self.theta, np.asarray(self.grad_theta, dtype=float), theta_dot)
        return rho, velocity, theta


class DeltaMoments(NamedTuple):
    """Full minus thermalised means, to first order in the mean free time.

    delta_energy is per unit volume (the a^-3 delta E of a site).
    """
    delta_rho: float
    delta_momentum: np.ndarray
    delta_energy: float
    delta_rho_theta: float


def delta_moments(point: PointGradients, table: TransportTable,
                  constants: KineticConstants) -> DeltaMoments:
    """Differences between the full state and its thermalised description.

    Time derivatives of the fields are eliminated through the short
    Eulers, so only spatial gradients enter.
    """
    _, u, theta = point.jets(constants)
    l1, l2 = table.lambda1, table.lambda2
    kb_m = constants.k_B / constants.m
    root = theta ** 0.5
    inv_root = theta ** -0.5
    speed2 = u[0] * u[0] + u[1] * u[1] + u[2] * u[2]

    delta_rho = -l1 * _divergence([inv_root * u[j] for j in range(3)]) - l1 * inv_root.dot

    delta_momentum = np.array([
        -(kb_m * l2 / 3.0) * root.grad[i]
        - l1 * _divergence([inv_root * u[i] * u[j] for j in range(3)])
        - l1 * (inv_root * u[i]).dot
        for i in range(3)
    ])

    delta_energy = (
        -(5.0 * kb_m * l2 / 6.0) * _divergence([root * u[j] for j in range(3)])
        - 0.5 * l1 * _divergence([inv_root * u[j] * speed2 for j in range(3)])
        - 0.5 * kb_m * l2 * root.dot
        - 0.5 * l1 * (inv_root * speed2).dot
    )

    div = float(np.trace(point.grad_u))
    delta_rho_theta = -(4.0 * l2 / 9.0) * math.sqrt(point.theta) * div
    return DeltaMoments(
        delta_rho=float(delta_rho),
        delta_momentum=delta_momentum,
        delta_energy=float(delta_energy),
        delta_rho_theta=delta_rho_theta,
    )
