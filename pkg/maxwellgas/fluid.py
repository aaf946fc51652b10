"""Conservative solver for compressible flow with temperature.

The system advanced here is the Euler system plus three dissipative
fluxes taken from the transport table: a traceless viscous stress, Fourier
conduction and the Dufour flux driven by density gradients, with the
viscous work in the energy current.

Discretisation: collocated cells, central face fluxes, compact normal
gradients at faces, SSP-RK2 in time. Ghost cells wrap on periodic axes and
mirror on reflective axes, so the flux-difference update telescopes and
conserves mass exactly on periodic domains.
"""

from dataclasses import dataclass, field, replace
from typing import Iterator, NamedTuple

import numpy as np

from .errors import DomainError
from .fields import FieldState, Grid, conserved_totals
from .log_config import get_logger
from .stencils import along, divergence, gradient, pad, velocity_gradient
from .thermostatics import KineticConstants
from .transport import TransportTable

logger = get_logger(__name__)

SCHEMES = ("ssprk2", "euler")
DEFAULT_CFL = 0.4
DEFAULT_DIFFUSION_NUMBER = 0.2

# Relative slack allowed on the stress trace before the assembly is rejected.
TRACE_TOLERANCE = 1e-12


@dataclass
class FluxSet:
    """Face fluxes along one axis.

    Face i sits between cells i - 1 and i, so every array has n + 1 entries
    along the axis. momentum[i] is the flux of the i-th momentum component
    and already includes the viscous stress; energy includes the heat flux.
    """
    axis: int
    mass: np.ndarray
    momentum: np.ndarray
    energy: np.ndarray
    heat: np.ndarray
    stress: np.ndarray


def euler_flux(rho, u, theta, axis: int, constants: KineticConstants):
    """Perfect-gas Euler fluxes through faces normal to axis.

    Returns (mass, momentum[3], energy) with pressure rho k_B theta / m.
    """
    pressure = rho * constants.k_B * theta / constants.m
    un = u[axis]
    mass = rho * un
    momentum = rho * u * un
    momentum[axis] += pressure
    enthalpy = 2.5 * constants.k_B * theta / constants.m + 0.5 * np.sum(u ** 2, axis=0)
    return mass, momentum, rho * un * enthalpy


def viscous_stress(grad_u: np.ndarray, theta, table: TransportTable) -> np.ndarray:
    """tau_ij = lambda_shear theta^(1/2) (d_j u_i + d_i u_j - (2/3) div u delta_ij).

    grad_u[i, j] = d u_i / d x_j; extra trailing axes are broadcast.
    """
    strain = grad_u + np.swapaxes(grad_u, 0, 1)
    div = np.trace(grad_u, axis1=0, axis2=1)
    identity = np.eye(3).reshape((3, 3) + (1,) * (grad_u.ndim - 2))
    deviator = strain - (2.0 / 3.0) * div * identity
    return table.lambda_shear * np.sqrt(theta) * deviator


def heat_flux(grad_theta: np.ndarray, grad_log_rho: np.ndarray, theta, u: np.ndarray,
              tau: np.ndarray, table: TransportTable) -> np.ndarray:
    """q_j = -lambda_fourier theta^(1/2) d_j theta - lambda_dufour theta^(3/2) d_j log rho - u_i tau_ij."""
    sqrt_theta = np.sqrt(theta)
    return (-table.lambda_fourier * sqrt_theta * grad_theta
            - table.lambda_dufour * theta * sqrt_theta * grad_log_rho
            - np.einsum("i...,ij...->j...", u, tau))


def _check_traceless(tau: np.ndarray, grad_u: np.ndarray, theta, table: TransportTable):
    trace = np.trace(tau, axis1=0, axis2=1)
    scale = abs(table.lambda_shear) * np.max(np.sqrt(theta)) * np.max(np.abs(grad_u), initial=0.0)
    if np.max(np.abs(trace), initial=0.0) > TRACE_TOLERANCE * scale:
        raise AssertionError(f"Viscous stress trace {np.max(np.abs(trace)):.3e} is not zero")


def _faces(padded: np.ndarray, ax: int) -> tuple[np.ndarray, np.ndarray]:
    left = padded[along(ax, padded.ndim, slice(None, -1))]
    right = padded[along(ax, padded.ndim, slice(1, None))]
    return left, right


def compute_fluxes(state: FieldState, table: TransportTable,
                   constants: KineticConstants) -> list[FluxSet]:
    """Face fluxes for every active axis of the grid."""
    grid = state.grid
    d = grid.dimension
    log_rho = np.log(state.rho)
    cell_grad_u = velocity_gradient(state.u, grid)
    cell_grad_theta = gradient(state.theta, grid)
    cell_grad_log_rho = gradient(log_rho, grid)

    flux_sets = []
    for a in range(d):
        h = grid.spacing[a]
        ax = a  # grid axis index inside a scalar field
        rho_p = pad(state.rho, grid, a)
        theta_p = pad(state.theta, grid, a)
        log_rho_p = pad(log_rho, grid, a)
        u_p = np.stack([pad(state.u[i], grid, a, odd=(i == a)) for i in range(3)])

        # Euler part: average of cell fluxes on either side.
        mass_c, mom_c, energy_c = euler_flux(rho_p, u_p, theta_p, a, constants)
        mass_l, mass_r = _faces(mass_c, ax)
        mom_l, mom_r = _faces(mom_c, ax + 1)
        energy_l, energy_r = _faces(energy_c, ax)

        theta_l, theta_r = _faces(theta_p, ax)
        u_l, u_r = _faces(u_p, ax + 1)
        theta_f = 0.5 * (theta_l + theta_r)
        u_f = 0.5 * (u_l + u_r)

        # Face gradients: compact along a, averaged central differences across.
        grad_u = np.zeros((3, 3) + theta_f.shape)
        grad_theta = np.zeros((3,) + theta_f.shape)
        grad_log_rho = np.zeros((3,) + theta_f.shape)
        grad_u[:, a] = (u_r - u_l) / h
        lr_l, lr_r = _faces(log_rho_p, ax)
        grad_theta[a] = (theta_r - theta_l) / h
        grad_log_rho[a] = (lr_r - lr_l) / h
        for b in range(d):
            if b == a:
                continue
            for i in range(3):
                g = pad(cell_grad_u[i, b], grid, a, odd=(i == a))
                gl, gr = _faces(g, ax)
                grad_u[i, b] = 0.5 * (gl + gr)
            gl, gr = _faces(pad(cell_grad_theta[b], grid, a), ax)
            grad_theta[b] = 0.5 * (gl + gr)
            gl, gr = _faces(pad(cell_grad_log_rho[b], grid, a), ax)
            grad_log_rho[b] = 0.5 * (gl + gr)

        tau = viscous_stress(grad_u, theta_f, table)
        _check_traceless(tau, grad_u, theta_f, table)
        q = heat_flux(grad_theta, grad_log_rho, theta_f, u_f, tau, table)

        flux_sets.append(FluxSet(
            axis=a,
            mass=0.5 * (mass_l + mass_r),
            momentum=0.5 * (mom_l + mom_r) - tau[:, a],
            energy=0.5 * (energy_l + energy_r) + q[a],
            heat=q[a],
            stress=tau[:, a],
        ))
    return flux_sets


def _flux_divergence(flux_sets: list[FluxSet], grid: Grid):
    d_mass = np.zeros(grid.shape)
    d_mom = np.zeros((3,) + grid.shape)
    d_energy = np.zeros(grid.shape)
    for fs in flux_sets:
        a = fs.axis
        h = grid.spacing[a]
        hi, lo = slice(1, None), slice(None, -1)
        d_mass -= (fs.mass[along(a, d_mass.ndim, hi)] - fs.mass[along(a, d_mass.ndim, lo)]) / h
        d_mom -= (fs.momentum[along(a + 1, d_mom.ndim, hi)] - fs.momentum[along(a + 1, d_mom.ndim, lo)]) / h
        d_energy -= (fs.energy[along(a, d_energy.ndim, hi)] - fs.energy[along(a, d_energy.ndim, lo)]) / h
    return d_mass, d_mom, d_energy


def rhs(state: FieldState, table: TransportTable, constants: KineticConstants):
    """Time derivative of the conserved densities."""
    return _flux_divergence(compute_fluxes(state, table, constants), state.grid)


class ShortEuler(NamedTuple):
    """Material derivatives D = d/dt + u.grad under the Euler system."""
    D_rho: np.ndarray
    D_u: np.ndarray
    D_theta: np.ndarray


def short_euler_rhs(state: FieldState, constants: KineticConstants) -> ShortEuler:
    """D rho = -rho div u, D u_i = -(k_B/rho) d_i(rho theta / m), D theta = -(2/3) theta div u."""
    grid = state.grid
    div = divergence(state.u, grid)
    grad_p = gradient(state.rho * state.theta, grid)
    return ShortEuler(
        D_rho=-state.rho * div,
        D_u=-(constants.k_B / constants.m) * grad_p / state.rho,
        D_theta=-(2.0 / 3.0) * state.theta * div,
    )


def viscous_work_equivalence(state: FieldState, table: TransportTable,
                             constants: KineticConstants) -> float:
    """Max pointwise difference of two groupings of the viscous-work divergence.

    One grouping is the divergence of u_i tau_ij with the assembled
    lambda_shear. The other is the term-by-term energy equation built from
    the raw moment lambda2:
        -(2 k_B / 9 m) lambda2 d_j(theta^(1/2) u_j div u)
        + (k_B / 3 m) lambda2 d_j(theta^(1/2) u_i d_i u_j)
        + (k_B / 3 m) lambda2 d_j(theta^(1/2) d_j(u.u / 2)),
    where the last term differentiates u.u/2 directly. With a consistent
    table the two agree to O(h^2); a lambda_shear that is not k_B lambda2 / 3m
    leaves an O(1) discrepancy.
    """
    grid = state.grid
    u = state.u
    sqrt_theta = np.sqrt(state.theta)
    grad_u = velocity_gradient(u, grid)
    div = np.trace(grad_u, axis1=0, axis2=1)

    tau = viscous_stress(grad_u, state.theta, table)
    work = np.einsum("i...,ij...->j...", u, tau)
    grouped = divergence(work, grid)

    coefficient = constants.k_B * table.lambda2 / constants.m
    advective = np.einsum("i...,ji...->j...", u, grad_u)
    kinetic_grad = gradient(0.5 * np.sum(u ** 2, axis=0), grid)
    expanded = (-(2.0 / 9.0) * coefficient * divergence(sqrt_theta * u * div, grid)
                + (coefficient / 3.0) * divergence(sqrt_theta * advective, grid)
                + (coefficient / 3.0) * divergence(sqrt_theta * kinetic_grad, grid))
    return float(np.max(np.abs(grouped - expanded)))


def stable_time_step(state: FieldState, table: TransportTable, constants: KineticConstants,
                     cfl: float = DEFAULT_CFL,
                     diffusion_number: float = DEFAULT_DIFFUSION_NUMBER) -> float:
    """min(cfl h / (|u| + c_s), diffusion_number h^2 / (d nu_max)).

    c_s = (5 k_B theta / 3 m)^(1/2). nu_max is the larger of the kinematic
    viscosity (4/3) lambda_shear theta^(1/2) / rho and the thermal
    diffusivity (lambda_fourier + |lambda_dufour|) theta^(1/2) / (rho c_v).
    """
    grid = state.grid
    h = min(grid.spacing)
    sound = np.sqrt(5.0 * constants.k_B * state.theta / (3.0 * constants.m))
    speed = np.sqrt(np.sum(state.u ** 2, axis=0)) + sound
    dt = cfl * h / float(np.max(speed))

    sqrt_theta = np.sqrt(state.theta)
    c_v = 1.5 * constants.k_B / constants.m
    nu_visc = (4.0 / 3.0) * table.lambda_shear * sqrt_theta / state.rho
    nu_heat = (table.lambda_fourier + abs(table.lambda_dufour)) * sqrt_theta / (state.rho * c_v)
    nu_max = float(max(np.max(nu_visc), np.max(nu_heat)))
    if nu_max > 0:
        dt = min(dt, diffusion_number * h * h / (nu_max * grid.dimension))
    return dt


def step(state: FieldState, dt: float, table: TransportTable, constants: KineticConstants,
         scheme: str = "ssprk2", cfl: float = DEFAULT_CFL,
         diffusion_number: float = DEFAULT_DIFFUSION_NUMBER) -> FieldState:
    """Advance the conserved densities by dt.

    Raises:
        DomainError: if dt exceeds the stability bound or the scheme is unknown
        PositivityError: if any stage produces a non-positive density or
            temperature
    """
    if scheme not in SCHEMES:
        raise DomainError(f"Unknown scheme: {scheme}. Must be one of: {SCHEMES}")
    bound = stable_time_step(state, table, constants, cfl, diffusion_number)
    if not 0 < dt <= bound * (1.0 + 1e-9):
        raise DomainError(f"CFL violation: dt = {dt:.6g} exceeds the stable bound {bound:.6g}")

    grid = state.grid
    u0 = state.conserved(constants)
    k0 = rhs(state, table, constants)
    u1 = tuple(q + dt * k for q, k in zip(u0, k0))
    stage = FieldState.from_conserved(grid, *u1, constants, t=state.t + dt)
    if scheme == "euler":
        return stage

    k1 = rhs(stage, table, constants)
    u2 = tuple(0.5 * q0 + 0.5 * (q1 + dt * k) for q0, q1, k in zip(u0, u1, k1))
    return FieldState.from_conserved(grid, *u2, constants, t=state.t + dt)


def _translate(values: np.ndarray, grid: Grid, shift: np.ndarray) -> np.ndarray:
    """Spectral translation f(x) -> f(x - shift) along the periodic axes."""
    offset = values.ndim - grid.dimension
    result = values
    for a in range(grid.dimension):
        s = float(shift[a])
        if s == 0.0:
            continue
        if grid.boundary[a] != "periodic":
            raise DomainError(f"Cannot translate along reflective axis {a}")
        ax = offset + a
        n = grid.cells[a]
        wavenumbers = 2.0 * np.pi * np.fft.rfftfreq(n, d=grid.spacing[a])
        phase = np.exp(-1j * wavenumbers * s)
        shape = [1] * result.ndim
        shape[ax] = phase.size
        spectrum = np.fft.rfft(result, axis=ax) * phase.reshape(shape)
        result = np.fft.irfft(spectrum, n=n, axis=ax)
    return result


def boost(state: FieldState, v) -> FieldState:
    """Active Galilean boost: rho'(x + v t) = rho(x), theta' = theta, u' = u + v."""
    v = np.asarray(v, dtype=float).reshape(3)
    shift = v[:state.grid.dimension] * state.t
    grid = state.grid
    expand = v.reshape((3,) + (1,) * grid.dimension)
    return replace(
        state,
        rho=_translate(state.rho, grid, shift),
        theta=_translate(state.theta, grid, shift),
        u=_translate(state.u, grid, shift) + expand,
    )


def unboost(state: FieldState, v) -> FieldState:
    """Inverse of boost at the state's time."""
    return boost(state, -np.asarray(v, dtype=float))


def lattice_equation_of_state(state: FieldState, constants: KineticConstants) -> np.ndarray:
    """Hard-core lattice pressure (k_B theta / a^3) log(1 / (1 - N)) per cell."""
    occupation = state.rho * constants.a ** 3 / constants.m
    if np.any(occupation >= 1.0):
        raise DomainError(f"Occupation {occupation.max():.6g} reaches one particle per site")
    return -constants.k_B * state.theta * np.log1p(-occupation) / constants.a ** 3


@dataclass
class FluidRun:
    """Snapshots and diagnostics of one solver run."""
    snapshots: list[FieldState] = field(default_factory=list)
    totals: list[dict] = field(default_factory=list)
    dt_history: list[float] = field(default_factory=list)

    @property
    def final(self) -> FieldState:
        return self.snapshots[-1]


def iterate(state: FieldState, table: TransportTable, constants: KineticConstants,
            t_end: float, dt: float | None = None, scheme: str = "ssprk2",
            cfl: float = DEFAULT_CFL, diffusion_number: float = DEFAULT_DIFFUSION_NUMBER,
            max_steps: int = 1_000_000) -> Iterator[tuple[FieldState, float]]:
    """Yield (state, dt) after every step until t_end.

    With dt unset each step takes the stable bound, trimmed to land on t_end.
    """
    steps = 0
    while state.t < t_end * (1.0 - 1e-14):
        if steps >= max_steps:
            raise DomainError(f"Run did not reach t_end = {t_end} within {max_steps} steps")
        bound = stable_time_step(state, table, constants, cfl, diffusion_number)
        step_dt = min(dt if dt is not None else bound, t_end - state.t)
        state = step(state, step_dt, table, constants, scheme, cfl, diffusion_number)
        steps += 1
        logger.debug("step %d: t=%.6g dt=%.3e", steps, state.t, step_dt)
        yield state, step_dt


def run(state: FieldState, table: TransportTable, constants: KineticConstants, t_end: float,
        output_every: int = 10, dt: float | None = None, **kwargs) -> FluidRun:
    """Advance to t_end, keeping every output_every-th snapshot and the final one."""
    record = FluidRun()
    record.snapshots.append(state)
    record.totals.append(conserved_totals(state, constants))
    count = 0
    for state, step_dt in iterate(state, table, constants, t_end, dt=dt, **kwargs):
        count += 1
        record.dt_history.append(step_dt)
        record.totals.append(conserved_totals(state, constants))
        if count % output_every == 0:
            record.snapshots.append(state)
    if record.snapshots[-1] is not state:
        record.snapshots.append(state)
    logger.info("Fluid run finished: %d steps to t=%.6g", count, state.t)
    return record
