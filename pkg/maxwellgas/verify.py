"""Invariant suite behind the `verify` subcommand.

Each check is a small, self-contained run that returns a CheckResult.
Checks are independent and run on a thread pool capped by
MAXWELLGAS_THREADS. The harness functions that build the refinement
sweeps are shared with the test suite.
"""

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field
from typing import Callable, NamedTuple

import numpy as np

from .errors import ConfigError, MaxwellGasError
from .fields import FieldState, Grid
from .fluid import (boost, compute_fluxes, run as run_fluid, stable_time_step, unboost,
                    viscous_stress, viscous_work_equivalence)
from .kinetic import AnalyticTrajectory, first_order_relation, free_time_moments, fundamental_relation
from .latticesim import (DecayComparison, build_hop_kernel, chain_step, compare_decay_rates,
                         equilibrium_state, fit_decay_rate, gaussian_bump, momentum_bins,
                         pair_operator, relax_experiment)
from .log_config import get_logger
from .thermostatics import FieldPoint, KineticConstants
from .transport import (TransportTable, bessel_like_In, collision_F, fourier_positivity_certificate,
                        lambda_moments, mean_free_time, mean_free_time_direct)

logger = get_logger(__name__)

VERIFY_SEED = 20240601

# Cross-section multiples for the first-order sweep; below ~100 the t_l^3
# term still tilts the fitted slope.
FIRST_ORDER_SIGMAS = (128.0, 256.0, 512.0, 1024.0)


@dataclass
class CheckResult:
    """Outcome of one named check."""
    name: str
    passed: bool
    value: float
    tolerance: float
    detail: str = ""


@dataclass
class VerificationReport:
    """All check results of one suite run."""
    checks: list[CheckResult] = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.checks)

    @property
    def failed(self) -> list[str]:
        return [c.name for c in self.checks if not c.passed]

    def to_dict(self) -> dict:
        return {"passed": self.passed, "checks": [asdict(c) for c in self.checks]}


@dataclass
class SuiteContext:
    constants: KineticConstants
    table: TransportTable


def _result(name: str, error: float, tolerance: float, detail: str = "") -> CheckResult:
    return CheckResult(name=name, passed=bool(error <= tolerance), value=float(error),
                       tolerance=tolerance, detail=detail)


# Refinement harness

def convergence_slope(sizes, errors) -> float:
    """Order p of errors ~ size^-p from a log-log least-squares fit."""
    return float(-np.polyfit(np.log(np.asarray(sizes, dtype=float)), np.log(errors), 1)[0])


def wave_state(cells: int, boundary: str = "periodic") -> FieldState:
    """Smooth 1-D state on the unit interval with every field varying."""
    grid = Grid.uniform(cells, 1.0, boundary)
    x = grid.coordinates(0)
    u = np.zeros((3, cells))
    u[0] = 0.1 * np.sin(2 * np.pi * x)
    u[1] = 0.05 * np.cos(2 * np.pi * x)
    return FieldState(grid=grid, rho=1.0 + 0.1 * np.sin(2 * np.pi * x), u=u,
                      theta=1.0 + 0.05 * np.cos(4 * np.pi * x))


def random_smooth_states(cells, seed: int = VERIFY_SEED, modes: int = 2) -> list[FieldState]:
    """One random low-mode periodic state, sampled at each resolution."""
    rng = np.random.default_rng(seed)
    amplitude = rng.uniform(-1.0, 1.0, (5, modes))
    phase = rng.uniform(0.0, 2 * np.pi, (5, modes))
    wavenumber = 2 * np.pi * np.arange(1, modes + 1)
    scale = np.array([0.1, 0.1, 0.1, 0.1, 0.05])
    states = []
    for n in cells:
        grid = Grid.uniform(int(n), 1.0, "periodic")
        x = grid.coordinates(0)
        waves = np.sin(wavenumber[None, :, None] * x + phase[..., None])
        series = scale[:, None] * np.sum(amplitude[..., None] * waves, axis=1)  # (5, n)
        states.append(FieldState(grid=grid, rho=1.0 + series[0], u=series[1:4], theta=1.0 + series[4]))
    return states


def wavy_trajectory(amplitude: float = 0.2, theta_amplitude: float = 0.0) -> AnalyticTrajectory:
    """Steady 1-D density (and optionally temperature) wave at rest."""
    two_pi = 2 * np.pi
    return AnalyticTrajectory(
        rho=lambda x, t: 0.5 * (1 + amplitude * np.sin(two_pi * x[:, 0])),
        u=lambda x, t: np.zeros((len(t), 3)),
        theta=lambda x, t: 1.0 + theta_amplitude * np.cos(two_pi * x[:, 0]),
    )


def first_order_residual_slope(constants: KineticConstants, sigmas=FIRST_ORDER_SIGMAS,
                               window_factor: float = 36.0) -> tuple[float, list[float]]:
    """Order in t_l of the gap between the fundamental relation and its first-order form.

    sigmas are multiples of constants.sigma; t_l scales as their inverse.
    """
    traj = wavy_trajectory(theta_amplitude=0.1)
    k = np.array([1.0, 0.5, 0.0])
    residuals = []
    for factor in sigmas:
        scaled = constants.with_sigma(constants.sigma * factor)
        full = fundamental_relation(traj, 0.1, k, 0.0, scaled, window_factor=window_factor)
        first = first_order_relation(traj, 0.1, k, 0.0, scaled)
        residuals.append(abs(full - first) / abs(first))
    return convergence_slope(sigmas, residuals), residuals


def frame_difference_slope(constants: KineticConstants, table: TransportTable, cells=(64, 128, 256),
                           v=(0.5, 0.0, 0.0), t_end: float = 0.05) -> tuple[float, list[float]]:
    """Order of the gap between evolving in a moving frame and evolving at rest.

    dt follows the stability bound of the boosted state, so space and time
    refine together.
    """
    v = np.asarray(v, dtype=float)
    errors = []
    for n in cells:
        state = wave_state(int(n))
        moving = boost(state, v)
        dt = 0.5 * stable_time_step(moving, table, constants)
        rest = run_fluid(state, table, constants, t_end, output_every=1000, dt=dt).final
        boosted = run_fluid(moving, table, constants, t_end, output_every=1000, dt=dt).final
        errors.append(float(np.max(np.abs(unboost(boosted, v).rho - rest.rho))))
    return convergence_slope(cells, errors), errors


def viscous_work_slope(constants: KineticConstants, table: TransportTable,
                       cells=(64, 128, 256)) -> tuple[float, list[float]]:
    """Order of the gap between the two viscous-work groupings on random smooth fields."""
    errors = [viscous_work_equivalence(s, table, constants) for s in random_smooth_states(cells)]
    return convergence_slope(cells, errors), errors


def dufour_flux_errors(constants: KineticConstants, table: TransportTable,
                       cells=(32, 64, 128)) -> tuple[float, list[float]]:
    """Relative error of the face heat flux of an isothermal density wave at rest."""
    errors = []
    for n in cells:
        grid = Grid.uniform(int(n), 1.0, "periodic")
        x = grid.coordinates(0)
        faces = grid.face_coordinates(0)
        state = FieldState(grid=grid, rho=1.0 + 0.1 * np.sin(2 * np.pi * x), u=np.zeros(3), theta=1.0)
        flux = compute_fluxes(state, table, constants)[0].heat
        exact = -table.lambda_dufour * 0.2 * np.pi * np.cos(2 * np.pi * faces) / (
            1.0 + 0.1 * np.sin(2 * np.pi * faces))
        errors.append(float(np.max(np.abs(flux - exact)) / np.max(np.abs(exact))))
    return convergence_slope(cells, errors), errors


class LatticeFluidDecay(NamedTuple):
    """Fitted decay rates of one temperature bump on the chain and in the matched fluid."""
    lattice_rate: float
    fluid_rate: float
    comparison: DecayComparison


def lattice_fluid_decay(constants: KineticConstants, table: TransportTable, sites: int = 64,
                        occupation: float = 0.3, epsilon: float = 0.4, bins: int = 24,
                        dt: float = 0.25, steps: int = 1280) -> LatticeFluidDecay:
    """Relax the same Gaussian temperature bump on the chain and in the fluid.

    The fluid runs at the cross-section matched to the chain's linear rate;
    the unmatched comparison at constants.sigma rides along.
    """
    q = 2 * np.pi / (sites * constants.a)
    series = relax_experiment(occupation, 1.0, 0.05, 4.0, sites, momentum_bins(bins, epsilon),
                              constants, dt=dt, steps=steps, output_every=8)
    lattice_rate = fit_decay_rate(series.times, series.theta)

    comparison = compare_decay_rates(table, occupation, 1.0, q, constants)
    grid = Grid.uniform(sites, sites * constants.a, "periodic")
    bump = gaussian_bump(sites, 0.05, 4.0, center=0.5 * sites - 0.5)
    rho = constants.m * occupation / constants.a ** 3
    state = FieldState(grid=grid, rho=rho / bump, u=np.zeros(3), theta=bump)
    matched = table.scaled(comparison.matched_sigma / constants.sigma)
    fluid = run_fluid(state, matched, constants, t_end=steps * dt, output_every=20)
    fluid_rate = fit_decay_rate([s.t for s in fluid.snapshots], [s.theta for s in fluid.snapshots])
    return LatticeFluidDecay(lattice_rate=lattice_rate, fluid_rate=fluid_rate, comparison=comparison)


# Checks

def check_special_functions(ctx: SuiteContext) -> CheckResult:
    error = max(
        abs(bessel_like_In(1, 0.0) - 1.0),
        abs(bessel_like_In(0, 0.0) - math.sqrt(math.pi / 2.0)),
        abs(bessel_like_In(3, 0.0) - 2.0),
        abs(collision_F(0.0) - 0.25),
    )
    return _result("special_functions", error, 1e-8, "I1(0), I0(0), I3(0), F(0)")


def check_fourier_positivity(ctx: SuiteContext) -> CheckResult:
    certificate = fourier_positivity_certificate()
    error = abs(certificate.minimum - 15.0 / 16.0)
    if ctx.table.lambda_fourier <= 0:
        error = math.inf
    return _result("fourier_positivity", error, 1e-12,
                   f"minimum {certificate.minimum:.12g}, lambda_fourier {ctx.table.lambda_fourier:.6g}")


def check_mean_free_time_routes(ctx: SuiteContext, samples: int = 20) -> CheckResult:
    rng = np.random.default_rng(VERIFY_SEED)
    k = ctx.constants
    worst = 0.0
    for _ in range(samples):
        point = FieldPoint.from_fields(rho=rng.uniform(0.5, 2.0), u=rng.normal(0.0, 0.5, 3),
                                       theta=rng.uniform(0.5, 2.0), constants=k)
        momentum = rng.normal(0.0, 1.5, 3)
        closed = mean_free_time(point, momentum, k)
        direct = mean_free_time_direct(point, momentum, k)
        worst = max(worst, abs(closed - direct) / closed)
    return _result("mean_free_time_routes", worst, 1e-6, f"{samples} random points")


def check_free_time_normalization(ctx: SuiteContext, samples: int = 10) -> CheckResult:
    rng = np.random.default_rng(VERIFY_SEED + 1)
    worst = 0.0
    for _ in range(samples):
        amplitude, wavenumber, phase = rng.uniform(0.1, 0.5), rng.uniform(0.5, 2.0), rng.uniform(0, 2 * np.pi)
        traj = AnalyticTrajectory(
            rho=lambda x, t, A=amplitude, q=wavenumber, p=phase: 1.0 + A * np.sin(q * x[:, 0] + p),
            u=lambda x, t: np.zeros((len(t), 3)),
            theta=lambda x, t: np.ones(len(t)),
        )
        moments = free_time_moments(traj, [0.0, 0.0, 0.0], rng.normal(0.0, 1.0, 3), 0.0,
                                    ctx.constants, tol=1.0)
        worst = max(worst, abs(moments.normalization - 1.0))
    return _result("free_time_normalization", worst, 1e-6, f"{samples} random density profiles")


def check_fundamental_relation_order(ctx: SuiteContext) -> CheckResult:
    slope, residuals = first_order_residual_slope(ctx.constants)
    return _result("fundamental_relation_order", abs(slope - 2.0), 0.2,
                   f"slope {slope:.4f} over sigma x {FIRST_ORDER_SIGMAS}, "
                   f"residuals {', '.join(f'{r:.3e}' for r in residuals)}")


def check_stokes_relation(ctx: SuiteContext) -> CheckResult:
    grad = np.zeros((3, 3, 4))
    grad[0, 0] = grad[1, 1] = grad[2, 2] = 0.7
    isotropic = float(np.max(np.abs(viscous_stress(grad, np.ones(4), ctx.table))))
    shear = np.zeros((3, 3, 4))
    shear[0, 1] = 0.3
    hot = viscous_stress(shear, np.full(4, 4.0), ctx.table)[0, 1]
    cold = viscous_stress(shear, np.ones(4), ctx.table)[0, 1]
    error = max(isotropic, float(np.max(np.abs(hot / cold - 2.0))))
    return _result("stokes_relation", error, 1e-12, "isotropic compression and theta^(1/2) scaling")


def check_fluid_conservation(ctx: SuiteContext, cells: int = 128, t_end: float = 0.05) -> CheckResult:
    state = wave_state(cells)
    record = run_fluid(state, ctx.table, ctx.constants, t_end, output_every=1000)
    first, last = record.totals[0], record.totals[-1]
    mass = abs(last["mass"] - first["mass"]) / first["mass"]
    scale = first["energy"]
    momentum = max(abs(a - b) for a, b in zip(last["momentum"], first["momentum"])) / scale
    energy = abs(last["energy"] - first["energy"]) / scale
    error = max(mass / 1e-13, momentum / 1e-11, energy / 1e-11)
    return _result("fluid_conservation", error, 1.0,
                   f"{len(record.dt_history)} steps: mass {mass:.2e}, momentum {momentum:.2e}, energy {energy:.2e}")


def check_uniform_fluid_fixed_point(ctx: SuiteContext) -> CheckResult:
    grid = Grid.uniform((8, 8), 1.0, "periodic")
    state = FieldState.uniform(grid, 1.3, [0.2, -0.1, 0.05], 0.8)
    final = run_fluid(state, ctx.table, ctx.constants, 0.05, output_every=1000).final
    error = max(float(np.max(np.abs(final.rho - state.rho))),
                float(np.max(np.abs(final.u - state.u))),
                float(np.max(np.abs(final.theta - state.theta))))
    return _result("uniform_fluid_fixed_point", error, 1e-12)


def check_dufour_flux(ctx: SuiteContext) -> CheckResult:
    slope, errors = dufour_flux_errors(ctx.constants, ctx.table)
    error = max(abs(slope - 2.0) / 0.2, errors[-1] / 1e-2)
    return _result("dufour_flux", error, 1.0,
                   f"slope {slope:.4f}, relative error {errors[-1]:.2e} on the finest grid")


def check_galilean_covariance(ctx: SuiteContext) -> CheckResult:
    slope, errors = frame_difference_slope(ctx.constants, ctx.table.scaled(10.0))
    return _result("galilean_covariance", abs(slope - 2.0), 0.3,
                   f"slope {slope:.4f}, finest frame difference {errors[-1]:.2e}")


def check_viscous_work_equivalence(ctx: SuiteContext) -> CheckResult:
    slope, errors = viscous_work_slope(ctx.constants, ctx.table)
    return _result("viscous_work_equivalence", abs(slope - 2.0), 0.3,
                   f"slope {slope:.4f}, finest discrepancy {errors[-1]:.2e}")


def check_lattice_bistochastic(ctx: SuiteContext, sites: int = 12) -> CheckResult:
    rng = np.random.default_rng(VERIFY_SEED + 2)
    k = ctx.constants
    bins = momentum_bins(6, 0.8)
    state = equilibrium_state(rng.uniform(0.1, 0.8, sites), rng.uniform(0.5, 1.5, sites), bins, k)
    kernel = build_hop_kernel(state)
    worst = float(np.max(np.abs(kernel.row_sums() - 1.0)))
    for x in range(sites):
        T = pair_operator(kernel, x, int(rng.integers(1, sites - 1)), 0.05, bins, k)
        worst = max(worst, float(np.max(np.abs(T.sum(axis=0) - 1.0))),
                    float(np.max(np.abs(T.sum(axis=1) - 1.0))))
    return _result("lattice_bistochastic", worst, 1e-12, f"{sites} random pairs")


def check_lattice_chain(ctx: SuiteContext, sites: int = 32, steps: int = 500) -> CheckResult:
    k = ctx.constants
    bins = momentum_bins(12, 0.6)
    state = equilibrium_state(np.full(sites, 0.4), 1.0 * gaussian_bump(sites, 0.1, 3.0), bins, k)
    start = state.totals(k)
    entropy = [state.entropy_total(k)]
    for _ in range(steps):
        state = chain_step(state, 0.2, k)
        entropy.append(state.entropy_total(k))
    end = state.totals(k)
    drift = max(abs(end[key] - start[key]) / max(abs(start[key]), 1.0) for key in start)
    decrease = max(0.0, -float(np.min(np.diff(entropy))))
    error = max(drift / (steps * 1e-12), decrease / (1e-12 * abs(entropy[0])))
    return _result("lattice_chain", error, 1.0,
                   f"{steps} steps: totals drift {drift:.2e}, largest entropy decrease {decrease:.2e}")


def check_lattice_fixed_point(ctx: SuiteContext, sites: int = 16) -> CheckResult:
    k = ctx.constants
    state = equilibrium_state(np.full(sites, 0.3), np.ones(sites), momentum_bins(10, 0.7), k)
    after = chain_step(state, 0.2, k)
    error = max(float(np.max(np.abs(after.N - state.N))), float(np.max(np.abs(after.p - state.p))))
    return _result("lattice_fixed_point", error, 1e-12)


def check_lattice_fluid_decay(ctx: SuiteContext) -> CheckResult:
    decay = lattice_fluid_decay(ctx.constants, ctx.table)
    predicted = decay.comparison.lattice_rate
    error = abs(math.log(decay.fluid_rate / decay.lattice_rate)) / math.log(2.0)
    return _result("lattice_fluid_decay", error, 1.0,
                   f"lattice {decay.lattice_rate:.4e}, predicted {predicted:.4e}, "
                   f"matched fluid {decay.fluid_rate:.4e}, unmatched lattice/fluid ratio "
                   f"{decay.comparison.ratio:.4g} at sigma {ctx.constants.sigma:g}")


CHECKS: dict[str, Callable[[SuiteContext], CheckResult]] = {
    "special_functions": check_special_functions,
    "fourier_positivity": check_fourier_positivity,
    "mean_free_time_routes": check_mean_free_time_routes,
    "free_time_normalization": check_free_time_normalization,
    "fundamental_relation_order": check_fundamental_relation_order,
    "stokes_relation": check_stokes_relation,
    "dufour_flux": check_dufour_flux,
    "fluid_conservation": check_fluid_conservation,
    "uniform_fluid_fixed_point": check_uniform_fluid_fixed_point,
    "galilean_covariance": check_galilean_covariance,
    "viscous_work_equivalence": check_viscous_work_equivalence,
    "lattice_bistochastic": check_lattice_bistochastic,
    "lattice_chain": check_lattice_chain,
    "lattice_fixed_point": check_lattice_fixed_point,
    "lattice_fluid_decay": check_lattice_fluid_decay,
}


def _run_check(name: str, ctx: SuiteContext) -> CheckResult:
    try:
        result = CHECKS[name](ctx)
    except MaxwellGasError as e:
        result = CheckResult(name=name, passed=False, value=math.nan, tolerance=math.nan,
                             detail=f"{type(e).__name__}: {e}")
    logger.info("check %s: %s", name, "passed" if result.passed else "FAILED")
    return result


def run_verification(constants: KineticConstants, table: TransportTable | None = None,
                     checks: list[str] | None = None, threads: int = 1) -> VerificationReport:
    """Run the named checks (all by default).

    Args:
        constants: constants the checks run with
        table: transport table; computed from constants when omitted
        checks: subset of CHECKS to run
        threads: worker threads

    Raises:
        ConfigError: if a requested check is unknown
    """
    names = list(CHECKS) if checks is None else list(checks)
    unknown = [n for n in names if n not in CHECKS]
    if unknown:
        raise ConfigError([f"verify.checks: unknown check '{n}'. Must be one of: {', '.join(CHECKS)}"
                           for n in unknown])
    if table is None:
        table = lambda_moments(constants)
    ctx = SuiteContext(constants=constants, table=table)
    with ThreadPoolExecutor(max_workers=threads) as pool:
        results = list(pool.map(lambda n: _run_check(n, ctx), names))
    return VerificationReport(checks=results)
