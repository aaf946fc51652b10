"""Mean-field Markov chain of the hard-core lattice gas on a ring.

Each site holds at most one particle, carrying one of M symmetric momentum
bins. A particle flies straight over empty sites and thermalises at the
last empty site before an occupied one. The mean-field chain tracks per
site the occupation N_x and the bin distribution p_x; every step moves
populations between site pairs through a symmetric swap, then
re-thermalises each site to the maximum-entropy distribution with the same
mass, momentum and energy.
"""

from dataclasses import dataclass, field, replace
from typing import NamedTuple

import numpy as np
from scipy.special import logsumexp

from .errors import ConvergenceError, DomainError, PositivityError
from .log_config import get_logger
from .thermostatics import KineticConstants, site_entropy
from .transport import TransportTable

logger = get_logger(__name__)

DEFAULT_BINS = 16
DEFAULT_NEWTON_TOL = 1e-12
DEFAULT_MAX_NEWTON = 200


def momentum_bins(M: int, epsilon: float) -> np.ndarray:
    """Symmetric momentum lattice k_b = epsilon (b - (M - 1) / 2)."""
    if M < 2:
        raise DomainError(f"Need at least 2 momentum bins, got {M}")
    return epsilon * (np.arange(M) - 0.5 * (M - 1))


@dataclass
class LatticeGasState:
    """Occupation N (L,) and bin distribution p (L, M) on a ring of L sites."""
    N: np.ndarray
    p: np.ndarray
    bins: np.ndarray
    t: float = 0.0

    def __post_init__(self):
        self.N = np.asarray(self.N, dtype=float)
        self.p = np.asarray(self.p, dtype=float)
        self.bins = np.asarray(self.bins, dtype=float)
        if self.N.ndim != 1 or self.p.shape != (self.N.size, self.bins.size):
            raise DomainError(f"Expected N (L,) and p (L, {self.bins.size}), got {self.N.shape} and {self.p.shape}")
        if np.any(self.N <= 0) or np.any(self.N >= 1):
            raise DomainError("Occupations must lie strictly in (0, 1)")
        if np.any(self.p < 0):
            raise DomainError("Bin probabilities must be non-negative")
        if np.max(np.abs(self.p.sum(axis=1) - 1.0)) > 1e-10:
            raise DomainError("Bin probabilities must sum to one at every site")

    @property
    def sites(self) -> int:
        return self.N.size

    def populations(self) -> np.ndarray:
        return self.N[:, None] * self.p

    def site_moments(self, constants: KineticConstants):
        """Per-site particle number, momentum and kinetic energy."""
        n = self.populations()
        return n.sum(axis=1), n @ self.bins, n @ (self.bins ** 2) / (2.0 * constants.m)

    def totals(self, constants: KineticConstants) -> dict:
        N, Pi, E = self.site_moments(constants)
        return {"mass": float(N.sum()), "momentum": float(Pi.sum()), "energy": float(E.sum())}

    def fields(self, constants: KineticConstants):
        """rho, u and the one-dimensional kinetic temperature per site."""
        mean = self.p @ self.bins
        second = self.p @ self.bins ** 2
        rho = constants.m * self.N / constants.a ** 3
        u = mean / constants.m
        theta = (second - mean ** 2) / (constants.m * constants.k_B)
        return rho, u, theta

    def entropy_total(self, constants: KineticConstants) -> float:
        return float(np.sum(site_entropy(self.N, self.p, constants)))


def thermalise(N, Pi, E, bins, constants: KineticConstants, tol: float = DEFAULT_NEWTON_TOL,
               max_iter: int = DEFAULT_MAX_NEWTON) -> np.ndarray:
    """Maximum-entropy bin distributions with the given per-site moments.

    p_b is proportional to exp(-beta k_b^2 / (2m) - zeta k_b); (beta, zeta)
    solve the moment equations by damped Newton on the convex dual, all
    sites at once.

    Raises:
        DomainError: if a site has non-positive thermal energy or moments the bins
            cannot carry
        ConvergenceError: if Newton does not converge in max_iter iterations
    """
    N = np.atleast_1d(np.asarray(N, dtype=float))
    Pi = np.atleast_1d(np.asarray(Pi, dtype=float))
    E = np.atleast_1d(np.asarray(E, dtype=float))
    bins = np.asarray(bins, dtype=float)

    scale = np.max(np.abs(bins))
    features = np.stack([bins / scale, (bins / scale) ** 2])  # (2, M)
    target = np.stack([Pi / N / scale, 2.0 * constants.m * E / N / scale ** 2], axis=1)  # (L, 2)
    variance = target[:, 1] - target[:, 0] ** 2
    if np.any(variance <= 0):
        site = int(np.argmax(variance <= 0))
        raise DomainError(f"Degenerate moments at site {site}: thermal energy must be positive")
    if np.any(np.abs(target[:, 0]) >= 1.0):
        site = int(np.argmax(np.abs(target[:, 0]) >= 1.0))
        raise DomainError(f"Mean momentum at site {site} lies outside the momentum bins")
    # The moments must lie strictly inside the hull of the points (k, k^2).
    ordered = np.sort(bins / scale)
    floor = np.interp(target[:, 0], ordered, ordered ** 2)
    infeasible = (target[:, 1] >= 1.0) | (target[:, 1] <= floor)
    if np.any(infeasible):
        site = int(np.argmax(infeasible))
        raise DomainError(
            f"Thermal energy at site {site} cannot be represented on the momentum bins "
            f"(second moment {target[site, 1] * scale ** 2:.6g}, largest bin {scale:.6g})"
        )

    # Natural parameters of exp(eta . features); the Gaussian fit is the start.
    eta = np.stack([target[:, 0] / variance, -0.5 / variance], axis=1)

    def dual(eta):
        return logsumexp(eta @ features, axis=1) - np.sum(eta * target, axis=1)

    tolerance = tol * np.stack([np.sqrt(variance), target[:, 1]], axis=1)
    for iteration in range(max_iter + 1):
        logits = eta @ features
        p = np.exp(logits - logsumexp(logits, axis=1, keepdims=True))
        mean = p @ features.T
        residual = mean - target
        if np.all(np.abs(residual) <= tolerance):
            break
        if iteration == max_iter:
            raise ConvergenceError(
                f"Moment matching did not converge in {max_iter} iterations "
                f"(residual {np.max(np.abs(residual)):.3e})"
            )
        centred = features[None, :, :] - mean[:, :, None]  # (L, 2, M)
        hessian = np.einsum("lim,ljm,lm->lij", centred, centred, p)
        direction = -np.linalg.solve(hessian, residual[..., None])[..., 0]

        # Backtracking keeps each site's dual decreasing.
        current = dual(eta)
        slope = np.sum(residual * direction, axis=1)
        length = np.ones(len(eta))
        for _ in range(60):
            trial = dual(eta + length[:, None] * direction)
            failing = trial > current + 1e-4 * length * slope + 1e-15 * np.abs(current)
            if not np.any(failing):
                break
            length = np.where(failing, 0.5 * length, length)
        eta = eta + length[:, None] * direction

    logger.debug("thermalise: %d Newton iterations over %d sites", iteration, len(eta))
    return p


@dataclass
class HopKernel:
    """Hop-length probabilities on the ring.

    hop[x, d, s] is the probability that a particle leaving x in direction
    d (0: +1, 1: -1) finds s empty sites and then an occupied one, for
    s = 0 .. L - 2. remainder[x, d] is the probability that every other
    site is empty, in which case the particle stays put.
    """
    hop: np.ndarray
    remainder: np.ndarray

    @property
    def sites(self) -> int:
        return self.hop.shape[0]

    def row_sums(self) -> np.ndarray:
        return self.hop.sum(axis=-1) + self.remainder

    def swap_rates(self, bins, constants: KineticConstants) -> np.ndarray:
        """Rate per unit time of the swap between x and x + s, per bin.

        Returns an (L, M, L - 2) array for s = 1 .. L - 2. A right-mover
        reaches x + s from x with rate |k| P(x, +, s) / (m a s) and a
        left-mover reaches x from x + s with rate |k| P(x + s, -, s) / (m a s);
        both bins of a speed share the mean of the two.
        """
        L = self.sites
        s = np.arange(1, L - 1)
        y = (np.arange(L)[:, None] + s[None, :]) % L
        forward = self.hop[:, 0, 1:]
        backward = self.hop[y, 1, s[None, :]]
        geometric = 0.5 * (forward + backward) / (constants.a * s[None, :])  # (L, S)
        speed = np.abs(np.asarray(bins, dtype=float)) / constants.m
        return speed[None, :, None] * geometric[:, None, :]


def build_hop_kernel(state: LatticeGasState) -> HopKernel:
    """Hop probabilities prod_{j=1..s} (1 - N_{x+j e}) N_{x+(s+1)e} on the ring."""
    N = state.N
    L = N.size
    offsets = np.arange(1, L)
    hop = np.empty((L, 2, L - 1))
    remainder = np.empty((L, 2))
    for d, direction in enumerate((1, -1)):
        ahead = N[(np.arange(L)[:, None] + direction * offsets[None, :]) % L]  # (L, L-1)
        empty_run = np.concatenate([np.ones((L, 1)), np.cumprod(1.0 - ahead, axis=1)], axis=1)
        hop[:, d, :] = empty_run[:, :-1] * ahead
        remainder[:, d] = empty_run[:, -1]
    return HopKernel(hop=hop, remainder=remainder)


def pair_operator(kernel: HopKernel, x: int, s: int, dt: float, bins,
                  constants: KineticConstants) -> np.ndarray:
    """Transition matrix on the two-site space of x and y = x + s.

    States are (occupant of x, occupant of y) with 0 for a hole and b + 1
    for a particle in bin b, flattened row-major. Each bin contributes the
    mixture (1 - tau) I + tau Pi of the identity and the swap Pi of
    (particle at x, hole at y) with (hole at x, particle at y). Rows are
    the source state.
    """
    bins = np.asarray(bins, dtype=float)
    L = kernel.sites
    if not 1 <= s <= L - 2:
        raise DomainError(f"Hop length must lie in [1, {L - 2}], got {s}")
    tau = dt * kernel.swap_rates(bins, constants)[x % L, :, s - 1]
    size = bins.size + 1
    T = np.eye(size * size)
    for b, weight in enumerate(tau):
        here, there = (b + 1) * size, b + 1
        T[here, here] -= weight
        T[there, there] -= weight
        T[here, there] += weight
        T[there, here] += weight
    return T


def _pair_flows(state: LatticeGasState, dt: float, constants: KineticConstants):
    L = state.sites
    kernel = build_hop_kernel(state)
    tau = dt * kernel.swap_rates(state.bins, constants)  # (L, M, S)
    s = np.arange(1, L - 1)
    y = (np.arange(L)[:, None] + s[None, :]) % L  # (L, S)

    # A population can be drawn down by every pair it belongs to.
    M = state.bins.size
    flat = (y[:, None, :] * M + np.arange(M)[None, :, None]).ravel()
    incident = tau.sum(axis=2) + np.bincount(flat, weights=tau.ravel(), minlength=L * M).reshape(L, M)
    if incident.max() > 1.0:
        raise DomainError(
            f"Time step {dt:.6g} exceeds the hop-rate bound (incident swap weight {incident.max():.4f} > 1)"
        )

    n = state.populations()
    n_y = np.transpose(n[y], (0, 2, 1))  # (L, M, S)
    empty_y = 1.0 - state.N[y]  # (L, S)
    flow = tau * (n[:, :, None] * empty_y[:, None, :] - (1.0 - state.N)[:, None, None] * n_y)
    return n, flow, flat


def chain_step(state: LatticeGasState, dt: float, constants: KineticConstants,
               tol: float = DEFAULT_NEWTON_TOL, max_newton: int = DEFAULT_MAX_NEWTON) -> LatticeGasState:
    """One hop-and-thermalise cycle of the mean-field chain.

    Raises:
        DomainError: if dt exceeds the hop-rate bound
        PositivityError: if a population or occupation leaves its range
    """
    L, M = state.sites, state.bins.size
    n, flow, flat = _pair_flows(state, dt, constants)
    received = np.bincount(flat, weights=flow.ravel(), minlength=L * M).reshape(L, M)
    n_new = n - flow.sum(axis=2) + received

    t_new = state.t + dt
    if np.any(n_new < 0):
        index = np.unravel_index(np.argmin(n_new), n_new.shape)
        raise PositivityError("population", index, n_new[index], t_new)
    N_new = n_new.sum(axis=1)
    if np.any(N_new <= 0):
        x = int(np.argmin(N_new))
        raise PositivityError("occupation", (x,), N_new[x], t_new)
    if np.any(N_new >= 1):
        x = int(np.argmax(N_new))
        raise PositivityError("vacancy", (x,), 1.0 - N_new[x], t_new)

    Pi = n_new @ state.bins
    E = n_new @ state.bins ** 2 / (2.0 * constants.m)
    p_new = thermalise(N_new, Pi, E, state.bins, constants, tol, max_newton)
    return LatticeGasState(N=N_new, p=p_new, bins=state.bins, t=t_new)


def equilibrium_state(occupation, theta, bins, constants: KineticConstants,
                      u=0.0, t: float = 0.0) -> LatticeGasState:
    """Thermalised state with per-site occupation, temperature and velocity."""
    occupation = np.atleast_1d(np.asarray(occupation, dtype=float))
    theta = np.broadcast_to(np.asarray(theta, dtype=float), occupation.shape)
    u = np.broadcast_to(np.asarray(u, dtype=float), occupation.shape)
    Pi = occupation * constants.m * u
    E = occupation * (0.5 * constants.k_B * theta + 0.5 * constants.m * u ** 2)
    p = thermalise(occupation, Pi, E, bins, constants)
    return LatticeGasState(N=occupation, p=p, bins=np.asarray(bins, dtype=float), t=t)


@dataclass
class RelaxationSeries:
    """Per-output profiles of a lattice run."""
    times: list[float] = field(default_factory=list)
    occupation: list[np.ndarray] = field(default_factory=list)
    u: list[np.ndarray] = field(default_factory=list)
    theta: list[np.ndarray] = field(default_factory=list)
    entropy: list[float] = field(default_factory=list)
    totals: list[dict] = field(default_factory=list)

    def record(self, state: LatticeGasState, constants: KineticConstants):
        _, u, theta = state.fields(constants)
        self.times.append(state.t)
        self.occupation.append(state.N.copy())
        self.u.append(u)
        self.theta.append(theta)
        self.entropy.append(state.entropy_total(constants))
        self.totals.append(state.totals(constants))


def gaussian_bump(sites: int, amplitude: float, width: float, center: float | None = None) -> np.ndarray:
    """1 + amplitude exp(-(x - center)^2 / (2 width^2)) with periodic distance."""
    x = np.arange(sites, dtype=float)
    center = 0.5 * sites if center is None else center
    distance = (x - center + 0.5 * sites) % sites - 0.5 * sites
    return 1.0 + amplitude * np.exp(-0.5 * (distance / width) ** 2)


def relax_experiment(occupation: float, theta: float, amplitude: float, width: float,
                     sites: int, bins, constants: KineticConstants, dt: float, steps: int,
                     output_every: int = 1, progress=None, tol: float = DEFAULT_NEWTON_TOL,
                     max_newton: int = DEFAULT_MAX_NEWTON) -> RelaxationSeries:
    """Relax a Gaussian temperature bump on a uniformly occupied ring.

    Raises:
        DomainError: if the bump exceeds 10% of the background
    """
    if abs(amplitude) > 0.1:
        raise DomainError(f"Perturbation amplitude must not exceed 10% of the background, got {amplitude}")
    profile = theta * gaussian_bump(sites, amplitude, width)
    state = equilibrium_state(np.full(sites, occupation), profile, bins, constants)
    series = RelaxationSeries()
    series.record(state, constants)
    iterator = range(1, steps + 1) if progress is None else progress(range(1, steps + 1))
    for i in iterator:
        state = chain_step(state, dt, constants, tol, max_newton)
        if i % output_every == 0 or i == steps:
            series.record(state, constants)
    logger.info("Lattice relaxation finished: %d steps to t=%.6g", steps, state.t)
    return series


def fit_decay_rate(times, profiles, fraction: float = 0.5) -> float:
    """Decay rate of the longest Fourier mode over the last fraction of a run."""
    times = np.asarray(times, dtype=float)
    amplitude = np.array([abs(np.fft.rfft(np.asarray(p) - np.mean(p))[1]) for p in profiles])
    keep = times >= times[0] + (1.0 - fraction) * (times[-1] - times[0])
    slope = np.polyfit(times[keep], np.log(amplitude[keep]), 1)[0]
    return float(-slope)


def predicted_decay_rate(occupation: float, theta: float, wavenumber: float,
                         constants: KineticConstants) -> float:
    """Linearised decay rate of the slow thermal mode of the mean-field chain.

    Per bin the swap dynamics diffuses with D(k) = |k| a <s> / m, where
    <s> = (1 - n) / n is the mean free run on a uniform lattice. Linearising
    mass and energy about a uniform thermalised state couples the density
    and temperature modes through the matrix
        q^2 a <s> <|k|> / m * [[1, n (1 - n) / (2 theta)], [theta / n, 5 (1 - n) / 2]],
    whose smaller eigenvalue is returned.
    """
    n = occupation
    mean_speed = np.sqrt(2.0 * constants.m * constants.k_B * theta / np.pi)
    prefactor = wavenumber ** 2 * constants.a * (1.0 - n) / n * mean_speed / constants.m
    matrix = prefactor * np.array([[1.0, n * (1.0 - n) / (2.0 * theta)],
                                   [theta / n, 2.5 * (1.0 - n)]])
    return float(np.min(np.linalg.eigvals(matrix).real))


def fluid_thermal_decay_rate(table: TransportTable, rho: float, theta: float, wavenumber: float,
                             constants: KineticConstants) -> float:
    """Isobaric entropy-mode rate q^2 (lambda_fourier - lambda_dufour) theta^(1/2) / (rho c_p)."""
    c_p = 2.5 * constants.k_B / constants.m
    return wavenumber ** 2 * (table.lambda_fourier - table.lambda_dufour) * np.sqrt(theta) / (rho * c_p)


def matched_cross_section(table: TransportTable, occupation: float, theta: float,
                          wavenumber: float, constants: KineticConstants) -> float:
    """Cross-section at which the fluid's thermal mode decays at the lattice rate.

    table is the transport table at constants.sigma; the coefficients scale
    as 1/sigma.
    """
    rho = constants.m * occupation / constants.a ** 3
    fluid = fluid_thermal_decay_rate(table, rho, theta, wavenumber, constants)
    lattice = predicted_decay_rate(occupation, theta, wavenumber, constants)
    return constants.sigma * fluid / lattice


class DecayComparison(NamedTuple):
    """Thermal-mode decay rates of the chain and of the fluid at the configured sigma."""
    lattice_rate: float
    fluid_rate: float
    matched_sigma: float

    @property
    def ratio(self) -> float:
        return self.lattice_rate / self.fluid_rate

    def to_dict(self) -> dict:
        return {**self._asdict(), "ratio": self.ratio}


def compare_decay_rates(table: TransportTable, occupation: float, theta: float,
                        wavenumber: float, constants: KineticConstants) -> DecayComparison:
    """Linearised chain rate against the fluid rate without any matching.

    matched_sigma is reported alongside; the ratio is the comparison that
    does not depend on it.
    """
    rho = constants.m * occupation / constants.a ** 3
    return DecayComparison(
        lattice_rate=predicted_decay_rate(occupation, theta, wavenumber, constants),
        fluid_rate=fluid_thermal_decay_rate(table, rho, theta, wavenumber, constants),
        matched_sigma=matched_cross_section(table, occupation, theta, wavenumber, constants),
    )


def sample_configuration(state: LatticeGasState, rng: np.random.Generator) -> np.ndarray:
    """Draw one configuration: -1 for a hole, otherwise the bin index."""
    occupied = rng.random(state.sites) < state.N
    cumulative = np.cumsum(state.p, axis=1)
    draws = rng.random(state.sites)[:, None]
    chosen = np.minimum(np.sum(cumulative < draws, axis=1), state.bins.size - 1)
    return np.where(occupied, chosen, -1)


def stochastic_step(config: np.ndarray, bins, dt: float, constants: KineticConstants,
                    rng: np.random.Generator) -> np.ndarray:
    """One sweep of single-particle flights in random order.

    A particle whose run of empty sites ahead has length s > 0 flies to the
    last empty site with probability dt |k| / (m a s) and keeps its
    momentum, so particle number, momentum and energy are conserved
    exactly.
    """
    config = config.copy()
    bins = np.asarray(bins, dtype=float)
    L = config.size
    for x in rng.permutation(np.flatnonzero(config >= 0)):
        b = config[x]
        direction = 1 if bins[b] > 0 else -1
        if bins[b] == 0:
            continue
        run = 0
        while run < L - 1 and config[(x + direction * (run + 1)) % L] < 0:
            run += 1
        if run == 0 or run == L - 1:
            continue
        if rng.random() < min(1.0, dt * abs(bins[b]) / (constants.m * constants.a * run)):
            config[(x + direction * run) % L] = b
            config[x] = -1
    return config


def ensemble_state(configs: list[np.ndarray], bins, t: float = 0.0, floor: float = 1e-9) -> LatticeGasState:
    """Mean-field state estimated from an ensemble of configurations.

    Empirical occupations are clipped into (floor, 1 - floor); empty sites
    get a uniform bin distribution.
    """
    bins = np.asarray(bins, dtype=float)
    counts = np.zeros((configs[0].size, bins.size))
    for config in configs:
        occupied = config >= 0
        np.add.at(counts, (np.flatnonzero(occupied), config[occupied]), 1.0)
    N = np.clip(counts.sum(axis=1) / len(configs), floor, 1.0 - floor)
    totals = counts.sum(axis=1, keepdims=True)
    p = np.where(totals > 0, counts / np.maximum(totals, 1.0), 1.0 / bins.size)
    return LatticeGasState(N=N, p=p, bins=bins, t=t)
