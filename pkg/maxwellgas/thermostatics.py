"""Equilibrium and local-equilibrium description of the hard-core lattice gas.

A site holds at most one particle. In local thermodynamic equilibrium the
single-site measure is fixed by three canonical fields: the inverse
temperature beta, the momentum-conjugate vector zeta and the activity xi.
This module converts between those and the mean fields (rho, u, theta),
evaluates partition functions and Maxwellians, and provides the equation
of state and entropy of the gas. The external potential is zero throughout.
"""

from dataclasses import dataclass, field, replace

import numpy as np
from scipy.special import entr

from .errors import DomainError


@dataclass(frozen=True)
class KineticConstants:
    """Microscopic constants of the gas.

    Attributes:
        m: particle mass
        k_B: Boltzmann constant
        sigma: collision cross-section (area)
        a: lattice spacing (length)
        epsilon: momentum-lattice spacing
        nondimensional: True when all of the above are 1
    """
    m: float
    k_B: float
    sigma: float
    a: float
    epsilon: float
    nondimensional: bool = False

    def __post_init__(self):
        bad = [name for name in ("m", "k_B", "sigma", "a", "epsilon")
               if not np.isfinite(getattr(self, name)) or getattr(self, name) <= 0]
        if bad:
            raise DomainError(f"Kinetic constants must be strictly positive: {', '.join(bad)}")

    @classmethod
    def nondimensional_units(cls, **overrides) -> "KineticConstants":
        """Unit system with m = k_B = sigma = a = epsilon = 1."""
        values = dict(m=1.0, k_B=1.0, sigma=1.0, a=1.0, epsilon=1.0)
        values.update(overrides)
        return cls(**values, nondimensional=not overrides)

    def with_sigma(self, sigma: float) -> "KineticConstants":
        return replace(self, sigma=sigma, nondimensional=self.nondimensional and sigma == 1.0)

    def thermal_speed(self, theta):
        """c = (k_B theta / m)^(1/2)."""
        theta = np.asarray(theta, dtype=float)
        if np.any(theta <= 0):
            raise DomainError(f"Temperature must be positive, got min {theta.min():.6g}")
        result = np.sqrt(self.k_B * theta / self.m)
        return float(result) if result.ndim == 0 else result


def _vector(value) -> np.ndarray:
    vec = np.asarray(value, dtype=float).reshape(-1)
    if vec.shape != (3,):
        raise DomainError(f"Expected a 3-vector, got shape {np.shape(value)}")
    return vec


@dataclass(frozen=True)
class FieldPoint:
    """Mean fields at one point (one lattice site).

    N, E and pi are per-site quantities: occupation probability, mean
    energy and mean momentum.
    """
    rho: float
    u: np.ndarray
    theta: float
    N: float
    E: float
    pi: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "u", _vector(self.u))
        object.__setattr__(self, "pi", _vector(self.pi))

    @classmethod
    def from_fields(cls, rho: float, u, theta: float, constants: KineticConstants) -> "FieldPoint":
        """Build the per-site means from rho, u and theta."""
        u = _vector(u)
        N = rho * constants.a ** 3 / constants.m
        E = N * (1.5 * constants.k_B * theta + 0.5 * constants.m * float(u @ u))
        pi = rho * u * constants.a ** 3
        return cls(rho=float(rho), u=u, theta=float(theta), N=float(N), E=float(E), pi=pi)

    def thermal_energy_per_mass(self, constants: KineticConstants) -> float:
        """e = 3 k_B theta / (2 m)."""
        return 1.5 * constants.k_B * self.theta / constants.m


@dataclass(frozen=True)
class LteParams:
    """Canonical fields of a locally thermalised site.

    Xi = 1 + exp(-xi) Z is the grand partition value and Z the single-site
    momentum sum. log_Z is kept alongside Z because Z overflows for SI
    constants with a fine momentum lattice.
    """
    beta: float
    zeta: np.ndarray
    xi: float
    Xi: float
    Z: float
    log_Z: float = field(default=float("nan"), repr=False)

    def __post_init__(self):
        object.__setattr__(self, "zeta", _vector(self.zeta))
        if not self.beta > 0:
            raise DomainError(f"beta must be positive, got {self.beta}")


def log_partition(beta: float, zeta, constants: KineticConstants) -> float:
    """log Z with Z = eps^-3 (2 pi m / beta)^(3/2) exp(m zeta.zeta / (2 beta))."""
    if not beta > 0:
        raise DomainError(f"beta must be positive, got {beta}")
    zeta = _vector(zeta)
    return (-3.0 * np.log(constants.epsilon)
            + 1.5 * np.log(2.0 * np.pi * constants.m / beta)
            + constants.m * float(zeta @ zeta) / (2.0 * beta))


def lte_from_fields(p: FieldPoint, k: KineticConstants) -> LteParams:
    """Canonical fields (beta, zeta, xi) of the thermalised site with means p.

    xi follows in closed form from exp(-xi) = N / (Z (1 - N)).

    Raises:
        DomainError: if rho or theta is not positive, or N >= 1
    """
    if not p.theta > 0:
        raise DomainError(f"Temperature must be positive, got {p.theta}")
    if not p.rho > 0:
        raise DomainError(f"Density must be positive, got {p.rho}")
    N = p.rho * k.a ** 3 / k.m
    if N >= 1.0:
        raise DomainError(f"Occupation N = {N:.6g} must be below one particle per site")

    beta = 1.0 / (k.k_B * p.theta)
    zeta = -beta * p.u
    log_Z = log_partition(beta, zeta, k)
    xi = log_Z + np.log1p(-N) - np.log(N)
    return LteParams(
        beta=beta,
        zeta=zeta,
        xi=float(xi),
        Xi=1.0 / (1.0 - N),
        Z=float(np.exp(log_Z)),
        log_Z=float(log_Z),
    )


def fields_from_lte(l: LteParams, k: KineticConstants) -> FieldPoint:
    """Mean fields from the logarithmic derivatives of Xi.

    N = -d log Xi / d xi, E = -d log Xi / d beta, Pi = -d log Xi / d zeta.
    """
    log_Z = log_partition(l.beta, l.zeta, k)
    activity = np.exp(log_Z - l.xi)
    N = activity / (1.0 + activity)
    E = N * (1.5 / l.beta + k.m * float(l.zeta @ l.zeta) / (2.0 * l.beta ** 2))
    pi = -k.m * N * l.zeta / l.beta
    return FieldPoint(
        rho=k.m * N / k.a ** 3,
        u=-l.zeta / l.beta,
        theta=1.0 / (k.k_B * l.beta),
        N=float(N),
        E=float(E),
        pi=pi,
    )


def maxwell_pdf(l: LteParams, momentum, k: KineticConstants):
    """Maxwellian momentum density Z^-1 exp(-beta k.k/(2m) - zeta.k) / eps^3.

    Written as the normalised Gaussian with mean -m zeta / beta and
    covariance (m / beta) I. momentum may carry leading batch axes; the
    last axis holds the three components.
    """
    momentum = np.asarray(momentum, dtype=float)
    mean = -k.m * l.zeta / l.beta
    peculiar = momentum - mean
    exponent = -l.beta * np.sum(peculiar ** 2, axis=-1) / (2.0 * k.m)
    return (l.beta / (2.0 * np.pi * k.m)) ** 1.5 * np.exp(exponent)


def equation_of_state(N: float, V: float, theta: float, k: KineticConstants) -> float:
    """Pressure of N hard-core particles in volume V.

    P = (k_B theta / V0) N log(1 + V0 / (V - V0)) with V0 = a^3 N.

    Raises:
        DomainError: if V <= V0 or theta <= 0
    """
    V0 = k.a ** 3 * N
    if V <= V0:
        raise DomainError(f"Volume {V:.6g} must exceed the excluded volume {V0:.6g}")
    if theta <= 0:
        raise DomainError(f"Temperature must be positive, got {theta}")
    return k.k_B * theta / V0 * N * np.log1p(V0 / (V - V0))


def van_der_waals_pressure(N: float, V: float, theta: float, k: KineticConstants,
                           A: float = 0.0) -> float:
    """Comparison gas (P + A/V^2)(V - V0) = N k_B theta, repulsive part only.

    Raises:
        DomainError: for A != 0 (the attractive term is not modelled)
    """
    if A != 0.0:
        raise DomainError(f"Only the repulsive van der Waals gas is supported (A = 0), got A = {A}")
    V0 = k.a ** 3 * N
    if V <= V0:
        raise DomainError(f"Volume {V:.6g} must exceed the excluded volume {V0:.6g}")
    return N * k.k_B * theta / (V - V0)


def pressure_from_partition(l: LteParams, k: KineticConstants) -> float:
    """P = k_B theta a^-3 log Xi."""
    return np.log(l.Xi) / (l.beta * k.a ** 3)


def entropy(distribution, constants: KineticConstants | None = None) -> float:
    """Entropy -k_B sum mu log mu of a normalised discrete distribution.

    Raises:
        DomainError: on negative probabilities or a distribution that does
            not sum to one
    """
    mu = np.asarray(distribution, dtype=float)
    if np.any(mu < 0):
        raise DomainError(f"Probabilities must be non-negative, got min {mu.min():.6g}")
    total = mu.sum()
    if abs(total - 1.0) > 1e-9:
        raise DomainError(f"Distribution must be normalised, sums to {total:.12g}")
    k_B = constants.k_B if constants is not None else 1.0
    return k_B * float(np.sum(entr(mu)))


def site_entropy(N, p, constants: KineticConstants | None = None):
    """Entropy of single-site measures mu(empty) = 1 - N, mu(k_b) = N p_b.

    N has shape (L,) and p shape (L, M); returns one value per site.
    """
    N = np.asarray(N, dtype=float)
    p = np.asarray(p, dtype=float)
    if np.any(N < 0) or np.any(N > 1) or np.any(p < 0):
        raise DomainError("Site occupations and bin probabilities must lie in [0, 1]")
    k_B = constants.k_B if constants is not None else 1.0
    return k_B * (entr(1.0 - N) + np.sum(entr(N[..., None] * p), axis=-1))


def lte_site_entropy(l: LteParams, k: KineticConstants) -> float:
    """Entropy of a thermalised site with the momentum sum replaced by its integral."""
    point = fields_from_lte(l, k)
    N = point.N
    momentum_part = 1.5 * (1.0 + np.log(2.0 * np.pi * k.m / l.beta)) - 3.0 * np.log(k.epsilon)
    return k.k_B * (float(entr(1.0 - N) + entr(N)) + N * momentum_part)


def grand_potential_residual(l: LteParams, k: KineticConstants) -> float:
    """Residual of theta S = E + k_B theta xi N - u.Pi + k_B theta log Xi per site."""
    point = fields_from_lte(l, k)
    S = lte_site_entropy(l, k)
    rhs = (point.E
           + k.k_B * point.theta * l.xi * point.N
           - float(point.u @ point.pi)
           + k.k_B * point.theta * np.log(l.Xi))
    return point.theta * S - rhs
