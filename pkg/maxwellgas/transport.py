"""Transport coefficients from the collision function F.

The special functions here are one-dimensional integrals over the peculiar
speed. Everything is evaluated with scipy's adaptive Gauss-Kronrod
quadrature; a failure to reach the requested tolerance is promoted to
QuadratureError instead of being returned as a silently inaccurate number.
"""

import math
from dataclasses import asdict, dataclass, replace
from typing import NamedTuple

import numpy as np
from scipy import integrate
from scipy.special import erf

from .errors import DomainError, QuadratureError
from .log_config import get_logger
from .thermostatics import FieldPoint, KineticConstants

logger = get_logger(__name__)

DEFAULT_QUAD_TOL = 1e-10
DEFAULT_KAPPA_MAX = 12.0

# Below this the 0/0 form of F is replaced by its series.
SMALL_KAPPA = 1e-3

# Gaussian tails beyond this many standard deviations are below 1e-40.
_TAIL = 14.0


def _quad(func, a: float, b: float, tol: float, points=None) -> float:
    """scipy.integrate.quad with non-convergence raised as QuadratureError."""
    result = integrate.quad(
        func, a, b,
        epsabs=tol * 1e-4, epsrel=tol,
        limit=200, points=points, full_output=1,
    )
    if len(result) > 3:
        raise QuadratureError(f"Quadrature on [{a:.6g}, {b:.6g}] did not converge: {result[3]}")
    value, abserr = result[0], result[1]
    logger.debug("quad [%g, %g] = %.17g +/- %.2e", a, b, value, abserr)
    return value


def bessel_like_In(n: int, kappa: float, quad_tol: float = DEFAULT_QUAD_TOL) -> float:
    """I_n(kappa) = integral over q >= 0 of exp(-(q + kappa)^2 / 2) q^n.

    kappa may be negative.
    """
    if n not in (0, 1, 2, 3):
        raise DomainError(f"Unknown order: {n}. Must be one of: (0, 1, 2, 3)")
    kappa = float(kappa)
    upper = max(0.0, -kappa) + _TAIL
    points = [-kappa] if 0.0 < -kappa < upper else None
    return _quad(lambda q: q ** n * math.exp(-0.5 * (q + kappa) ** 2), 0.0, upper, quad_tol, points)


def _sinh_moment(kappa: float, quad_tol: float) -> float:
    """I_2(-kappa) - I_2(kappa) as one cancellation-free integral.

    The integrand q^2 exp(-(q - kappa)^2 / 2) (1 - exp(-2 q kappa)) is the
    sinh form shifted onto its Gaussian peak, with expm1 keeping the
    bracket accurate for small q kappa.
    """
    upper = kappa + _TAIL
    return _quad(
        lambda q: q * q * math.exp(-0.5 * (q - kappa) ** 2) * -math.expm1(-2.0 * q * kappa),
        0.0, upper, quad_tol, points=[kappa] if kappa > 0 else None,
    )


def collision_F(kappa: float, quad_tol: float = DEFAULT_QUAD_TOL) -> float:
    """F(kappa) = kappa / (2 integral_0^inf q^2 exp(-q^2/2) sinh(q kappa) dq).

    Continuous at zero with F(0) = 1/4; below SMALL_KAPPA the series
    1 / (4 + 8 kappa^2 / 3) is used.
    """
    kappa = float(kappa)
    if kappa < 0:
        raise DomainError(f"kappa must be non-negative, got {kappa}")
    if kappa < SMALL_KAPPA:
        return 1.0 / (4.0 + 8.0 * kappa * kappa / 3.0)
    return kappa * math.exp(-0.5 * kappa * kappa) / _sinh_moment(kappa, quad_tol)


def relative_speed_factor(kappa):
    """Mean of |kappa e - q| over a standard normal q in three dimensions.

    Closed form sqrt(2/pi) exp(-kappa^2/2) + (kappa + 1/kappa) erf(kappa/sqrt 2),
    with the series sqrt(8/pi)(1 + kappa^2/6) near zero. It ties the
    collision rate to F through F = exp(-kappa^2/2) / (sqrt(2 pi) G).
    """
    kappa = np.asarray(kappa, dtype=float)
    small = kappa < 1e-4
    safe = np.where(small, 1.0, kappa)
    closed = (np.sqrt(2.0 / np.pi) * np.exp(-0.5 * safe ** 2)
              + (safe + 1.0 / safe) * erf(safe / np.sqrt(2.0)))
    series = np.sqrt(8.0 / np.pi) * (1.0 + kappa ** 2 / 6.0)
    result = np.where(small, series, closed)
    return float(result) if result.ndim == 0 else result


@dataclass(frozen=True)
class TransportTable:
    """Dimensionless moments and the assembled fluid coefficients.

    lambda_shear multiplies theta^(1/2) times the traceless strain rate,
    lambda_fourier multiplies -theta^(1/2) grad theta and lambda_dufour
    multiplies -theta^(3/2) grad log rho in the heat flux.
    """
    mu1: float
    mu2: float
    mu3: float
    lambda1: float
    lambda2: float
    lambda3: float
    lambda_shear: float
    lambda_fourier: float
    lambda_dufour: float
    quad_tol: float
    kappa_max: float

    @classmethod
    def from_moments(cls, mu1: float, mu2: float, mu3: float, k: KineticConstants,
                     quad_tol: float = DEFAULT_QUAD_TOL,
                     kappa_max: float = DEFAULT_KAPPA_MAX) -> "TransportTable":
        scale = (k.m / k.sigma) * math.sqrt(k.m / k.k_B)
        lambda1, lambda2, lambda3 = scale * mu1, scale * mu2, scale * mu3
        return cls(
            mu1=mu1, mu2=mu2, mu3=mu3,
            lambda1=lambda1, lambda2=lambda2, lambda3=lambda3,
            lambda_shear=k.k_B * lambda2 / (3.0 * k.m),
            lambda_fourier=(k.k_B ** 2 / k.m) * (lambda3 / 4.0 - 5.0 * lambda2 / 4.0 + 5.0 * lambda1 / 2.0),
            lambda_dufour=(5.0 * k.k_B ** 2 / (2.0 * k.m)) * (lambda1 - lambda2 / 3.0),
            quad_tol=quad_tol,
            kappa_max=kappa_max,
        )

    def to_dict(self) -> dict:
        return asdict(self)

    @classmethod
    def from_dict(cls, data: dict) -> "TransportTable":
        return cls(**{name: float(data[name]) for name in cls.__dataclass_fields__})

    def scaled(self, sigma_factor: float) -> "TransportTable":
        """Table for the cross-section sigma * sigma_factor (lambda_n scale as 1/sigma)."""
        if not sigma_factor > 0:
            raise DomainError(f"sigma_factor must be positive, got {sigma_factor}")
        inv = 1.0 / sigma_factor
        return replace(
            self,
            lambda1=self.lambda1 * inv, lambda2=self.lambda2 * inv, lambda3=self.lambda3 * inv,
            lambda_shear=self.lambda_shear * inv,
            lambda_fourier=self.lambda_fourier * inv,
            lambda_dufour=self.lambda_dufour * inv,
        )

    def with_overrides(self, viscosity: float | None = None, conductivity: float | None = None,
                       dufour: float | None = None) -> "TransportTable":
        """Replace the assembled fluid coefficients, keeping the moments."""
        changes = {}
        if viscosity is not None:
            changes["lambda_shear"] = viscosity
        if conductivity is not None:
            changes["lambda_fourier"] = conductivity
        if dufour is not None:
            changes["lambda_dufour"] = dufour
        return replace(self, **changes)


def lambda_moments(k: KineticConstants, quad_tol: float = DEFAULT_QUAD_TOL,
                   kappa_max: float = DEFAULT_KAPPA_MAX) -> TransportTable:
    """Integrate mu_n = integral_0^kappa_max kappa^(2n) F(kappa) for n = 1, 2, 3.

    The range is split into unit panels integrated independently, so two
    truncation bounds share every panel they have in common.

    Raises:
        DomainError: if quad_tol <= 0 or kappa_max < 10
        QuadratureError: if a panel fails to converge
    """
    if not quad_tol > 0:
        raise DomainError(f"quad_tol must be positive, got {quad_tol}")
    if kappa_max < 10:
        raise DomainError(f"kappa_max must be at least 10, got {kappa_max}")

    def integrand(kappa):
        f = collision_F(kappa, quad_tol * 1e-2)
        k2 = kappa * kappa
        return np.array([k2 * f, k2 * k2 * f, k2 * k2 * k2 * f])

    edges = list(np.arange(0.0, float(kappa_max), 1.0)) + [float(kappa_max)]
    moments = np.zeros(3)
    for lo, hi in zip(edges[:-1], edges[1:]):
        if hi <= lo:
            continue
        value, err, info = integrate.quad_vec(
            integrand, lo, hi, epsabs=quad_tol * 1e-2, epsrel=quad_tol,
            norm="max", full_output=True,
        )
        if not info.success:
            raise QuadratureError(f"Moment integrals on [{lo:g}, {hi:g}] did not converge (error {err:.2e})")
        moments += value

    mu1, mu2, mu3 = (float(v) for v in moments)
    logger.info("Transport moments: mu1=%.12g mu2=%.12g mu3=%.12g", mu1, mu2, mu3)
    return TransportTable.from_moments(mu1, mu2, mu3, k, quad_tol=quad_tol, kappa_max=float(kappa_max))


class PositivityCertificate(NamedTuple):
    """Minimum of 5/2 - 5 kappa^2/4 + kappa^4/4 over kappa >= 0."""
    positive: bool
    minimum: float
    argmin: float


FOURIER_POLYNOMIAL = np.polynomial.Polynomial([2.5, 0.0, -1.25, 0.0, 0.25])


def fourier_positivity_certificate() -> PositivityCertificate:
    """Certify the polynomial weight in lambda_fourier is positive for kappa >= 0."""
    stationary = FOURIER_POLYNOMIAL.deriv().roots()
    candidates = [0.0] + [float(r.real) for r in np.atleast_1d(stationary)
                          if abs(r.imag) < 1e-12 and r.real >= 0]
    values = [float(FOURIER_POLYNOMIAL(c)) for c in candidates]
    i = int(np.argmin(values))
    return PositivityCertificate(positive=values[i] > 0, minimum=values[i], argmin=candidates[i])


def peculiar_kappa(fields: FieldPoint, momentum, k: KineticConstants) -> float:
    """|k/m - u| / c."""
    momentum = np.asarray(momentum, dtype=float)
    c = k.thermal_speed(fields.theta)
    return float(np.linalg.norm(momentum / k.m - fields.u) / c)


def _check_fields(fields: FieldPoint):
    if not fields.rho > 0:
        raise DomainError(f"Density must be positive, got {fields.rho}")
    if not fields.theta > 0:
        raise DomainError(f"Temperature must be positive, got {fields.theta}")


def mean_free_time(fields: FieldPoint, momentum, k: KineticConstants,
                   quad_tol: float = DEFAULT_QUAD_TOL) -> float:
    """Mean free time from rho p(k) t_l = beta^2 F(kappa) / (2 pi sigma).

    Raises:
        DomainError: if rho or theta is not positive
    """
    _check_fields(fields)
    beta = 1.0 / (k.k_B * fields.theta)
    kappa = peculiar_kappa(fields, momentum, k)
    density = (beta / (2.0 * np.pi * k.m)) ** 1.5 * math.exp(-0.5 * kappa * kappa)
    return beta ** 2 * collision_F(kappa, quad_tol) / (2.0 * np.pi * k.sigma * fields.rho * density)


def mean_free_time_direct(fields: FieldPoint, momentum, k: KineticConstants,
                          quad_tol: float = DEFAULT_QUAD_TOL) -> float:
    """Mean free time m^2 / (sigma rho integral |k - q| p(q) d^3q) by 3-D quadrature.

    The q integral is done in spherical coordinates about the bulk momentum
    m u, with the polar axis along the peculiar direction, so the remaining
    azimuth integral is exact. The radial range is split at kappa, where the
    integrand has its kink.
    """
    _check_fields(fields)
    kappa = peculiar_kappa(fields, momentum, k)
    c = k.thermal_speed(fields.theta)

    def integrand(cos_polar, r):
        distance = math.sqrt(max(kappa * kappa + r * r - 2.0 * kappa * r * cos_polar, 0.0))
        return 2.0 * math.pi * r * r * distance * math.exp(-0.5 * r * r)

    norm = (2.0 * math.pi) ** -1.5
    total = 0.0
    edges = [0.0, kappa, kappa + _TAIL] if kappa > 0 else [0.0, _TAIL]
    for lo, hi in zip(edges[:-1], edges[1:]):
        value, err = integrate.dblquad(integrand, lo, hi, -1.0, 1.0,
                                       epsabs=quad_tol * 1e-2, epsrel=quad_tol)
        logger.debug("direct mean-free-time panel [%g, %g] = %.17g +/- %.2e", lo, hi, value, err)
        total += value
    mean_relative_speed = k.m * c * norm * total
    return k.m ** 2 / (k.sigma * fields.rho * mean_relative_speed)
