"""Independent oracle for the transport moments.

F is evaluated from its closed form through the mean relative speed,
F = exp(-kappa^2/2) / (sqrt(2 pi) G(kappa)) with
G = sqrt(2/pi) exp(-kappa^2/2) + (kappa + 1/kappa) erf(kappa/sqrt 2),
and the moments are integrated with composite Simpson on [0, 12].
"""

import numpy as np
from scipy.integrate import simpson
from scipy.special import erf

KAPPA_MAX = 12.0
SAMPLES = 24001


def closed_form_F(kappa):
    kappa = np.asarray(kappa, dtype=float)
    safe = np.where(kappa < 1e-6, 1e-6, kappa)
    G = np.sqrt(2 / np.pi) * np.exp(-0.5 * safe ** 2) + (safe + 1 / safe) * erf(safe / np.sqrt(2))
    G = np.where(kappa < 1e-6, np.sqrt(8 / np.pi), G)
    return np.exp(-0.5 * kappa ** 2) / (np.sqrt(2 * np.pi) * G)


def simpson_moments(kappa_max: float = KAPPA_MAX, samples: int = SAMPLES):
    """(mu1, mu2, mu3) = integral of kappa^(2n) F over [0, kappa_max]."""
    kappa = np.linspace(0.0, kappa_max, samples)
    F = closed_form_F(kappa)
    return tuple(float(simpson(kappa ** (2 * n) * F, x=kappa)) for n in (1, 2, 3))
