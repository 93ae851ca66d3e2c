"""Gaussian resolution kernels.

``f_sigma`` is the normalized detection-time density of width ``sigma`` and
``g_sigma(s) = exp(-s^2 / (8 sigma^2))`` is the suppression factor that
appears once two detection-time densities are combined.  They are linked by
the exact identity

    sqrt(f(t - s) f(t - s')) = f(t - (s + s')/2) g(s - s').
"""

from dataclasses import dataclass

import numpy as np

from .errors import DomainError

__all__ = [
    "ResolutionKernel",
    "f_sigma",
    "g_sigma",
    "factorization_residual",
    "product_identity_residual",
]


def _check_sigma(sigma):
    if not np.all(np.asarray(sigma) > 0):
        raise DomainError(f"resolution time sigma must be positive (got {sigma})")


def f_sigma(s, sigma):
    """Normalized Gaussian density ``(2 pi sigma^2)^(-1/2) exp(-s^2 / 2 sigma^2)``."""
    _check_sigma(sigma)
    s = np.asarray(s)
    return np.exp(-s * s / (2.0 * sigma * sigma)) / np.sqrt(2.0 * np.pi * sigma * sigma)


def g_sigma(s, sigma):
    """Suppression factor ``exp(-s^2 / 8 sigma^2)``; accepts complex ``s``."""
    _check_sigma(sigma)
    s = np.asarray(s)
    return np.exp(-s * s / (8.0 * sigma * sigma))


def factorization_residual(t, s, s_prime, sigma):
    """Defect of ``sqrt(f(t-s) f(t-s')) = f(t-(s+s')/2) g(s-s')``; zero up to rounding."""
    lhs = np.sqrt(f_sigma(np.subtract(t, s), sigma) * f_sigma(np.subtract(t, s_prime), sigma))
    mid = np.subtract(t, (np.add(s, s_prime)) / 2.0)
    return lhs - f_sigma(mid, sigma) * g_sigma(np.subtract(s, s_prime), sigma)


def product_identity_residual(s, s_prime, sigma):
    """Defect of the exact product rule for two densities.

    ``f(s) f(s') = (2 pi sigma^2)^-1 exp(-((s+s')/2)^2 / sigma^2) exp(-(s-s')^2 / (4 sigma^2))``.
    """
    s = np.asarray(s, dtype=float)
    sp = np.asarray(s_prime, dtype=float)
    lhs = f_sigma(s, sigma) * f_sigma(sp, sigma)
    m = (s + sp) / 2.0
    rhs = np.exp(-m * m / sigma ** 2) * np.exp(-(s - sp) ** 2 / (4 * sigma ** 2)) / (2 * np.pi * sigma ** 2)
    return lhs - rhs


@dataclass(frozen=True)
class ResolutionKernel:
    """Pair of Gaussian kernels sharing one resolution time."""

    sigma: float

    def __post_init__(self):
        _check_sigma(self.sigma)

    def f(self, s):
        return f_sigma(s, self.sigma)

    def g(self, s):
        return g_sigma(s, self.sigma)
