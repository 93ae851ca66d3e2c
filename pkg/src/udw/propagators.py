"""Regularized two-point functions of a massless scalar field in 3+1 dimensions.

All kernels carry a finite regulator ``eps`` that shifts time differences to
``t - i eps``.  Hyperbolic reciprocals go through :func:`csch`, which stays
finite far into the tails where ``sinh`` itself would overflow.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DomainError
from .worldlines import Event, interval_squared

__all__ = [
    "csch",
    "vacuum_wightman",
    "accelerated_pair_wightman",
    "thermal_wightman",
    "coincident_thermal_wightman",
    "feynman",
    "thermal_factor",
    "TwoPointKernel",
]

FOUR_PI2 = 4.0 * np.pi ** 2


def csch(z):
    """``1/sinh(z)`` for real or complex ``z`` without overflow.

    Uses ``2 exp(-z) / (1 - exp(-2z))`` for ``Re z >= 0`` and the odd mirror
    otherwise, so large arguments underflow gracefully to zero.
    """
    z = np.asarray(z)
    sgn = np.where(np.real(z) >= 0, 1.0, -1.0)
    w = sgn * z
    e = np.exp(-w)
    with np.errstate(divide="ignore", invalid="ignore"):
        return sgn * 2.0 * e / (-np.expm1(-2.0 * w))


def _check_eps(eps):
    if not eps > 0:
        raise DomainError(f"regulator eps must be positive (got {eps})")


def vacuum_wightman(e1: Event, e2: Event, eps: float):
    """Minkowski vacuum Wightman function ``-1 / (4 pi^2 [(dt - i eps)^2 - dx^2])``."""
    _check_eps(eps)
    d = Event(*e1) - Event(*e2)
    dt = np.asarray(d.x0) - 1j * eps
    dx2 = np.asarray(d.x1) ** 2 + np.asarray(d.x2) ** 2 + np.asarray(d.x3) ** 2
    return -1.0 / (FOUR_PI2 * (dt * dt - dx2))


def accelerated_pair_wightman(dtau, a: float, r: float, eps: float):
    """Vacuum Wightman function pulled back to two co-accelerated detectors.

    ``r`` is the light delay between the detectors (``r = 0`` for a single one).
    """
    if not a > 0:
        raise DomainError("acceleration must be positive")
    _check_eps(eps)
    z = np.asarray(dtau) - 1j * eps
    return -(a * a / (16 * np.pi ** 2)) * csch(a * (z - r) / 2) * csch(a * (z + r) / 2)


def coincident_thermal_wightman(dt, beta: float, eps: float):
    """Thermal Wightman function at coincident spatial points, ``-1/(4 beta^2 sinh^2(pi (t - i eps)/beta))``."""
    if not beta > 0:
        raise DomainError("beta must be positive")
    _check_eps(eps)
    c = csch(np.pi * (np.asarray(dt) - 1j * eps) / beta)
    return -c * c / (4 * beta * beta)


def thermal_wightman(dt, dist: float, beta: float, eps: float):
    """Thermal Wightman function for two static points a distance ``dist`` apart."""
    if not beta > 0:
        raise DomainError("beta must be positive")
    if not dist >= 0:
        raise DomainError("distance must be non-negative")
    _check_eps(eps)
    if dist < 1e-6 * beta:
        return coincident_thermal_wightman(dt, beta, eps)
    z = np.asarray(dt) - 1j * eps
    pref = np.sinh(2 * np.pi * dist / beta) / (8 * np.pi * beta * dist)
    return -pref * csch(np.pi * (z - dist) / beta) * csch(np.pi * (z + dist) / beta)


def feynman(e1: Event, e2: Event, eps: float):
    """Feynman propagator ``-1 / (4 pi^2 [(dx)^2 - i eps])``."""
    _check_eps(eps)
    return -1.0 / (FOUR_PI2 * (interval_squared(e1, e2) - 1j * eps))


def thermal_factor(r: float, beta: float) -> float:
    """Ratio ``(beta / 2 pi r) sinh(2 pi r / beta)`` of thermal to accelerated pair kernels."""
    x = 2 * np.pi * r / beta
    if x < 1e-8:
        return 1.0 + x * x / 6
    return float(np.sinh(x) / x)


@dataclass(frozen=True)
class TwoPointKernel:
    """A stationary kernel ``K(dtau)`` together with its pole geometry.

    ``kind`` is one of ``"vacuum"``, ``"thermal"`` or ``"accelerated"``.
    ``depth`` is the distance below the real axis of the first row of
    singularities in the lower half plane (``inf`` when there is none), which
    bounds how far an integration contour may be pushed down.
    """

    kind: str
    eps: float
    a: float = 0.0
    beta: float = 0.0
    r: float = 0.0

    def __post_init__(self):
        _check_eps(self.eps)
        if self.kind == "accelerated" and not self.a > 0:
            raise DomainError("accelerated kernel needs a > 0")
        if self.kind == "thermal" and not self.beta > 0:
            raise DomainError("thermal kernel needs beta > 0")
        if self.kind not in ("vacuum", "thermal", "accelerated"):
            raise DomainError(f"unknown kernel kind {self.kind!r}")

    @property
    def depth(self) -> float:
        if self.kind == "accelerated":
            return 2 * np.pi / self.a
        if self.kind == "thermal":
            return self.beta
        return np.inf

    def __call__(self, dtau):
        if self.kind == "accelerated":
            return accelerated_pair_wightman(dtau, self.a, self.r, self.eps)
        if self.kind == "thermal":
            return thermal_wightman(dtau, self.r, self.beta, self.eps)
        z = np.asarray(dtau) - 1j * self.eps
        return -1.0 / (FOUR_PI2 * (z * z - self.r * self.r))
