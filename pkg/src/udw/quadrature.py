"""Quadrature engine for Gaussian-windowed oscillatory integrals.

Integrals of the form ``int dy g(y) exp(-i E y) K(y)`` are done with the
composite trapezoid rule on a finite window, doubling the panel count until
two successive estimates agree.  For analytic, Gaussian-damped integrands the
trapezoid rule converges geometrically, and the rule can also be run along a
horizontal line ``Im y = -shift`` to move the path away from singularities
that hug the real axis.

Poles of rational-like integrands are handled by :func:`residue`, which
evaluates the Cauchy integral on a small circle with the trapezoid rule.
"""

from __future__ import annotations

import os
from dataclasses import dataclass, asdict
from typing import Callable, NamedTuple, Sequence

import numpy as np

from .errors import ConvergenceError, DomainError, IllConditionedError, RegimeError

__all__ = [
    "QuadratureSpec",
    "QuadResult",
    "Pole",
    "PoleSet",
    "integrate_windowed",
    "integrate_line",
    "residue",
    "residue_sum",
    "eta_series_term",
    "smearing_correction",
]

EPS_ENV = "UDW_EPS_SCALE"
_CHUNK = 1 << 18  # abscissae evaluated per integrand call


@dataclass(frozen=True)
class QuadratureSpec:
    """Knobs for :func:`integrate_windowed`.

    Attributes
    ----------
    window_sigmas : float
        Half-width of the integration window in units of ``sigma``.
    panels : int
        Initial number of trapezoid panels (a power of two).
    rel_tol : float
        Relative agreement required between two successive doublings.
    max_doublings : int
        Give up after this many doublings.
    eps_scale : float
        Regulator policy: ``eps = eps_scale * min(sigma, 1/a)``.
    abs_tol : float
        Absolute floor for the convergence test.
    """

    window_sigmas: float = 12.0
    panels: int = 4096
    rel_tol: float = 1e-8
    max_doublings: int = 16
    eps_scale: float = 1e-10
    abs_tol: float = 0.0

    def __post_init__(self):
        if not self.window_sigmas >= 8:
            raise DomainError("window_sigmas must be at least 8")
        p = int(self.panels)
        if p < 2 or p & (p - 1):
            raise DomainError("panels must be a power of two")
        if not 0 < self.rel_tol < 1:
            raise DomainError("rel_tol must lie in (0, 1)")
        if not self.max_doublings >= 0:
            raise DomainError("max_doublings must be non-negative")
        if not self.eps_scale > 0:
            raise DomainError("eps_scale must be positive")

    def epsilon(self, sigma: float, a: float | None = None) -> float:
        """Regulator for resolution time ``sigma`` and acceleration scale ``a``.

        The environment variable ``UDW_EPS_SCALE`` overrides ``eps_scale``.
        """
        scale = float(os.environ.get(EPS_ENV, self.eps_scale))
        length = sigma if not a else min(sigma, 1.0 / a)
        return scale * length

    def to_dict(self) -> dict:
        return asdict(self)

    def replace(self, **kw) -> "QuadratureSpec":
        d = asdict(self)
        d.update(kw)
        return QuadratureSpec(**d)


class QuadResult(NamedTuple):
    value: complex
    error: float
    panels: int


def integrate_line(integrand: Callable, lo: float, hi: float, spec: QuadratureSpec,
                   shift: float = 0.0, min_step: float | None = None) -> QuadResult:
    """Trapezoid rule on ``[lo, hi] - i*shift`` with panel doubling.

    The integrand receives complex abscissae when ``shift`` is nonzero.
    ``min_step`` forces the first estimate to use at most that spacing.
    """
    n = int(spec.panels)
    if min_step is not None and min_step > 0:
        while (hi - lo) / n > min_step:
            n *= 2
    length = hi - lo
    h = length / n
    t = lo + h * np.arange(n + 1)
    z = t - 1j * shift if shift else t
    f = np.asarray(integrand(z), dtype=complex)
    _check_finite(f)
    s = 0.5 * (f[0] + f[-1]) + f[1:-1].sum()
    mag = np.abs(f).sum()
    est = h * s
    prev = est
    for _ in range(spec.max_doublings + 1):
        for start in range(0, n, _CHUNK):
            mid = lo + h * (np.arange(start, min(n, start + _CHUNK)) + 0.5)
            z = mid - 1j * shift if shift else mid
            fm = np.asarray(integrand(z), dtype=complex)
            _check_finite(fm)
            s = s + fm.sum()
            mag = mag + np.abs(fm).sum()
        n *= 2
        h /= 2
        new = h * s
        err = abs(new - est)
        floor = 64 * np.finfo(float).eps * h * mag
        if err <= max(spec.rel_tol * abs(new), spec.abs_tol, floor):
            return QuadResult(new, max(err, floor), n)
        prev, est = est, new
    raise ConvergenceError(
        f"trapezoid rule did not converge after {spec.max_doublings} doublings",
        last=est, previous=prev,
    )


def _check_finite(f):
    if not np.all(np.isfinite(f)):
        raise DomainError("integrand is not finite on the integration path")


def integrate_windowed(integrand: Callable, spec: QuadratureSpec | None = None, center: float = 0.0,
                       sigma: float = 1.0, shift: float = 0.0, min_step: float | None = None) -> QuadResult:
    """Integrate over ``[center - W sigma, center + W sigma]`` (optionally shifted below the axis)."""
    spec = spec or QuadratureSpec()
    if not sigma > 0:
        raise DomainError("sigma must be positive")
    half = spec.window_sigmas * sigma
    return integrate_line(integrand, center - half, center + half, spec, shift=shift, min_step=min_step)


# ---------------------------------------------------------------------------
# poles and residues

class Pole(NamedTuple):
    location: complex
    order: int = 1


class PoleSet(tuple):
    """Immutable collection of poles sorted by imaginary part."""

    def __new__(cls, poles: Sequence = ()):
        items = []
        for p in poles:
            p = p if isinstance(p, Pole) else Pole(*p) if isinstance(p, tuple) else Pole(p)
            if int(p.order) < 1:
                raise DomainError("pole order must be >= 1")
            items.append(Pole(complex(p.location), int(p.order)))
        items.sort(key=lambda p: (p.location.imag, p.location.real))
        return super().__new__(cls, items)

    def lower(self):
        return PoleSet(p for p in self if p.location.imag < 0)

    def upper(self):
        return PoleSet(p for p in self if p.location.imag >= 0)


def residue(fun: Callable, z0: complex, radius: float, nodes: int = 128) -> complex:
    """Residue of ``fun`` at ``z0`` from the Cauchy integral on a circle.

    The trapezoid rule on a circle is spectrally accurate: the error falls
    like ``(radius / R)**nodes`` where ``R`` is the distance from ``z0`` to the
    next singularity.
    """
    theta = 2 * np.pi * np.arange(nodes) / nodes
    w = radius * np.exp(1j * theta)
    vals = np.asarray(fun(z0 + w), dtype=complex)
    _check_finite(vals)
    return complex(np.mean(vals * w))


def residue_sum(fun: Callable, poles: Sequence, half_plane: str = "lower", eps: float = 0.0,
                radius: float | None = None, nodes: int = 128, neighbors: Sequence = ()) -> complex:
    """Integral of ``fun`` along the real axis by closing in a half plane.

    ``fun`` is the complete integrand (including any ``exp(-i E y)``); it
    must decay in the chosen half plane.  Closing below gives
    ``-2 pi i`` times the sum of enclosed residues, closing above ``+2 pi i``.
    Poles closer than ``10 eps`` to the real axis make the closure
    ambiguous and raise :class:`IllConditionedError`.  ``neighbors`` lists
    further singular points that only limit the circle radii.
    """
    pset = PoleSet(poles)
    for p in pset:
        if abs(p.location.imag) <= 10 * eps:
            raise IllConditionedError(f"pole at {p.location} lies on the real axis within 10*eps")
    if half_plane == "lower":
        chosen, sign = pset.lower(), -1.0
    elif half_plane == "upper":
        chosen, sign = pset.upper(), 1.0
    else:
        raise DomainError("half_plane must be 'lower' or 'upper'")
    total = 0.0j
    locs = np.array([p.location for p in pset] + [complex(z) for z in neighbors])
    for p in chosen:
        if radius is None:
            others = np.abs(locs - p.location)
            others = others[others > 0]
            rho = 0.4 * others.min() if others.size else 0.5 * abs(p.location.imag)
            if p.location.imag != 0:
                rho = min(rho, 0.5 * abs(p.location.imag))
        else:
            rho = radius
        total += residue(fun, p.location, rho, nodes)
    return sign * 2j * np.pi * total


# ---------------------------------------------------------------------------
# finite-sigma correction to the Planck spectrum

def _check_series_args(E, a, sigma):
    if not E > 0:
        raise DomainError("energy must be positive")
    if E < 0.1 * a:
        raise DomainError("correction term restricted to E >= 0.1 a (its a/E piece blows up)")
    if not sigma * a > 1:
        raise RegimeError(f"correction series needs sigma*a > 1 (got {sigma * a})")


def eta_series_term(E: float, a: float, sigma: float) -> float:
    """Bracketed first-order coefficient of the correction series in ``1/(sigma a)^2``.

    Returns ``(1/(sigma a)^2) [(pi^2/4)(e^x+1)/(e^x-1)^2 - pi a / (4E(1-e^x))]``
    with ``x = 2 pi E / a``, kept exactly in this form.  Compare with
    :func:`smearing_correction`, the term the Gaussian window actually produces.
    """
    _check_series_args(E, a, sigma)
    x = 2 * np.pi * E / a
    em1 = np.expm1(x)
    bracket = (np.pi ** 2 / 4) * (em1 + 2) / em1 ** 2 - np.pi * a / (4 * E * (-em1))
    return float(bracket / (sigma * a) ** 2)


def smearing_correction(E: float, a: float, sigma: float) -> float:
    """Leading relative correction to the Planck spectrum from a finite ``sigma``.

    The smeared response is the Planck curve ``P(E) = E / (2 pi (e^{2 pi E/a} - 1))``
    convolved with a Gaussian of variance ``1/(4 sigma^2)`` in energy, so to
    first order the relative change is ``P''(E) / (8 sigma^2 P(E))``.  In terms
    of ``x = 2 pi E / a`` and ``eta = 1/(sigma a)^2`` this reads

        eta * [(pi^2/2) e^x (e^x + 1) / (e^x - 1)^2 - pi a e^x / (2 E (e^x - 1))].
    """
    _check_series_args(E, a, sigma)
    x = 2 * np.pi * E / a
    em1 = np.expm1(x)
    ex = em1 + 1
    bracket = (np.pi ** 2 / 2) * ex * (ex + 1) / em1 ** 2 - np.pi * a * ex / (2 * E * em1)
    return float(bracket / (sigma * a) ** 2)
