"""Single-detector response ``p(E, tau)`` and its closed forms.

The general response is

    p(E, tau) = alpha(E) * int dy g_sigma(y) exp(-i E y) W(tau, y),

with ``W`` the vacuum Wightman function evaluated between ``x(tau + y/2)``
and ``x(tau - y/2)``.  For a timelike worldline ``W = -1/(4 pi^2 s(y))``
where ``s`` is the squared chord interval, regularized as ``y -> y - i eps``.
:func:`response_general` splits ``1/s`` into the inertial piece ``1/y^2``,
whose windowed transform is known in closed form, and a remainder that is
smooth on the real axis and is integrated numerically.  No regulator enters
that path at all.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import Callable, NamedTuple, Sequence

import numpy as np
from scipy.integrate import simpson
from scipy.special import erfcx

from .errors import DomainError, RegimeError
from .propagators import TwoPointKernel
from .quadrature import (QuadratureSpec, Pole, eta_series_term, integrate_line,
                         integrate_windowed, residue_sum)
from .smearing import g_sigma
from .worldlines import SingleAxis, Worldline, fd_derivative

__all__ = [
    "TwoLevel",
    "Tabulated",
    "CallableAlpha",
    "Constant",
    "DetectorModel",
    "Spectrum",
    "ResponseValue",
    "light_cone_term",
    "response_general",
    "stationary_response",
    "planck_response",
    "planck_with_correction",
    "thermal_static_response",
    "adiabatic_response",
    "unruh_temperature",
    "single_axis_poles",
    "single_axis_response",
    "single_axis_quadrature",
    "two_pole_closed_form",
    "intensity",
]

FOUR_PI2 = 4.0 * np.pi ** 2


# ---------------------------------------------------------------------------
# coupling spectra

@dataclass(frozen=True)
class TwoLevel:
    """Flat coupling ``strength`` on the band ``|E - E0| <= delta_E / 2``."""

    E0: float
    delta_E: float
    strength: float = 1.0

    def __post_init__(self):
        if not (self.E0 > 0 and self.delta_E > 0 and self.strength >= 0):
            raise DomainError("TwoLevel needs E0 > 0, delta_E > 0, strength >= 0")
        if self.delta_E >= 2 * self.E0:
            raise DomainError("TwoLevel band must stay at positive energies")

    @property
    def support(self):
        return (self.E0 - self.delta_E / 2, self.E0 + self.delta_E / 2)

    def __call__(self, E):
        E = np.asarray(E, dtype=float)
        lo, hi = self.support
        return np.where((E >= lo) & (E <= hi), self.strength, 0.0)

    def to_dict(self):
        return {"kind": "two_level", "E0": self.E0, "delta_E": self.delta_E, "strength": self.strength}


@dataclass(frozen=True)
class Tabulated:
    """Coupling interpolated linearly from samples; zero outside the grid."""

    energies: tuple
    values: tuple

    def __post_init__(self):
        e = np.asarray(self.energies, dtype=float)
        v = np.asarray(self.values, dtype=float)
        if e.ndim != 1 or e.shape != v.shape or e.size < 2:
            raise DomainError("Tabulated needs matching 1-d energy and value grids")
        if np.any(np.diff(e) <= 0):
            raise DomainError("Tabulated energies must be strictly increasing")
        if np.any(v < 0):
            raise DomainError("coupling spectrum must be non-negative")
        object.__setattr__(self, "energies", tuple(e.tolist()))
        object.__setattr__(self, "values", tuple(v.tolist()))

    @property
    def support(self):
        return (self.energies[0], self.energies[-1])

    def __call__(self, E):
        return np.interp(E, self.energies, self.values, left=0.0, right=0.0)

    def to_dict(self):
        return {"kind": "tabulated", "energies": list(self.energies), "values": list(self.values)}


@dataclass(frozen=True)
class CallableAlpha:
    """Arbitrary non-negative coupling ``fn(E)`` supported on ``support``."""

    fn: Callable
    support: tuple = (0.0, np.inf)

    def __call__(self, E):
        return np.asarray(self.fn(E), dtype=float)


@dataclass(frozen=True)
class Constant:
    """Energy-independent coupling."""

    value: float = 1.0
    support: tuple = (0.0, np.inf)

    def __post_init__(self):
        if not self.value >= 0:
            raise DomainError("coupling must be non-negative")

    def __call__(self, E):
        return self.value * np.ones_like(np.asarray(E, dtype=float))

    def to_dict(self):
        return {"kind": "constant", "value": self.value}


@dataclass(frozen=True)
class DetectorModel:
    """Resolution time ``sigma`` and coupling spectrum ``alpha``.

    A :class:`TwoLevel` coupling must describe a band that is wide compared
    with ``1/sigma`` and narrow compared with ``E0``; both are checked with a
    factor of ten.
    """

    sigma: float
    alpha: Callable = field(default_factory=Constant)

    def __post_init__(self):
        if not self.sigma > 0:
            raise DomainError("sigma must be positive")
        if isinstance(self.alpha, TwoLevel):
            if self.alpha.delta_E * self.sigma < 10:
                raise RegimeError(
                    f"two-level band too narrow: delta_E*sigma = {self.alpha.delta_E * self.sigma:.4g} < 10")
            if self.alpha.E0 / self.alpha.delta_E < 10:
                raise RegimeError(
                    f"two-level band too wide: E0/delta_E = {self.alpha.E0 / self.alpha.delta_E:.4g} < 10")

    def coupling(self, E):
        return self.alpha(E)


# ---------------------------------------------------------------------------
# spectra

@dataclass
class Spectrum:
    """Sampled response ``p(E, tau)`` with provenance."""

    energies: np.ndarray
    values: np.ndarray
    errors: np.ndarray
    tau: float = 0.0
    method: str = "quadrature"
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        self.energies = np.asarray(self.energies, dtype=float)
        self.values = np.asarray(self.values, dtype=float)
        self.errors = np.asarray(self.errors, dtype=float)
        if not (self.energies.shape == self.values.shape == self.errors.shape):
            raise DomainError("spectrum arrays must share one shape")

    def rows(self):
        for E, p, e in zip(self.energies, self.values, self.errors):
            yield float(E), float(p), float(e), self.method

    def to_csv(self) -> str:
        lines = ["E,p,p_err,method"]
        lines += [f"{E:.17g},{p:.17g},{e:.17g},{m}" for E, p, e, m in self.rows()]
        return "\n".join(lines) + "\n"

    def to_json(self) -> str:
        payload = {"tau": self.tau, "method": self.method, "meta": self.meta,
                   "data": [{"E": E, "p": p, "p_err": e} for E, p, e, _ in self.rows()]}
        return json.dumps(payload, indent=2, sort_keys=True)


class ResponseValue(NamedTuple):
    """A response density with its quadrature error and leftover imaginary part."""

    value: float
    error: float
    imag: float


# ---------------------------------------------------------------------------
# general worldlines

def light_cone_term(E, sigma):
    """Windowed transform of the inertial singularity.

    Returns ``int dy g_sigma(y) exp(-i E y) * (-1 / (4 pi^2 (y - i0)^2))``,
    which is real and equals
    ``-(sqrt(pi/2)/(4 pi^2 sigma)) exp(-x^2) (sqrt(pi) x erfcx(x) - 1)``
    with ``x = sqrt(2) sigma E``.  It is the whole response of an inertial
    detector and decays like ``exp(-2 sigma^2 E^2)``.
    """
    x = np.sqrt(2.0) * sigma * np.asarray(E, dtype=float)
    with np.errstate(over="ignore", invalid="ignore"):
        core = np.sqrt(np.pi) * x * erfcx(x) - 1.0
        j = np.sqrt(np.pi / 2) / sigma * np.exp(-x * x) * core
    return -j / FOUR_PI2


def _remainder(w: Worldline, tau: float):
    """Smooth part ``-(1/4 pi^2)(1/s(y) - 1/y^2)`` of the pulled-back Wightman function."""
    at_zero = w.chord_quartic(tau) / FOUR_PI2

    def rem(y):
        y = np.asarray(y, dtype=float)
        s = w.chord_interval(tau, y)
        out = np.empty_like(y)
        nz = y != 0
        if np.any(s[nz] <= 0):
            raise DomainError("worldline chord is not timelike inside the window")
        with np.errstate(over="ignore", divide="ignore"):
            out[nz] = -(1.0 / s[nz] - 1.0 / (y[nz] * y[nz])) / FOUR_PI2
        out[~nz] = at_zero
        return out

    return rem


def response_general(w: Worldline, E: float, tau: float, det: DetectorModel,
                     spec: QuadratureSpec | None = None) -> ResponseValue:
    """Response of a detector moving on ``w`` at proper time ``tau``.

    The worldline is sampled only on ``tau +- W sigma / 2``.
    """
    if not E > 0:
        raise DomainError("energy must be positive")
    spec = spec or QuadratureSpec()
    sigma = det.sigma
    rem = _remainder(w, tau)

    def integrand(y):
        return g_sigma(y, sigma) * np.exp(-1j * E * y) * rem(y)

    res = integrate_windowed(integrand, spec, 0.0, sigma)
    alpha = float(det.coupling(E))
    total = light_cone_term(E, sigma) + res.value.real
    return ResponseValue(alpha * float(total), alpha * float(res.error), alpha * float(res.value.imag))


# ---------------------------------------------------------------------------
# stationary kernels

def _contour_depth(E, sigma, pole_depth):
    """Depth of the horizontal integration line below the real axis.

    The Gaussian-times-plane-wave factor has its saddle at ``4 sigma^2 E``;
    the line stops a margin ``min(D/2, 1/E)`` short of the first pole row at
    depth ``D``.
    """
    saddle = 4 * sigma * sigma * E
    if not np.isfinite(pole_depth):
        return saddle, saddle
    margin = min(pole_depth / 2, 1.0 / E)
    delta = min(saddle, pole_depth - margin)
    clearance = min(delta, pole_depth - delta)
    return delta, clearance


def stationary_response(kernel: TwoPointKernel, E: float, det: DetectorModel,
                        spec: QuadratureSpec | None = None) -> ResponseValue:
    """Response to a stationary kernel ``K(y)``, integrated below the real axis.

    The kernel's singularities sit at ``+i eps`` and then in rows at depth
    ``kernel.depth`` and beyond, so the line ``Im y = -delta`` with
    ``0 < delta < depth`` gives the same integral as the real axis.
    """
    if not E > 0:
        raise DomainError("energy must be positive")
    spec = spec or QuadratureSpec()
    sigma = det.sigma
    delta, clearance = _contour_depth(E, sigma, kernel.depth)

    def integrand(z):
        return g_sigma(z, sigma) * np.exp(-1j * E * z) * kernel(z)

    res = integrate_windowed(integrand, spec, 0.0, sigma, shift=delta, min_step=clearance / 5)
    alpha = float(det.coupling(E))
    return ResponseValue(alpha * float(res.value.real), alpha * float(res.error), alpha * float(res.value.imag))


def thermal_static_response(E: float, beta: float, det: DetectorModel,
                            spec: QuadratureSpec | None = None) -> ResponseValue:
    """Static detector in a thermal bath of inverse temperature ``beta``."""
    if not beta > 0:
        raise DomainError("beta must be positive")
    spec = spec or QuadratureSpec()
    eps = spec.epsilon(det.sigma, 2 * np.pi / beta)
    return stationary_response(TwoPointKernel("thermal", eps, beta=beta), E, det, spec)


# ---------------------------------------------------------------------------
# closed forms

def unruh_temperature(a):
    return np.asarray(a) / (2 * np.pi)


def planck_response(E, a: float, det: DetectorModel):
    """``alpha(E) E / (2 pi (exp(2 pi E / a) - 1))``."""
    E = np.asarray(E, dtype=float)
    if np.any(E <= 0):
        raise DomainError("energy must be positive")
    if not a > 0:
        raise DomainError("acceleration must be positive")
    return det.coupling(E) * E / (2 * np.pi * np.expm1(2 * np.pi * E / a))


def planck_with_correction(E: float, a: float, det: DetectorModel) -> float:
    """Planck response times ``1 + eta_series_term``; needs ``sigma a >= 3``."""
    if det.sigma * a < 3:
        raise RegimeError(f"correction series needs sigma*a >= 3 (got {det.sigma * a:.4g})")
    return float(planck_response(E, a, det)) * (1.0 + eta_series_term(E, a, det.sigma))


def adiabatic_response(E: float, tau: float, a_of_tau: Callable, det: DetectorModel) -> float:
    """Planck response at the instantaneous acceleration ``a(tau)``.

    Requires ``|a'| sigma / a < 0.1`` and ``a sigma > 3``.
    """
    a = float(a_of_tau(tau))
    adot = float(fd_derivative(a_of_tau, tau, 1))
    if not a * det.sigma > 3:
        raise RegimeError(f"adiabatic response needs a*sigma > 3 (got {a * det.sigma:.4g})")
    if abs(adot) * det.sigma / a >= 0.1:
        raise RegimeError(f"acceleration varies too fast: |a'|sigma/a = {abs(adot) * det.sigma / a:.4g} >= 0.1")
    return float(planck_response(E, a, det))


# ---------------------------------------------------------------------------
# single-axis motion by residues

def _odd_coefficients(w: SingleAxis, which: str, tau: float, k: int):
    """``c_j = u^(2j+1) / (4^j (2j+1)!)`` so that ``u(tau+y/2) - u(tau-y/2) = y sum c_j y^(2j)``."""
    from math import factorial
    return np.array([w.light_cone_derivative(which, tau, 2 * j + 1) / (4 ** j * factorial(2 * j + 1))
                     for j in range(k + 1)])


def _check_truncation(w, which, tau, k, sigma):
    c = _odd_coefficients(w, which, tau, k + 1)
    lead = abs(c[k]) * sigma ** (2 * k)
    nxt = abs(c[k + 1]) * sigma ** (2 * k + 2)
    if nxt > 0.1 * lead:
        raise RegimeError(
            f"Taylor truncation of {which} at order {2 * k + 1} invalid: next term/last term = "
            f"{nxt / lead if lead else np.inf:.4g} > 0.1 at y ~ sigma")


def single_axis_poles(w: SingleAxis, tau: float, truncation=(1, 1)):
    """Coefficients and lower/upper poles of the truncated single-axis integrand.

    Returns ``(cu, cv, lower, upper)`` where ``lower`` and ``upper`` are lists
    of complex pole locations.  Real poles count as upper, following the
    ``y -> y - i eps`` prescription.  The double pole at ``y = 0`` is always
    in ``upper``.
    """
    ku, kv = truncation
    if ku < 1 or kv < 1:
        raise DomainError("truncation orders must be >= 1")
    cu = _odd_coefficients(w, "u", tau, ku)
    cv = _odd_coefficients(w, "v", tau, kv)
    lower, upper = [], [0.0j]
    for c in (cu, cv):
        roots_w = np.roots(c[::-1]) if np.any(c[1:] != 0) else np.array([])
        for rw in np.atleast_1d(roots_w):
            rw = complex(rw)
            y = np.sqrt(rw)
            for yy in (y, -y):
                scale = max(abs(yy), 1e-300)
                if abs(yy.imag) <= 1e-12 * scale:
                    upper.append(complex(yy.real, 0.0))
                elif yy.imag < 0:
                    lower.append(yy)
                else:
                    upper.append(yy)
    return cu, cv, lower, upper


def _truncated_integrand(cu, cv, E, eps=0.0):
    def poly(c, w2):
        out = np.zeros_like(w2)
        for cj in c[::-1]:
            out = out * w2 + cj
        return out

    def F(y):
        z = np.asarray(y) - 1j * eps
        z2 = z * z
        return -np.exp(-1j * E * np.asarray(y)) / (FOUR_PI2 * z2 * poly(cu, z2) * poly(cv, z2))

    return F


def two_pole_closed_form(ud: float, u3: float, vd: float, v3: float, E: float) -> float:
    """Response for a cubic truncation with both poles ``-i b_u``, ``-i b_v`` below the axis.

    ``b = sqrt(24 u' / u''')`` and the result, per unit coupling, is

        [ (u'''/u') e^{-E b_u} / b_u - (v'''/v') e^{-E b_v} / b_v ] / (4 pi (v' u''' - u' v''')).
    """
    if not (ud / u3 > 0 and vd / v3 > 0):
        raise DomainError("two-pole form needs u'/u''' > 0 and v'/v''' > 0")
    d = vd * u3 - ud * v3
    if d == 0:
        from .errors import DegeneratePoleError
        raise DegeneratePoleError("u'/u''' equals v'/v'''; the two poles coincide")
    bu = np.sqrt(24 * ud / u3)
    bv = np.sqrt(24 * vd / v3)
    return float(((u3 / ud) * np.exp(-E * bu) / bu - (v3 / vd) * np.exp(-E * bv) / bv) / (4 * np.pi * d))


def single_axis_response(w: SingleAxis, E: float, tau: float, det: DetectorModel,
                         truncation=(1, 1), check_regime: bool = True) -> float:
    """Residue evaluation of the single-axis response with Taylor-truncated ``u`` and ``v``.

    The Gaussian window is replaced by one, which is the leading-order
    statement for ``sigma`` large compared with the pole distances.  With a
    cubic truncation and two distinct lower poles the closed form
    :func:`two_pole_closed_form` is returned; every other case (including
    coincident poles) goes through :func:`udw.quadrature.residue_sum`, which
    merges coincident poles into a single higher-order one.
    """
    if not E > 0:
        raise DomainError("energy must be positive")
    if check_regime:
        _check_truncation(w, "u", tau, truncation[0], det.sigma)
        _check_truncation(w, "v", tau, truncation[1], det.sigma)
    cu, cv, lower, upper = single_axis_poles(w, tau, truncation)
    alpha = float(det.coupling(E))
    if not lower:
        return 0.0
    if tuple(truncation) == (1, 1) and len(lower) == 2:
        bu, bv = np.sqrt(cu[0] / cu[1]), np.sqrt(cv[0] / cv[1])
        if abs(bu - bv) > 1e-6 * max(bu, bv):
            return alpha * two_pole_closed_form(cu[0], 24 * cu[1], cv[0], 24 * cv[1], E)
    F = _truncated_integrand(cu, cv, E)
    val = _clustered_lower_sum(F, lower, upper)
    return alpha * float(val.real)


def _clustered_lower_sum(F, lower, upper, nodes=128):
    """``-2 pi i`` times the residues at ``lower``, merging coincident poles.

    Poles closer than ``1e-4`` of the pole scale share one Cauchy circle,
    which gives their combined residue without the cancellation that
    separate tiny circles would suffer.
    """
    lower = [complex(p) for p in lower]
    scale = max(abs(p) for p in lower)
    clusters = []
    for p in lower:
        for cl in clusters:
            if min(abs(p - q) for q in cl) < 1e-4 * scale:
                cl.append(p)
                break
        else:
            clusters.append([p])
    total = 0.0j
    for cl in clusters:
        center = complex(np.mean(cl))
        others = [q for q in lower if q not in cl] + [complex(q) for q in upper]
        radius = 0.5 * min(abs(q - center) for q in others)
        total += residue_sum(F, [Pole(center, len(cl))], "lower", radius=radius, nodes=nodes)
    return total


def single_axis_quadrature(w: SingleAxis, E: float, tau: float, truncation=(1, 1),
                           spec: QuadratureSpec | None = None, half_width: float | None = None):
    """Direct line quadrature of the truncated single-axis integrand (unit coupling).

    The line runs at ``Im y = -delta`` between the real axis and the nearest
    lower pole (or at depth ``1/E`` when there is none); the integrand decays
    like ``1/y^4`` or faster so a long window is used.
    """
    spec = spec or QuadratureSpec(rel_tol=1e-12)
    cu, cv, lower, upper = single_axis_poles(w, tau, truncation)
    F = _truncated_integrand(cu, cv, E)
    if lower:
        delta = 0.5 * min(abs(p.imag) for p in lower)
    else:
        delta = 1.0 / E
    near = [abs(p - (-1j * delta)) for p in lower + upper]
    clearance = min(near)
    L = half_width if half_width is not None else 2000.0 / min(E, 1.0)
    return integrate_line(F, -L, L, spec, shift=delta, min_step=clearance / 6)


# ---------------------------------------------------------------------------
# intensity

def intensity(s: Spectrum, alpha: Callable | None = None, warn: bool = True) -> float:
    """Absorbed power ``int dE E p(E)`` over the spectrum grid (Simpson rule).

    A warning is issued when ``p`` at a grid edge exceeds ``1e-12`` of its
    peak, unless ``alpha`` is given and vanishes just beyond that edge.
    """
    import warnings

    E, p = s.energies, s.values
    peak = np.max(np.abs(p)) if p.size else 0.0
    if warn and peak > 0:
        for idx, step in ((0, -1), (-1, 1)):
            if abs(p[idx]) > 1e-12 * peak:
                beyond = E[idx] + step * 1e-9 * max(1.0, abs(E[idx]))
                if alpha is not None and float(alpha(beyond)) == 0.0:
                    continue
                warnings.warn("spectrum grid truncates the tail of p(E); intensity underestimated",
                              RuntimeWarning, stacklevel=2)
    return float(simpson(E * p, x=E))
