"""Two-detector correlations and the second-order coherence ``g2``.

The connected part of the joint detection density of two detectors is a
same-energy term ``G = coefficient(E, dtau) * delta(E1 - E2)``.  Closed forms
for ``coefficient`` exist when the detectors are far apart compared with the
resolution time (``r >> sigma``) and when they coincide (``r -> 0``).  A
numerical pipeline builds the same quantity from the four-pole kernel
``H(S)``, so each closed form has an independent check.

With stationary mean intensity ``I = int dE E p(E)``,

    g2(dtau) = 1 + int dE E^2 coefficient(E, dtau) / I^2.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field, asdict
from typing import Callable, NamedTuple

import numpy as np
from scipy.integrate import quad

from .errors import DomainError, RegimeError
from .propagators import csch, thermal_factor
from .quadrature import QuadratureSpec, integrate_line, integrate_windowed
from .response import DetectorModel, TwoLevel, planck_response
from .smearing import f_sigma

__all__ = [
    "AcceleratedSource",
    "ThermalSource",
    "CoherenceCurve",
    "JointDensity",
    "resolve_regime",
    "g_coefficient_far",
    "g_coefficient_near",
    "g_coefficient_thermal",
    "g_coefficient",
    "h_function_numeric",
    "h_function_near",
    "h_function_far",
    "correlation_kernel_numeric",
    "g_coefficient_numeric",
    "joint_probability",
    "g2",
    "g2_numeric",
    "coherence_curve",
    "sin_sinh_integral",
    "sinh2_kernel_integral",
    "sin_sinh_integral_numeric",
    "sinh2_kernel_integral_numeric",
]


# ---------------------------------------------------------------------------
# sources

@dataclass(frozen=True)
class AcceleratedSource:
    """Two co-accelerated detectors (acceleration ``a``, light delay ``r``)."""

    a: float
    r: float = 0.0

    def __post_init__(self):
        if not self.a > 0:
            raise DomainError("acceleration must be positive")
        if not self.r >= 0:
            raise DomainError("light delay must be non-negative")

    @property
    def scale(self):
        return self.a

    def label(self):
        return f"accelerated(a={self.a:.17g},r={self.r:.17g})"


@dataclass(frozen=True)
class ThermalSource:
    """Two static detectors a distance ``r`` apart in a bath at inverse temperature ``beta``."""

    beta: float
    r: float = 0.0

    def __post_init__(self):
        if not self.beta > 0:
            raise DomainError("beta must be positive")
        if not self.r >= 0:
            raise DomainError("separation must be non-negative")

    @property
    def scale(self):
        return 2 * np.pi / self.beta

    def label(self):
        return f"thermal(beta={self.beta:.17g},r={self.r:.17g})"


def resolve_regime(source, sigma: float) -> str:
    """``'far'`` for ``r >= 8 sigma``, ``'near'`` for ``r <= 0.01 / a``, else ``'numeric'``."""
    if source.r >= 8 * sigma:
        return "far"
    if source.r <= 0.01 / source.scale:
        return "near"
    return "numeric"


# ---------------------------------------------------------------------------
# closed forms

def _fermi_sq(x):
    """``tanh(x/2) / (e^{2x} - 1) = 1 / (e^x + 1)^2`` without overflow."""
    e = np.exp(-x)
    return e * e / (1 + e) ** 2


def _bose_sq(x):
    """``coth(x/2) / (e^{2x} - 1) = 1 / (e^x - 1)^2`` without overflow."""
    return 1.0 / np.expm1(x) ** 2


def _far_profile(dtau, r, sigma):
    return f_sigma(np.subtract(dtau, r), sigma) + f_sigma(np.add(dtau, r), sigma)


def g_coefficient_far(E, dtau, a: float, r: float, sigma: float, det: DetectorModel, form: str | None = None):
    """Same-energy correlation coefficient for detectors far apart (``r >= 8 sigma``).

    ``form='exp'`` (default when ``a r >= 5``) is

        -alpha^2 (a^2 / 2 pi) e^{-2 a r} tanh(pi E / a) / (e^{4 pi E / a} - 1) [f(dtau - r) + f(dtau + r)];

    ``form='sinh'`` replaces ``e^{-2 a r}`` with ``1 / (4 sinh^2(a r))``.
    """
    if r < 8 * sigma:
        raise RegimeError(f"far regime needs r >= 8 sigma (r={r:.4g}, 8 sigma={8 * sigma:.4g})")
    if form is None:
        form = "exp" if a * r >= 5 else "sinh"
    if form == "exp":
        if a * r < 5:
            raise RegimeError(f"exponential far form needs a r >= 5 (got {a * r:.4g})")
        decay = np.exp(-2 * a * r)
    elif form == "sinh":
        decay = 0.25 * csch(a * r) ** 2
    else:
        raise DomainError("form must be 'exp' or 'sinh'")
    E = np.asarray(E, dtype=float)
    x = 2 * np.pi * E / a
    alpha = det.coupling(E)
    return -alpha ** 2 * (a * a / (2 * np.pi)) * decay * _fermi_sq(x) * _far_profile(dtau, r, sigma)


def g_coefficient_near(E, dtau, a: float, sigma: float, det: DetectorModel, r: float = 0.0):
    """Same-energy correlation coefficient for coincident detectors.

    ``-alpha^2 ((2E)^2 / 8 pi) coth(pi E / a) / (e^{4 pi E / a} - 1) f(dtau)``,
    valid for ``r <= 0.01 / a`` and ``E sigma >= 10``.
    """
    if r > 0.01 / a:
        raise RegimeError(f"near regime needs r <= 0.01/a (r={r:.4g}, 0.01/a={0.01 / a:.4g})")
    E = np.asarray(E, dtype=float)
    if np.any(E * sigma < 10):
        raise RegimeError(f"near regime needs E sigma >= 10 (min E sigma = {np.min(E) * sigma:.4g})")
    x = 2 * np.pi * E / a
    alpha = det.coupling(E)
    return -alpha ** 2 * (4 * E * E / (8 * np.pi)) * _bose_sq(x) * f_sigma(dtau, sigma)


def g_coefficient_thermal(E, dtau, beta: float, r: float, sigma: float, det: DetectorModel,
                          regime: str | None = None):
    """Thermal-bath counterpart of the accelerated coefficients.

    Far apart: ``-alpha^2 / (8 pi r^2) tanh(beta E / 2) / (e^{2 beta E} - 1) [f(dtau - r) + f(dtau + r)]``.
    Coincident: :func:`g_coefficient_near` with ``a = 2 pi / beta``.
    """
    src = ThermalSource(beta, r)
    regime = regime or resolve_regime(src, sigma)
    if regime == "near":
        return g_coefficient_near(E, dtau, 2 * np.pi / beta, sigma, det, r=r)
    if regime != "far":
        raise RegimeError("no closed form between the near and far regimes; use the numeric pipeline")
    if r < 8 * sigma:
        raise RegimeError(f"far regime needs r >= 8 sigma (r={r:.4g}, 8 sigma={8 * sigma:.4g})")
    E = np.asarray(E, dtype=float)
    alpha = det.coupling(E)
    return -alpha ** 2 / (8 * np.pi * r * r) * _fermi_sq(beta * E) * _far_profile(dtau, r, sigma)


def g_coefficient(E, dtau, source, det: DetectorModel, regime: str | None = None):
    """Dispatch to the closed form that matches ``source`` and ``regime``."""
    regime = regime or resolve_regime(source, det.sigma)
    if isinstance(source, ThermalSource):
        return g_coefficient_thermal(E, dtau, source.beta, source.r, det.sigma, det, regime)
    if regime == "far":
        return g_coefficient_far(E, dtau, source.a, source.r, det.sigma, det)
    if regime == "near":
        return g_coefficient_near(E, dtau, source.a, det.sigma, det, r=source.r)
    raise RegimeError(
        f"r = {source.r:.4g} lies between the near (r <= {0.01 / source.scale:.4g}) and far "
        f"(r >= {8 * det.sigma:.4g}) regimes; only the numeric pipeline applies")


# ---------------------------------------------------------------------------
# numeric pipeline

def h_function_far(S, E_sum, a, r, sigma):
    """Two-peak approximation to ``H(S)`` for ``r >> sigma``, kept exactly as derived in closed form."""
    S = np.asarray(S, dtype=float)
    pref = (8 * np.pi / a) / np.expm1(2 * np.pi * E_sum / a) * csch(a * S) * csch(a * r)

    def peak(w):
        g = np.exp(-w * w / (4 * sigma * sigma))
        with np.errstate(invalid="ignore", divide="ignore"):
            ratio = np.where(w == 0, E_sum / a, np.sin(E_sum * w) * csch(a * w))
        return g * ratio

    return pref * (peak(S + r) - peak(S - r))


def h_function_near(S, E_sum, a, sigma):
    """Leading-order approximation to ``H(S)`` for coincident detectors, kept exactly as derived in closed form."""
    S = np.asarray(S, dtype=float)
    g = np.exp(-S * S / (4 * sigma * sigma))
    small = np.abs(a * S) < 1e-3
    Ss = np.where(small, 1.0, S)
    c = csch(a * Ss)
    val = (E_sum * np.cos(E_sum * Ss) - a * np.cosh(a * Ss) * c * np.sin(E_sum * Ss)) * c * c
    lim = -E_sum * (E_sum ** 2 + a * a) / (3 * a * a)
    val = np.where(small, lim, val)
    return 16 * np.pi * g / (a * a * np.expm1(2 * np.pi * E_sum / a)) * val


def _h_depth(E_sum, a, sigma):
    pole_depth = 2 * np.pi / a
    saddle = 2 * sigma * sigma * E_sum
    margin = min(pole_depth / 2, 1.0 / E_sum)
    delta = min(saddle, pole_depth - margin)
    return delta, min(delta, pole_depth - delta)


def h_function_numeric(S, E_sum: float, a: float, r: float, sigma: float,
                       spec: QuadratureSpec | None = None) -> complex:
    """Four-pole kernel

        H(S) = int dx e^{-i E_sum x} g(sqrt(2) x) / prod sinh(a (x -+ u)/2) sinh(a (x -+ v)/2),

    with ``u = S + r``, ``v = S - r`` and ``g(sqrt(2) x) = exp(-x^2 / 4 sigma^2)``.
    The poles sit on the real axis (the contour passes below them) and in
    rows ``2 pi / a`` apart further down, so the integral is done on a line
    between the real axis and the first lower row.
    """
    if not (a > 0 and r >= 0 and E_sum > 0):
        raise DomainError("h_function_numeric needs a > 0, r >= 0, E_sum > 0")
    spec = spec or QuadratureSpec(rel_tol=1e-10)
    u, v = S + r, S - r
    delta, clearance = _h_depth(E_sum, a, sigma)
    h = a / 2

    def integrand(z):
        g = np.exp(-z * z / (4 * sigma * sigma))
        den = csch(h * (z - u)) * csch(h * (z + u)) * csch(h * (z - v)) * csch(h * (z + v))
        return np.exp(-1j * E_sum * z) * g * den

    half = spec.window_sigmas * sigma
    lo, hi = -half - abs(u) - abs(v), half + abs(u) + abs(v)
    step = min(clearance / 5, 0.25 / E_sum, sigma / 4)
    return complex(integrate_line(integrand, lo, hi, spec, shift=delta, min_step=step).value)


def correlation_kernel_numeric(E_sum: float, a: float, r: float, sigma: float, S,
                               spec: QuadratureSpec | None = None, block: int = 64):
    """``H`` on the grid ``S`` (complex array), evaluated in blocks.

    One trapezoid grid in ``x`` serves a whole block of ``S`` values; the
    panel count doubles until every member of the block has converged
    relative to the largest ``|H|`` in the block.
    """
    from .errors import ConvergenceError

    spec = spec or QuadratureSpec(rel_tol=1e-10)
    S = np.atleast_1d(np.asarray(S, dtype=float))
    delta, clearance = _h_depth(E_sum, a, sigma)
    step = min(clearance / 5, 0.25 / E_sum, sigma / 4)
    half = spec.window_sigmas * sigma / np.sqrt(2)
    h2 = a / 2
    out = np.empty(S.size, dtype=complex)
    for start in range(0, S.size, block):
        Sb = S[start:start + block, None]
        u, v = Sb + r, Sb - r

        def F(t):
            z = t[None, :] - 1j * delta
            g = np.exp(-z * z / (4 * sigma * sigma))
            den = csch(h2 * (z - u)) * csch(h2 * (z + u)) * csch(h2 * (z - v)) * csch(h2 * (z + v))
            return np.exp(-1j * E_sum * z) * g * den

        n = int(spec.panels)
        while 2 * half / n > step:
            n *= 2
        hx = 2 * half / n
        t = -half + hx * np.arange(n + 1)
        f = F(t)
        acc = 0.5 * (f[:, 0] + f[:, -1]) + f[:, 1:-1].sum(axis=1)
        est = hx * acc
        for _ in range(spec.max_doublings + 1):
            acc = acc + F(-half + hx * (np.arange(n) + 0.5)).sum(axis=1)
            n *= 2
            hx /= 2
            new = hx * acc
            if np.max(np.abs(new - est)) <= spec.rel_tol * np.max(np.abs(new)) + 1e-300:
                break
            est = new
        else:
            raise ConvergenceError("H(S) quadrature did not converge", last=new, previous=est)
        out[start:start + block] = new
    return out


def _s_grid(dtau_values, a, r, sigma, E_sum):
    """Grid in ``S`` covering where both ``f(dtau - S)`` and ``H(S)`` matter."""
    dt = np.atleast_1d(dtau_values)
    lo, hi = dt.min() - 8 * sigma, dt.max() + 8 * sigma
    # H decays like exp(-2 a |S - c|) away from its centres and like the
    # Gaussian g(sqrt(2) (S - c)); 18/a leaves a relative tail below 1e-15
    reach = min(8 * np.sqrt(2) * sigma, 18.0 / a) + 2.0 / a
    pieces = []
    for c in ({0.0} if r == 0 else {-r, r}):
        pieces.append((max(lo, c - reach), min(hi, c + reach)))
    step = min(0.05 / a, sigma / 16, 0.3 / E_sum)
    grids = [np.linspace(p, q, int(np.ceil((q - p) / step)) + 1) for p, q in pieces if q > p]
    return grids


def g_coefficient_numeric(E: float, dtau, a: float, r: float, sigma: float, det: DetectorModel,
                          spec: QuadratureSpec | None = None):
    """Same-energy coefficient from the four-pole kernel.

    ``alpha(E)^2 a^4 / (64 pi^3) int dS f(dtau - S) Re H(S)`` at ``E_sum = 2E``,
    with the ``S`` integral done by Simpson's rule on a grid fine enough to
    resolve both ``H`` and ``f``.
    """
    from scipy.integrate import simpson

    dt = np.atleast_1d(np.asarray(dtau, dtype=float))
    E_sum = 2.0 * E
    total = np.zeros(dt.shape)
    for grid in _s_grid(dt, a, r, sigma, E_sum):
        if grid.size < 3:
            continue
        H = correlation_kernel_numeric(E_sum, a, r, sigma, grid, spec).real
        for k, d in enumerate(dt):
            total[k] += simpson(f_sigma(d - grid, sigma) * H, x=grid)
    out = float(det.coupling(E)) ** 2 * a ** 4 / (64 * np.pi ** 3) * total
    return out if np.ndim(dtau) else float(out[0])


# ---------------------------------------------------------------------------
# joint densities and g2

class JointDensity(NamedTuple):
    product_part: float
    same_energy_coefficient: float


def _single_rate(E, source, det):
    return float(planck_response(E, source.scale, det))


def joint_probability(E1, tau1, E2, tau2, source, det: DetectorModel, regime: str | None = None) -> JointDensity:
    """Joint density split into the product of single rates and the same-energy term.

    The same-energy coefficient is reported at ``E = (E1 + E2)/2`` when the
    energies agree within ``1/sigma`` and is zero otherwise.
    """
    prod = _single_rate(E1, source, det) * _single_rate(E2, source, det)
    if abs(E1 - E2) >= 1.0 / det.sigma:
        return JointDensity(prod, 0.0)
    E = 0.5 * (E1 + E2)
    coef = float(g_coefficient(E, tau2 - tau1, source, det, regime))
    return JointDensity(prod, coef)


def _support(det: DetectorModel, source):
    lo, hi = getattr(det.alpha, "support", (0.0, np.inf))
    lo = max(lo, 0.0)
    if not np.isfinite(hi):
        hi = lo + 60.0 * source.scale
    return lo, hi


def _energy_integral(fn, lo, hi, points=None):
    val, _ = quad(fn, lo, hi, epsabs=0.0, epsrel=1e-12, limit=400, points=points)
    return val


def _profile(dtau, source, sigma, regime):
    if regime == "far":
        return _far_profile(dtau, source.r, sigma)
    return f_sigma(dtau, sigma)


def _two_level_strength(source, det, regime):
    """``(g2 - 1) / profile`` in the narrow-band limit of a two-level detector."""
    al = det.alpha
    if regime == "near":
        return -2 * np.pi / al.delta_E
    if isinstance(source, ThermalSource):
        t = np.tanh(source.beta * al.E0 / 2)
        return -np.pi / (2 * source.r ** 2) * t * t / (al.E0 ** 2 * al.delta_E)
    a, r = source.a, source.r
    decay = np.exp(-2 * a * r) if a * r >= 5 else 0.25 * csch(a * r) ** 2
    t = np.tanh(np.pi * al.E0 / a)
    return -2 * np.pi * a * a * decay * t * t / (al.E0 ** 2 * al.delta_E)


def _unit_coefficient(E, source, det, regime):
    """``coefficient(E, dtau) / profile(dtau)`` for the closed forms, without regime checks."""
    alpha = det.coupling(E)
    if regime == "near":
        return -alpha ** 2 * (E * E / (2 * np.pi)) * _bose_sq(2 * np.pi * E / source.scale)
    if isinstance(source, ThermalSource):
        return -alpha ** 2 / (8 * np.pi * source.r ** 2) * _fermi_sq(source.beta * E)
    a, r = source.a, source.r
    decay = np.exp(-2 * a * r) if a * r >= 5 else 0.25 * csch(a * r) ** 2
    return -alpha ** 2 * (a * a / (2 * np.pi)) * decay * _fermi_sq(2 * np.pi * E / a)


def _general_strength(source, det, regime):
    """``(g2 - 1) / profile`` from the energy integrals of the closed-form coefficient."""
    lo, hi = _support(det, source)
    num = _energy_integral(lambda E: E * E * float(_unit_coefficient(E, source, det, regime)), lo, hi)
    intensity = _energy_integral(lambda E: E * _single_rate(E, source, det) if E > 0 else 0.0, lo, hi)
    return num / intensity ** 2


def g2(dtau, source, det: DetectorModel, regime: str | None = None):
    """Second-order coherence ``1 + int dE E^2 coefficient(E, dtau) / I^2``.

    Two-level detectors use the narrow-band limit of the same expression.
    """
    regime = regime or resolve_regime(source, det.sigma)
    if regime == "numeric":
        raise RegimeError(
            f"r = {source.r:.4g} lies between the near (r <= {0.01 / source.scale:.4g}) and far "
            f"(r >= {8 * det.sigma:.4g}) regimes; only the numeric pipeline applies")
    # validate the regime once through the closed form
    g_coefficient(getattr(det.alpha, "E0", 10.0 / det.sigma + source.scale), 0.0, source, det, regime)
    if isinstance(det.alpha, TwoLevel):
        strength = _two_level_strength(source, det, regime)
    else:
        strength = _general_strength(source, det, regime)
    return 1.0 + strength * _profile(np.asarray(dtau, dtype=float), source, det.sigma, regime)


def g2_numeric(dtau, source: AcceleratedSource, det: DetectorModel, energies, weights,
               spec: QuadratureSpec | None = None):
    """``g2`` from the four-pole kernel, with the energy integral on given nodes.

    ``energies`` and ``weights`` define the quadrature rule for both the
    correlation integral and the mean intensity.
    """
    E = np.asarray(energies, dtype=float)
    wts = np.asarray(weights, dtype=float)
    dt = np.atleast_1d(np.asarray(dtau, dtype=float))
    num = np.zeros(dt.shape)
    for e, w in zip(E, wts):
        num += w * e * e * g_coefficient_numeric(e, dt, source.a, source.r, det.sigma, det, spec)
    intensity = float(np.sum(wts * E * planck_response(E, source.a, det)))
    out = 1.0 + num / intensity ** 2
    return out if np.ndim(dtau) else float(out[0])


@dataclass
class CoherenceCurve:
    """Sampled ``g2`` with its regime and source."""

    dtau: np.ndarray
    g2: np.ndarray
    regime: str
    source: str
    meta: dict = field(default_factory=dict)

    def to_csv(self) -> str:
        lines = ["dtau,g2,regime,source"]
        lines += [f"{d:.17g},{g:.17g},{self.regime},{self.source}" for d, g in zip(self.dtau, self.g2)]
        return "\n".join(lines) + "\n"

    def to_json(self) -> str:
        payload = {"regime": self.regime, "source": self.source, "meta": self.meta,
                   "data": [{"dtau": float(d), "g2": float(g)} for d, g in zip(self.dtau, self.g2)]}
        return json.dumps(payload, indent=2, sort_keys=True)


def coherence_curve(dtau_grid, source, det: DetectorModel, regime: str | None = None) -> CoherenceCurve:
    regime = regime or resolve_regime(source, det.sigma)
    grid = np.asarray(dtau_grid, dtype=float)
    vals = np.atleast_1d(g2(grid, source, det, regime))
    return CoherenceCurve(grid, vals, regime, source.label())


# ---------------------------------------------------------------------------
# auxiliary integrals

def sin_sinh_integral(E, a: float):
    """``int dx sin(E x) / sinh(a x) = (pi / a) tanh(pi E / 2a)``."""
    if not a > 0:
        raise DomainError("a must be positive")
    return np.pi / a * np.tanh(np.pi * np.asarray(E) / (2 * a))


def sinh2_kernel_integral(E, a: float):
    """``int dS [E cos(E S) - a coth(a S) sin(E S)] / sinh^2(a S) = -pi E^2 coth(pi E / 2a) / (2 a^2)``."""
    if not a > 0:
        raise DomainError("a must be positive")
    E = np.asarray(E, dtype=float)
    if np.any(E == 0):
        raise DomainError("E = 0 is excluded (coth diverges)")
    return -np.pi * E * E / np.tanh(np.pi * E / (2 * a)) / (2 * a * a)


def _sin_sinh_integrand(E, a):
    def f(x):
        x = np.asarray(x, dtype=float)
        small = np.abs(a * x) < 1e-4
        xs = np.where(small, 1.0, x)
        return np.where(small, E / a * (1 + (a * a - E * E) * x * x / 6), np.sin(E * xs) * csch(a * xs))
    return f


def _sinh2_kernel_integrand(E, a):
    def f(S):
        S = np.asarray(S, dtype=float)
        small = np.abs(a * S) < 1e-3
        Ss = np.where(small, 1.0, S)
        c = csch(a * Ss)
        val = (E * np.cos(E * Ss) - a * np.cosh(a * Ss) * c * np.sin(E * Ss)) * c * c
        return np.where(small, -E * (E * E + a * a) / (3 * a * a), val)
    return f


def sin_sinh_integral_numeric(E: float, a: float, spec: QuadratureSpec | None = None) -> float:
    """Trapezoid quadrature of ``sin(E x) / sinh(a x)`` over ``|x| <= 40/a``."""
    spec = spec or QuadratureSpec(window_sigmas=40.0, rel_tol=1e-13)
    return float(integrate_windowed(_sin_sinh_integrand(E, a), spec, 0.0, 1.0 / a,
                                    min_step=min(0.05 / a, 0.2 / max(E, 1e-300))).value.real)


def sinh2_kernel_integral_numeric(E: float, a: float, spec: QuadratureSpec | None = None) -> float:
    """Trapezoid quadrature of ``[E cos(E S) - a coth(a S) sin(E S)] / sinh^2(a S)``.

    The integrand is regular at ``S = 0`` (its limit is ``-E (E^2 + a^2) / 3a^2``),
    so the real-axis rule needs no principal value.
    """
    spec = spec or QuadratureSpec(window_sigmas=40.0, rel_tol=1e-13)
    return float(integrate_windowed(_sinh2_kernel_integrand(E, a), spec, 0.0, 1.0 / a,
                                    min_step=min(0.05 / a, 0.2 / max(E, 1e-300))).value.real)
