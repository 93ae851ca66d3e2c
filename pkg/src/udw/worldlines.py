"""Timelike worldlines in Minkowski spacetime.

Coordinates use natural units (c = 1) and signature (+, -, -, -).  Every
worldline exposes its position, its first few proper-time derivatives, and
the squared interval between two of its own events,

    chord_interval(tau, y) = (x(tau + y/2) - x(tau - y/2))**2,

which is the only geometric input the detector response needs.  Concrete
variants override ``chord_interval`` with a form that stays accurate for
both tiny and huge ``y``.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import lru_cache
from math import factorial
from typing import Callable, NamedTuple, Sequence

import numpy as np
from scipy.integrate import solve_ivp
from scipy.optimize import brentq

from .errors import DomainError, InvariantError

__all__ = [
    "Event",
    "Worldline",
    "UniformAcceleration",
    "Static",
    "VariableAcceleration",
    "SingleAxis",
    "PairGeometry",
    "interval_squared",
    "light_delay",
    "position",
    "derivatives",
    "proper_time_of_coordinate_time",
    "proper_acceleration_squared",
    "check_timelike",
    "fd_derivative",
]


class Event(NamedTuple):
    """A spacetime point (x0, x1, x2, x3).  Fields may be arrays."""

    x0: float = 0.0
    x1: float = 0.0
    x2: float = 0.0
    x3: float = 0.0

    def __add__(self, other):
        return Event(*(np.add(p, q) for p, q in zip(self, other)))

    def __sub__(self, other):
        return Event(*(np.subtract(p, q) for p, q in zip(self, other)))

    def scale(self, c):
        return Event(*(np.multiply(c, p) for p in self))


def interval_squared(e1: Event, e2: Event):
    """Squared interval (dx0)^2 - |dx|^2 between two events."""
    d = Event(*e1) - Event(*e2)
    return d.x0 ** 2 - d.x1 ** 2 - d.x2 ** 2 - d.x3 ** 2


def minkowski_square(e: Event):
    return e.x0 ** 2 - e.x1 ** 2 - e.x2 ** 2 - e.x3 ** 2


def light_delay(a: float, d: float) -> float:
    """Proper time a light ray needs between two accelerated observers.

    Parameters
    ----------
    a : float
        Common proper acceleration, must be positive.
    d : float
        Proper separation of the pair, non-negative.

    Returns
    -------
    float
        ``(2/a) asinh(a d / 2)``, which tends to ``d`` as ``a d -> 0``.
    """
    if not a > 0:
        raise DomainError(f"light_delay needs a > 0 (got a={a}); use d directly for inertial pairs")
    if not d >= 0:
        raise DomainError(f"light_delay needs d >= 0 (got d={d})")
    return 2.0 / a * np.arcsinh(a * d / 2.0)


@dataclass(frozen=True)
class PairGeometry:
    """Two detectors with common acceleration ``a`` held at proper distance ``d``."""

    a: float
    d: float
    r: float = field(init=False)

    def __post_init__(self):
        object.__setattr__(self, "r", float(light_delay(self.a, self.d)))


# ---------------------------------------------------------------------------
# finite differences

@lru_cache(maxsize=None)
def _fd_weights(order: int, half_width: int) -> np.ndarray:
    """Central finite-difference weights on the nodes -m..m (unit spacing)."""
    nodes = np.arange(-half_width, half_width + 1, dtype=float)
    n = nodes.size
    vander = np.vander(nodes, n, increasing=True).T
    rhs = np.zeros(n)
    rhs[order] = factorial(order)
    return np.linalg.solve(vander, rhs)


# step scale per derivative order: roughly eps**(1/(order + 4)) for a
# fourth-order central stencil, so truncation and rounding errors balance
_FD_STEP = {1: 1e-3, 2: 2e-3, 3: 4e-3, 4: 6e-3, 5: 8e-3}


def fd_derivative(fun: Callable, tau: float, order: int, step: float | None = None):
    """Fourth-order central finite difference of ``fun`` at ``tau``."""
    if order < 1:
        raise DomainError("derivative order must be >= 1")
    h = step if step is not None else _FD_STEP.get(order, 1e-2) * max(1.0, abs(tau))
    m = (order + 1) // 2 + 1
    w = _fd_weights(order, m)
    vals = [np.asarray(fun(tau + k * h), dtype=float) for k in range(-m, m + 1)]
    acc = sum(wk * vk for wk, vk in zip(w, vals))
    return acc / h ** order


# ---------------------------------------------------------------------------
# worldline variants

class Worldline:
    """Base class for a future-directed timelike worldline.

    Subclasses implement :meth:`_position`.  The default derivatives use
    central finite differences; analytic variants override them.
    """

    window: tuple = (-np.inf, np.inf)

    def _check_window(self, tau):
        t = np.asarray(tau, dtype=float)
        lo, hi = self.window
        if np.any(t < lo) or np.any(t > hi) or np.any(~np.isfinite(t)):
            raise DomainError(f"proper time outside evaluation window [{lo}, {hi}]")

    def _position(self, tau) -> Event:
        raise NotImplementedError

    def position(self, tau) -> Event:
        self._check_window(tau)
        return self._position(tau)

    def derivatives(self, tau: float, order: int = 1) -> list:
        """Return ``[x', x'', ...]`` up to ``order`` as Events."""
        if order not in (1, 2, 3):
            raise DomainError("order must be 1, 2 or 3")
        self._check_window(tau)
        out = []
        for k in range(1, order + 1):
            comps = fd_derivative(lambda t: np.array(self._position(t)), tau, k)
            out.append(Event(*comps))
        return out

    def chord_interval(self, tau: float, y):
        """Squared interval between x(tau + y/2) and x(tau - y/2)."""
        y = np.asarray(y, dtype=float)
        return interval_squared(self.position(tau + y / 2), self.position(tau - y / 2))

    def proper_acceleration_squared(self, tau: float) -> float:
        """-x''.x'', the square of the proper acceleration."""
        acc = self.derivatives(tau, 2)[1]
        return float(-minkowski_square(acc))

    def chord_quartic(self, tau: float) -> float:
        """Limit of ``(chord_interval(tau, y) - y^2) / y^4`` as ``y -> 0``.

        For a smooth worldline this is a quarter of the squared proper
        acceleration divided by three.
        """
        return self.proper_acceleration_squared(tau) / 12.0

    def proper_time_of_coordinate_time(self, t: float) -> float:
        lo, hi = self.window
        lo = -1e6 if not np.isfinite(lo) else lo
        hi = 1e6 if not np.isfinite(hi) else hi
        x0 = lambda s: float(self._position(s).x0) - t
        f_lo, f_hi = x0(lo), x0(hi)
        if f_lo * f_hi > 0:
            raise DomainError(f"coordinate time {t} not reached inside the window")
        tau = brentq(x0, lo, hi, xtol=1e-13, rtol=4 * np.finfo(float).eps, maxiter=500)
        if self.derivatives(tau, 1)[0].x0 <= 0:
            raise InvariantError("x0 is not increasing along the worldline")
        return tau


@dataclass(frozen=True)
class UniformAcceleration(Worldline):
    """Hyperbolic motion along x1 with proper acceleration ``a``.

    ``x(tau) = (sinh(a tau)/a, (cosh(a tau) - 1)/a, 0, 0) + offset`` so the
    detector is at rest at the offset point when ``tau = 0``.
    """

    a: float
    offset: Event = Event()
    window: tuple = (-np.inf, np.inf)

    def __post_init__(self):
        if not self.a > 0:
            raise DomainError("UniformAcceleration needs a > 0; use Static for a = 0")
        object.__setattr__(self, "offset", Event(*self.offset))

    def _position(self, tau):
        a = self.a
        t = np.asarray(tau, dtype=float)
        s = np.sinh(a * t / 2)
        base = Event(np.sinh(a * t) / a, 2 * s * s / a, np.zeros_like(t), np.zeros_like(t))
        return base + self.offset

    def derivatives(self, tau, order=1):
        if order not in (1, 2, 3):
            raise DomainError("order must be 1, 2 or 3")
        self._check_window(tau)
        a = self.a
        ch, sh = np.cosh(a * tau), np.sinh(a * tau)
        z = 0.0 * tau
        seq = [Event(ch, sh, z, z), Event(a * sh, a * ch, z, z), Event(a * a * ch, a * a * sh, z, z)]
        return seq[:order]

    def chord_interval(self, tau, y):
        y = np.asarray(y, dtype=float)
        with np.errstate(over="ignore"):
            s = np.sinh(self.a * y / 2)
            return 4.0 / self.a ** 2 * s * s

    def proper_acceleration_squared(self, tau):
        return self.a ** 2

    def proper_time_of_coordinate_time(self, t):
        return float(np.arcsinh(self.a * (t - self.offset.x0)) / self.a)


@dataclass(frozen=True)
class Static(Worldline):
    """Inertial observer at rest at ``position`` (its x0 is a clock offset)."""

    location: Event = Event()
    window: tuple = (-np.inf, np.inf)

    def __post_init__(self):
        object.__setattr__(self, "location", Event(*self.location))

    def _position(self, tau):
        t = np.asarray(tau, dtype=float)
        p = self.location
        one = np.ones_like(t)
        return Event(t + p.x0, p.x1 * one, p.x2 * one, p.x3 * one)

    def derivatives(self, tau, order=1):
        if order not in (1, 2, 3):
            raise DomainError("order must be 1, 2 or 3")
        self._check_window(tau)
        return [Event(1.0, 0.0, 0.0, 0.0)] + [Event()] * (order - 1)

    def chord_interval(self, tau, y):
        y = np.asarray(y, dtype=float)
        return y * y

    def proper_acceleration_squared(self, tau):
        return 0.0

    def proper_time_of_coordinate_time(self, t):
        return float(t - self.location.x0)


class VariableAcceleration(Worldline):
    """Motion along x1 with a prescribed proper acceleration profile ``a(tau)``.

    The rapidity obeys ``theta' = a`` with ``theta(tau0) = 0`` and the
    light-cone coordinates ``u = x0 + x1``, ``v = x0 - x1`` obey
    ``u' = exp(theta)``, ``v' = exp(-theta)``.  The worldline starts from
    the origin at ``tau0``.

    Chord intervals are computed in the frame comoving at the midpoint, where
    ``u(tau + y/2) - u(tau - y/2)`` is a sum of two positive pieces.  That
    keeps full relative accuracy for small ``y`` and avoids overflow of the
    lab-frame coordinates for large ``y``.

    Parameters
    ----------
    a_of_tau : callable
        Proper acceleration as a function of proper time.
    window : (float, float)
        Evaluation window; must be finite.
    tau0 : float
        Proper time at which the detector sits at rest at the origin.
    breakpoints : sequence of float
        Proper times where ``a`` is not smooth.  The integrator restarts there.
    """

    def __init__(self, a_of_tau: Callable, window=(-100.0, 100.0), tau0: float = 0.0,
                 breakpoints: Sequence[float] = (), rtol: float = 1e-12):
        lo, hi = window
        if not (np.isfinite(lo) and np.isfinite(hi) and lo < tau0 < hi):
            raise DomainError("VariableAcceleration needs a finite window containing tau0")
        self.a_of_tau = a_of_tau
        self.window = (float(lo), float(hi))
        self.tau0 = float(tau0)
        self.breakpoints = tuple(sorted(float(b) for b in breakpoints))
        self.rtol = rtol
        self._local = lru_cache(maxsize=64)(self._solve_from)

    @property
    def _global(self):
        # lab-frame solution, built on first use; chord intervals never need it
        return self._local(self.tau0, *self.window)

    def _rhs(self, s, y):
        th = y[0]
        return [self.a_of_tau(s), np.exp(th), np.exp(-th)]

    def _segments(self, start, stop):
        inner = [b for b in self.breakpoints if min(start, stop) < b < max(start, stop)]
        if stop < start:
            inner = inner[::-1]
        pts = [start, *inner, stop]
        return list(zip(pts[:-1], pts[1:]))

    def _solve_branch(self, start, stop):
        y0 = np.zeros(3)
        pieces = []
        for s0, s1 in self._segments(start, stop):
            if s0 == s1:
                continue
            sol = solve_ivp(self._rhs, (s0, s1), y0, method="DOP853", dense_output=True,
                            rtol=self.rtol, atol=1e-100)
            if not sol.success:
                raise InvariantError(f"trajectory integration failed: {sol.message}")
            pieces.append((min(s0, s1), max(s0, s1), sol.sol))
            y0 = sol.y[:, -1]
        return pieces

    def _solve_from(self, tau, lo, hi):
        """Solutions (theta, u, v) on ``[lo, hi]`` relative to their values at ``tau``."""
        return self._solve_branch(tau, hi), self._solve_branch(tau, lo)

    @staticmethod
    def _eval(pieces, s):
        s = np.atleast_1d(np.asarray(s, dtype=float))
        out = np.zeros((3, s.size))
        for lo, hi, sol in pieces:
            m = (s >= lo) & (s <= hi)
            if np.any(m):
                out[:, m] = sol(s[m])
        return out

    def _state(self, pieces_pair, tau_ref, s):
        s = np.atleast_1d(np.asarray(s, dtype=float))
        fwd, bwd = pieces_pair
        out = np.zeros((3, s.size))
        m = s >= tau_ref
        if np.any(m):
            out[:, m] = self._eval(fwd, s[m])
        if np.any(~m):
            out[:, ~m] = self._eval(bwd, s[~m])
        return out

    def rapidity(self, tau):
        self._check_window(tau)
        return self._state(self._global, self.tau0, tau)[0]

    def _position(self, tau):
        t = np.asarray(tau, dtype=float)
        th, u, v = self._state(self._global, self.tau0, t)
        shape = t.shape
        x0 = ((u + v) / 2).reshape(shape)
        x1 = ((u - v) / 2).reshape(shape)
        z = np.zeros(shape)
        if shape == ():
            return Event(float(x0), float(x1), 0.0, 0.0)
        return Event(x0, x1, z, z)

    def derivatives(self, tau, order=1):
        if order not in (1, 2, 3):
            raise DomainError("order must be 1, 2 or 3")
        self._check_window(tau)
        th = float(self.rapidity(tau)[0])
        a = float(self.a_of_tau(tau))
        ch, sh = np.cosh(th), np.sinh(th)
        out = [Event(ch, sh, 0.0, 0.0), Event(a * sh, a * ch, 0.0, 0.0)]
        if order >= 3:
            adot = float(fd_derivative(self.a_of_tau, tau, 1))
            out.append(Event(adot * sh + a * a * ch, adot * ch + a * a * sh, 0.0, 0.0))
        return out[:order]

    def proper_acceleration_squared(self, tau):
        return float(self.a_of_tau(tau)) ** 2

    def chord_quartic(self, tau):
        # one-sided accelerations, so a jump in a(tau) exactly at tau is handled
        h = 1e-9 * max(1.0, abs(tau))
        ap, am = float(self.a_of_tau(tau + h)), float(self.a_of_tau(tau - h))
        return (ap * ap + am * am) / 24.0 - (ap - am) ** 2 / 64.0

    def chord_interval(self, tau, y):
        y = np.asarray(y, dtype=float)
        self._check_window(tau + np.abs(y) / 2)
        self._check_window(tau - np.abs(y) / 2)
        ay = np.abs(y).ravel()
        # span rounded up to a power of two so nearby calls share one solve
        half = 2.0 ** np.ceil(np.log2(max(ay.max(initial=0.0) / 2, 1e-3)))
        lo, hi = self.window
        pieces = self._local(float(tau), max(lo, tau - half), min(hi, tau + half))
        _, up, vp = self._state(pieces, tau, tau + ay / 2)
        _, um, vm = self._state(pieces, tau, tau - ay / 2)
        du = up - um
        dv = vp - vm
        with np.errstate(over="ignore"):
            return (du * dv).reshape(y.shape)


class SingleAxis(Worldline):
    """Motion along x1 given through light-cone coordinates ``u(tau), v(tau)``.

    ``x0 = (u + v)/2`` and ``x1 = (u - v)/2``.  Proper-time normalization
    requires ``u'(tau) v'(tau) = 1``.  Optional ``u_derivative(tau, n)`` and
    ``v_derivative(tau, n)`` callables supply exact derivatives of any order,
    which the residue method needs beyond third order.
    """

    def __init__(self, u: Callable, v: Callable, u_derivative: Callable | None = None,
                 v_derivative: Callable | None = None, window=(-np.inf, np.inf)):
        self.u = u
        self.v = v
        self.u_derivative = u_derivative
        self.v_derivative = v_derivative
        self.window = tuple(window)

    def _position(self, tau):
        u = np.asarray(self.u(tau), dtype=float)
        v = np.asarray(self.v(tau), dtype=float)
        z = np.zeros_like(u)
        return Event((u + v) / 2, (u - v) / 2, z, z)

    def light_cone_derivative(self, which: str, tau: float, n: int) -> float:
        """n-th derivative of ``u`` or ``v`` at ``tau``."""
        self._check_window(tau)
        exact = self.u_derivative if which == "u" else self.v_derivative
        if exact is not None:
            return float(exact(tau, n))
        if n > 5:
            raise DomainError(f"derivative of order {n} needs an analytic {which}_derivative")
        return float(fd_derivative(self.u if which == "u" else self.v, tau, n))

    def derivatives(self, tau, order=1):
        if order not in (1, 2, 3):
            raise DomainError("order must be 1, 2 or 3")
        out = []
        for k in range(1, order + 1):
            du = self.light_cone_derivative("u", tau, k)
            dv = self.light_cone_derivative("v", tau, k)
            out.append(Event((du + dv) / 2, (du - dv) / 2, 0.0, 0.0))
        return out

    def normalization_defect(self, tau) -> float:
        """``u' v' - 1`` at ``tau``."""
        return (self.light_cone_derivative("u", tau, 1) * self.light_cone_derivative("v", tau, 1)) - 1.0

    def proper_acceleration_squared(self, tau):
        return -self.light_cone_derivative("u", tau, 2) * self.light_cone_derivative("v", tau, 2)

    def chord_interval(self, tau, y):
        y = np.asarray(y, dtype=float)
        self._check_window(tau + np.abs(y) / 2)
        self._check_window(tau - np.abs(y) / 2)
        du = np.asarray(self.u(tau + y / 2)) - np.asarray(self.u(tau - y / 2))
        dv = np.asarray(self.v(tau + y / 2)) - np.asarray(self.v(tau - y / 2))
        return du * dv


# ---------------------------------------------------------------------------
# functional aliases

def position(w: Worldline, tau) -> Event:
    return w.position(tau)


def derivatives(w: Worldline, tau, order: int = 1) -> list:
    return w.derivatives(tau, order)


def proper_time_of_coordinate_time(w: Worldline, t: float) -> float:
    return w.proper_time_of_coordinate_time(t)


def proper_acceleration_squared(w: Worldline, tau: float) -> float:
    return w.proper_acceleration_squared(tau)


def check_timelike(w: Worldline, taus, tol: float = 1e-9) -> float:
    """Raise :class:`InvariantError` unless ``x'.x' = 1`` at every ``tau``.

    The defect is measured relative to ``(x0')^2``: at rapidity ``theta`` the
    components are of size ``cosh(theta)`` and their squares cancel to one,
    so an absolute test would only measure rounding.  Returns the largest
    defect seen.
    """
    worst = 0.0
    for t in np.atleast_1d(taus):
        d = w.derivatives(float(t), 1)[0]
        defect = abs(float(minkowski_square(d)) - 1.0) / max(1.0, float(d.x0) ** 2)
        worst = max(worst, defect)
        if defect > tol or d.x0 <= 0:
            raise InvariantError(f"worldline not unit timelike at tau={t}: defect {defect:.3e}")
    return worst
