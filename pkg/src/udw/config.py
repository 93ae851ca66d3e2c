"""Run configuration for the command line: JSON in, validated dataclasses out.

Every validation failure raises :class:`ConfigError` naming the offending
field path, e.g. ``scan.points: must be >= 2 (got 1)``.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field, asdict, fields
from typing import Any

import numpy as np

from .errors import DomainError, RegimeError, UDWError
from .quadrature import QuadratureSpec

MODES = ("spectrum", "g2", "compare-thermal", "trajectory-scan", "validate")
TRAJECTORIES = ("uniform", "static", "switch", "tanh", "thermal")
ALPHAS = ("constant", "two_level")
SOURCES = ("accelerated", "thermal")
FORMATS = ("csv", "json")


class ConfigError(UDWError, ValueError):
    """Invalid run configuration; ``path`` names the field."""

    def __init__(self, path: str, message: str):
        super().__init__(f"{path}: {message}")
        self.path = path


@dataclass(frozen=True)
class TrajectoryConfig:
    """Worldline descriptor.

    ``uniform`` uses ``a``; ``switch`` jumps from ``a`` to ``a2`` at
    ``tau_switch``; ``tanh`` ramps smoothly from ``a`` to ``a2`` over
    ``width``; ``thermal`` is a static detector in a bath at ``beta``
    (default ``2 pi / a``); ``static`` is inertial in the vacuum.
    ``tau`` is the evaluation time and ``taus`` the list used by
    ``trajectory-scan``.
    """

    kind: str = "uniform"
    a: float = 1.0
    a2: float | None = None
    tau_switch: float = 0.0
    width: float = 1.0
    beta: float | None = None
    tau: float = 0.0
    taus: tuple = ()


@dataclass(frozen=True)
class AlphaConfig:
    kind: str = "constant"
    value: float = 1.0
    E0: float | None = None
    delta_E: float | None = None


@dataclass(frozen=True)
class DetectorConfig:
    sigma: float = 50.0
    alpha: AlphaConfig = field(default_factory=AlphaConfig)


@dataclass(frozen=True)
class ScanConfig:
    """Grid of energies (``spectrum``, ``compare-thermal``, ``trajectory-scan``) or delays (``g2``)."""

    min: float = 0.5
    max: float = 3.0
    points: int = 64

    def grid(self) -> np.ndarray:
        return np.linspace(self.min, self.max, self.points)


@dataclass(frozen=True)
class SourceConfig:
    """Pair source for ``g2``: accelerated (``a`` with ``r`` or proper distance ``d``) or thermal (``beta``, ``r``)."""

    kind: str = "accelerated"
    a: float = 1.0
    r: float | None = None
    d: float | None = None
    beta: float | None = None


@dataclass(frozen=True)
class OutputConfig:
    format: str = "csv"
    path: str | None = None


@dataclass(frozen=True)
class RunConfig:
    mode: str = "spectrum"
    trajectory: TrajectoryConfig = field(default_factory=TrajectoryConfig)
    detector: DetectorConfig = field(default_factory=DetectorConfig)
    scan: ScanConfig = field(default_factory=ScanConfig)
    quadrature: QuadratureSpec = field(default_factory=QuadratureSpec)
    output: OutputConfig = field(default_factory=OutputConfig)
    source: SourceConfig = field(default_factory=SourceConfig)
    tolerances: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        d = asdict(self)
        d["trajectory"]["taus"] = list(self.trajectory.taus)
        d["tolerances"] = {str(k): v for k, v in self.tolerances.items()}
        return d

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2, sort_keys=True)


# ---------------------------------------------------------------------------
# parsing

def _build(cls, data, path):
    if data is None:
        return cls()
    if not isinstance(data, dict):
        raise ConfigError(path, f"expected an object, got {type(data).__name__}")
    names = {f.name: f for f in fields(cls)}
    for key in data:
        if key not in names:
            raise ConfigError(f"{path}.{key}", f"unknown key (allowed: {', '.join(sorted(names))})")
    kwargs = {}
    for key, value in data.items():
        kwargs[key] = _coerce(names[key], value, f"{path}.{key}")
    try:
        return cls(**kwargs)
    except (TypeError, ValueError) as exc:
        raise ConfigError(path, str(exc)) from exc


def _coerce(f, value, path):
    t = str(f.type)
    if value is None:
        if "None" in t:
            return None
        raise ConfigError(path, "must not be null")
    if t.startswith("int"):
        if isinstance(value, bool) or not isinstance(value, int):
            raise ConfigError(path, f"must be an integer (got {value!r})")
        return value
    if t.startswith("float"):
        if isinstance(value, bool) or not isinstance(value, (int, float)):
            raise ConfigError(path, f"must be a number (got {value!r})")
        return float(value)
    if t.startswith("str"):
        if not isinstance(value, str):
            raise ConfigError(path, f"must be a string (got {value!r})")
        return value
    if t == "tuple":
        if not isinstance(value, (list, tuple)) or not all(isinstance(v, (int, float)) for v in value):
            raise ConfigError(path, "must be a list of numbers")
        return tuple(float(v) for v in value)
    return value


def _positive(value, path):
    if value is None or not value > 0:
        raise ConfigError(path, f"must be positive (got {value!r})")


def _choice(value, options, path):
    if value not in options:
        raise ConfigError(path, f"must be one of {', '.join(options)} (got {value!r})")


def from_dict(data: dict) -> RunConfig:
    """Parse and validate a configuration mapping."""
    if not isinstance(data, dict):
        raise ConfigError("$", "configuration must be a JSON object")
    allowed = {f.name for f in fields(RunConfig)}
    for key in data:
        if key not in allowed:
            raise ConfigError(key, f"unknown key (allowed: {', '.join(sorted(allowed))})")
    mode = data.get("mode", "spectrum")
    _choice(mode, MODES, "mode")
    det = data.get("detector") or {}
    if not isinstance(det, dict):
        raise ConfigError("detector", "expected an object")
    alpha = _build(AlphaConfig, det.get("alpha"), "detector.alpha")
    detector = _build(DetectorConfig, {k: v for k, v in det.items() if k != "alpha"}, "detector")
    detector = DetectorConfig(detector.sigma, alpha)
    try:
        quadrature = _build(QuadratureSpec, data.get("quadrature"), "quadrature")
    except DomainError as exc:
        raise ConfigError("quadrature", str(exc)) from exc
    tol = data.get("tolerances") or {}
    if not isinstance(tol, dict):
        raise ConfigError("tolerances", "expected an object mapping criterion id to tolerance")
    tolerances = {}
    for k, v in tol.items():
        try:
            cid = int(k)
        except ValueError:
            raise ConfigError(f"tolerances.{k}", "keys must be criterion numbers") from None
        if isinstance(v, bool) or not isinstance(v, (int, float)) or not v >= 0:
            raise ConfigError(f"tolerances.{k}", f"must be a non-negative number (got {v!r})")
        tolerances[cid] = float(v)
    cfg = RunConfig(
        mode=mode,
        trajectory=_build(TrajectoryConfig, data.get("trajectory"), "trajectory"),
        detector=detector,
        scan=_build(ScanConfig, data.get("scan"), "scan"),
        quadrature=quadrature,
        output=_build(OutputConfig, data.get("output"), "output"),
        source=_build(SourceConfig, data.get("source"), "source"),
        tolerances=tolerances,
    )
    validate(cfg)
    return cfg


def read_json(path) -> dict:
    """Raw configuration mapping from a JSON file."""
    try:
        with open(path) as fh:
            return json.load(fh)
    except OSError as exc:
        raise ConfigError("--config", f"cannot read {path}: {exc.strerror}") from exc
    except json.JSONDecodeError as exc:
        raise ConfigError("--config", f"invalid JSON at line {exc.lineno}: {exc.msg}") from exc


def load(path) -> RunConfig:
    return from_dict(read_json(path))


# ---------------------------------------------------------------------------
# semantic checks

def validate(cfg: RunConfig) -> None:
    """Check the descriptors against the regime assertions the chosen mode will hit."""
    _choice(cfg.output.format, FORMATS, "output.format")
    if cfg.mode == "validate":
        for cid in cfg.tolerances:
            if cid not in range(1, 11):
                raise ConfigError(f"tolerances.{cid}", "criterion ids run from 1 to 10")
        return
    s = cfg.scan
    if s.points < 2:
        raise ConfigError("scan.points", f"must be >= 2 (got {s.points})")
    if not s.max > s.min:
        raise ConfigError("scan.max", f"grid must be strictly increasing (min={s.min}, max={s.max})")
    _positive(cfg.detector.sigma, "detector.sigma")
    al = cfg.detector.alpha
    _choice(al.kind, ALPHAS, "detector.alpha.kind")
    if al.kind == "two_level":
        _positive(al.E0, "detector.alpha.E0")
        _positive(al.delta_E, "detector.alpha.delta_E")
    try:
        detector_model(cfg)
    except RegimeError as exc:
        raise ConfigError("detector.alpha", str(exc)) from exc
    if cfg.mode == "g2":
        _check_source(cfg)
        return
    _check_trajectory(cfg)
    if s.min <= 0:
        raise ConfigError("scan.min", f"energies must be positive (got {s.min})")
    if cfg.mode == "trajectory-scan" and len(cfg.trajectory.taus) == 0:
        raise ConfigError("trajectory.taus", "trajectory-scan needs a non-empty list of proper times")
    if cfg.mode == "compare-thermal" and cfg.trajectory.kind != "uniform":
        raise ConfigError("trajectory.kind", "compare-thermal needs a uniform trajectory")


def _check_trajectory(cfg):
    t = cfg.trajectory
    _choice(t.kind, TRAJECTORIES, "trajectory.kind")
    if t.kind in ("uniform", "switch", "tanh", "thermal") and t.beta is None:
        _positive(t.a, "trajectory.a")
    if t.kind in ("switch", "tanh"):
        _positive(t.a2, "trajectory.a2")
    if t.kind == "tanh":
        _positive(t.width, "trajectory.width")
    if t.kind == "thermal" and t.beta is not None:
        _positive(t.beta, "trajectory.beta")
    taus = t.taus if cfg.mode == "trajectory-scan" else (t.tau,)
    if t.kind in ("switch", "tanh"):
        half = cfg.quadrature.window_sigmas * cfg.detector.sigma / 2
        lo, hi = -2000.0, 2000.0
        for k, tau in enumerate(taus):
            if not lo + half <= tau <= hi - half:
                field_ = "trajectory.taus" if cfg.mode == "trajectory-scan" else "trajectory.tau"
                raise ConfigError(field_, f"tau={tau} leaves the worldline window [{lo}, {hi}] "
                                          f"once the quadrature half-width {half} is added")


def _check_source(cfg):
    s = cfg.source
    _choice(s.kind, SOURCES, "source.kind")
    if s.kind == "accelerated":
        _positive(s.a, "source.a")
        if s.r is not None and s.d is not None:
            raise ConfigError("source", "give either r (light delay) or d (proper distance), not both")
        if s.d is not None and s.d < 0:
            raise ConfigError("source.d", f"must be non-negative (got {s.d})")
    else:
        _positive(s.beta, "source.beta")
    if s.r is not None and s.r < 0:
        raise ConfigError("source.r", f"must be non-negative (got {s.r})")
    from .coherence import resolve_regime
    src = pair_source(cfg)
    if resolve_regime(src, cfg.detector.sigma) == "numeric":
        raise ConfigError("source.r", f"r = {src.r:.4g} is neither near (r <= {0.01 / src.scale:.4g}) nor far "
                                      f"(r >= 8 sigma = {8 * cfg.detector.sigma:.4g})")


# ---------------------------------------------------------------------------
# builders shared with the command line

def detector_model(cfg: RunConfig):
    from .response import Constant, DetectorModel, TwoLevel
    al = cfg.detector.alpha
    alpha = TwoLevel(al.E0, al.delta_E, al.value) if al.kind == "two_level" else Constant(al.value)
    return DetectorModel(cfg.detector.sigma, alpha)


def pair_source(cfg: RunConfig):
    from .coherence import AcceleratedSource, ThermalSource
    from .worldlines import light_delay
    s = cfg.source
    if s.kind == "thermal":
        return ThermalSource(s.beta, s.r or 0.0)
    r = light_delay(s.a, s.d) if s.d is not None else (s.r or 0.0)
    return AcceleratedSource(s.a, r)


def build_worldline(t: TrajectoryConfig):
    """Worldline for a trajectory descriptor (``thermal`` has none and returns ``None``)."""
    from .worldlines import Static, UniformAcceleration, VariableAcceleration
    if t.kind == "uniform":
        return UniformAcceleration(t.a)
    if t.kind == "static":
        return Static()
    if t.kind == "switch":
        a1, a2, ts = t.a, t.a2, t.tau_switch
        return VariableAcceleration(lambda tau: np.where(np.asarray(tau) < ts, a1, a2),
                                    window=(-2000.0, 2000.0), breakpoints=(ts,))
    if t.kind == "tanh":
        a1, a2, ts, w = t.a, t.a2, t.tau_switch, t.width
        return VariableAcceleration(lambda tau: a1 + (a2 - a1) * 0.5 * (1 + np.tanh((np.asarray(tau) - ts) / w)),
                                    window=(-2000.0, 2000.0))
    return None
