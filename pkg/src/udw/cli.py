"""Command line front end.

    udw --config run.json [--mode MODE] [--jobs N] [--output PATH] [--format csv|json]

Exit codes: 0 success, 1 validation failure, 2 configuration error,
3 numeric non-convergence at one or more grid points.
"""

from __future__ import annotations

import argparse
import json
import logging
import sys
from concurrent.futures import ProcessPoolExecutor
from functools import lru_cache

import numpy as np

from . import __version__
from .config import (MODES, ConfigError, RunConfig, build_worldline, detector_model, from_dict, read_json,
                     pair_source)
from .errors import UDWError

log = logging.getLogger("udw")

EXIT_OK, EXIT_VALIDATION, EXIT_CONFIG, EXIT_CONVERGENCE = 0, 1, 2, 3


# ---------------------------------------------------------------------------
# per-point workers (module level so they pickle)

@lru_cache(maxsize=8)
def _context(cfg_json: str):
    cfg = from_dict(json.loads(cfg_json))
    return cfg, detector_model(cfg), build_worldline(cfg.trajectory)


def _point(cfg_json: str, E: float, tau: float, kind: str | None = None):
    """One response evaluation; returns ``(p, p_err, method, failure)``."""
    from .response import response_general, thermal_static_response
    cfg, det, w = _context(cfg_json)
    t = cfg.trajectory
    label = "accelerated" if kind == "uniform" else "quadrature"
    kind = kind or t.kind
    try:
        if kind == "thermal":
            beta = t.beta if t.beta is not None else 2 * np.pi / t.a
            r = thermal_static_response(E, beta, det, cfg.quadrature)
            return r.value, r.error, "thermal", None
        r = response_general(w, E, tau, det, cfg.quadrature)
        return r.value, r.error, label, None
    except UDWError as exc:
        return float("nan"), float("nan"), "failed", f"{type(exc).__name__}: {exc}"


def _star(args):
    return _point(*args)


def _map(tasks, jobs):
    if jobs > 1 and len(tasks) > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            return list(pool.map(_star, tasks))
    return [_star(t) for t in tasks]


# ---------------------------------------------------------------------------
# output

def _meta(cfg: RunConfig, failures):
    return {"version": __version__, "config": cfg.to_dict(), "failures": failures}


def _fmt(x):
    return f"{x:.17g}"


def _write(cfg: RunConfig, header, rows, failures):
    """Write rows as CSV (plus a ``.meta.json`` sidecar) or as one JSON document."""
    path = cfg.output.path
    meta = _meta(cfg, failures)
    if cfg.output.format == "json":
        data = [dict(zip(header, r)) for r in rows]
        text = json.dumps({**meta, "columns": list(header), "data": data}, indent=2, sort_keys=True) + "\n"
        sidecar = None
    else:
        lines = [",".join(header)]
        lines += [",".join(_fmt(v) if isinstance(v, float) else str(v) for v in r) for r in rows]
        text = "\n".join(lines) + "\n"
        sidecar = json.dumps(meta, indent=2, sort_keys=True) + "\n"
    if path:
        with open(path, "w") as fh:
            fh.write(text)
        if sidecar is not None:
            with open(path + ".meta.json", "w") as fh:
                fh.write(sidecar)
    else:
        sys.stdout.write(text)


def _failures(grid_rows, results):
    out = []
    for key, (_, _, _, err) in zip(grid_rows, results):
        if err:
            out.append({"point": key, "error": err})
    return out


# ---------------------------------------------------------------------------
# modes

def run_spectrum(cfg: RunConfig, jobs: int = 1) -> int:
    cj = cfg.to_json()
    grid = cfg.scan.grid()
    res = _map([(cj, float(E), cfg.trajectory.tau) for E in grid], jobs)
    rows = [(float(E), float(p), float(e), m) for E, (p, e, m, _) in zip(grid, res)]
    failures = _failures([{"E": float(E)} for E in grid], res)
    _write(cfg, ("E", "p", "p_err", "method"), rows, failures)
    return EXIT_CONVERGENCE if failures else EXIT_OK


def run_compare_thermal(cfg: RunConfig, jobs: int = 1) -> int:
    """Accelerated rows, then thermal rows at ``beta = 2 pi / a``, on one grid."""
    cj = cfg.to_json()
    grid = cfg.scan.grid()
    tasks = [(cj, float(E), 0.0, "uniform") for E in grid] + [(cj, float(E), 0.0, "thermal") for E in grid]
    res = _map(tasks, jobs)
    energies = list(grid) * 2
    rows = [(float(E), float(p), float(e), m) for E, (p, e, m, _) in zip(energies, res)]
    failures = _failures([{"E": float(E), "kind": t[3]} for E, t in zip(energies, tasks)], res)
    _write(cfg, ("E", "p", "p_err", "method"), rows, failures)
    return EXIT_CONVERGENCE if failures else EXIT_OK


def run_trajectory_scan(cfg: RunConfig, jobs: int = 1) -> int:
    cj = cfg.to_json()
    grid = cfg.scan.grid()
    keys = [(float(tau), float(E)) for tau in cfg.trajectory.taus for E in grid]
    res = _map([(cj, E, tau) for tau, E in keys], jobs)
    rows = [(tau, E, float(p), float(e), m) for (tau, E), (p, e, m, _) in zip(keys, res)]
    failures = _failures([{"tau": tau, "E": E} for tau, E in keys], res)
    _write(cfg, ("tau", "E", "p", "p_err", "method"), rows, failures)
    return EXIT_CONVERGENCE if failures else EXIT_OK


def run_g2(cfg: RunConfig, jobs: int = 1) -> int:
    """g2 on the delay grid with the peak markers ``+-r`` (or 0) inserted."""
    from .coherence import coherence_curve
    det = detector_model(cfg)
    src = pair_source(cfg)
    markers = [-src.r, src.r] if src.r > 0 else [0.0]
    grid = np.unique(np.concatenate([cfg.scan.grid(), markers]))
    curve = coherence_curve(grid, src, det)
    rows = [(float(d), float(g), curve.regime, curve.source) for d, g in zip(curve.dtau, curve.g2)]
    _write(cfg, ("dtau", "g2", "regime", "source"), rows, [])
    return EXIT_OK


def run_validate(cfg: RunConfig, jobs: int = 1) -> int:
    from .validate import format_report, run_all
    results = run_all(cfg.tolerances)
    print(format_report(results), flush=True)
    if cfg.output.path:
        header = ("id", "name", "passed", "measured", "expected", "tolerance", "seconds", "detail")
        rows = [(r.id, r.name, str(r.passed).lower(), r.measured, r.expected, r.tolerance, r.seconds, r.detail)
                for r in results]
        _write(cfg, header, rows, [])
    return EXIT_OK if all(r.passed for r in results) else EXIT_VALIDATION


RUNNERS = {
    "spectrum": run_spectrum,
    "g2": run_g2,
    "compare-thermal": run_compare_thermal,
    "trajectory-scan": run_trajectory_scan,
    "validate": run_validate,
}


# ---------------------------------------------------------------------------
# entry point

def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="udw", description="Unruh-DeWitt detector spectra and coherence")
    p.add_argument("--config", help="JSON run configuration")
    p.add_argument("--mode", choices=MODES, help="override the configured mode")
    p.add_argument("--jobs", type=int, default=1, help="worker processes for sweeps (default 1)")
    p.add_argument("--output", help="output file (default stdout)")
    p.add_argument("--format", choices=("csv", "json"), help="output format")
    p.add_argument("--version", action="version", version=f"udw {__version__}")
    p.add_argument("-v", "--verbose", action="store_true")
    return p


def resolve_config(args) -> RunConfig:
    data = {}
    if args.config:
        data = read_json(args.config)
        if not isinstance(data, dict):
            raise ConfigError("$", "configuration must be a JSON object")
    elif args.mode != "validate":
        raise ConfigError("--config", "a configuration file is required for this mode")
    if args.mode:
        data["mode"] = args.mode
    out = dict(data.get("output") or {})
    if args.output:
        out["path"] = args.output
    if args.format:
        out["format"] = args.format
    data["output"] = out
    return from_dict(data)


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    if args.jobs < 1:
        print("error: --jobs: must be >= 1", file=sys.stderr)
        return EXIT_CONFIG
    try:
        cfg = resolve_config(args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    log.info("mode %s", cfg.mode)
    code = RUNNERS[cfg.mode](cfg, args.jobs)
    if code == EXIT_CONVERGENCE:
        print("warning: some grid points did not converge; see failures in the metadata", file=sys.stderr)
    return code


if __name__ == "__main__":
    sys.exit(main())
