import json

import numpy as np
import pytest

from udw import __version__
from udw.cli import main
from udw.config import ConfigError, RunConfig, from_dict
from udw.response import DetectorModel, planck_response


def _write(tmp_path, name, data):
    p = tmp_path / name
    p.write_text(json.dumps(data))
    return str(p)


def _csv(path):
    lines = open(path).read().splitlines()
    return lines[0].split(","), [l.split(",") for l in lines[1:]]


UNIFORM = {"mode": "spectrum", "trajectory": {"kind": "uniform", "a": 1.0}, "detector": {"sigma": 50.0},
           "scan": {"min": 0.5, "max": 3.0, "points": 64}}


def test_spectrum_matches_planck(tmp_path):
    out = str(tmp_path / "s.csv")
    assert main(["--config", _write(tmp_path, "c.json", UNIFORM), "--output", out]) == 0
    header, rows = _csv(out)
    assert header == ["E", "p", "p_err", "method"]
    assert len(rows) == 64
    det = DetectorModel(50.0)
    for E, p, _, m in rows:
        assert float(p) == pytest.approx(float(planck_response(float(E), 1.0, det)), rel=1e-2)
        assert m == "quadrature"


def test_static_spectrum_is_zero(tmp_path):
    cfg = dict(UNIFORM, trajectory={"kind": "static"}, scan={"min": 0.5, "max": 3.0, "points": 8})
    out = str(tmp_path / "s.csv")
    assert main(["--config", _write(tmp_path, "c.json", cfg), "--output", out]) == 0
    _, rows = _csv(out)
    assert all(abs(float(r[1])) < 1e-15 for r in rows)


def test_compare_thermal(tmp_path):
    cfg = dict(UNIFORM, scan={"min": 0.5, "max": 3.0, "points": 6})
    out = str(tmp_path / "t.csv")
    assert main(["--config", _write(tmp_path, "c.json", cfg), "--mode", "compare-thermal", "--output", out]) == 0
    _, rows = _csv(out)
    acc, th = rows[:6], rows[6:]
    assert [r[0] for r in acc] == [r[0] for r in th]
    assert {r[3] for r in acc} == {"accelerated"} and {r[3] for r in th} == {"thermal"}
    for x, y in zip(acc, th):
        assert float(y[1]) == pytest.approx(float(x[1]), rel=1e-3)


def test_determinism_and_jobs(tmp_path):
    cfg = _write(tmp_path, "c.json", dict(UNIFORM, scan={"min": 0.5, "max": 3.0, "points": 8}))
    outs = []
    for k, jobs in enumerate(["1", "1", "2"]):
        out = str(tmp_path / f"o{k}.csv")
        assert main(["--config", cfg, "--jobs", jobs, "--output", out]) == 0
        outs.append(open(out, "rb").read())
    assert outs[0] == outs[1] == outs[2]


def test_config_echo_round_trip(tmp_path):
    out = str(tmp_path / "s.json")
    cfg = dict(UNIFORM, scan={"min": 1.0, "max": 2.0, "points": 2}, quadrature={"rel_tol": 1e-9})
    assert main(["--config", _write(tmp_path, "c.json", cfg), "--output", out, "--format", "json"]) == 0
    doc = json.loads(open(out).read())
    assert doc["version"] == __version__
    echoed = from_dict(doc["config"])
    assert echoed == from_dict(dict(cfg, output={"path": out, "format": "json"}))
    assert from_dict(echoed.to_dict()) == echoed
    sidecar_out = str(tmp_path / "s.csv")
    main(["--config", _write(tmp_path, "c.json", cfg), "--output", sidecar_out])
    meta = json.loads(open(sidecar_out + ".meta.json").read())
    assert from_dict(meta["config"]).quadrature.rel_tol == 1e-9


def test_trajectory_scan_columns(tmp_path):
    cfg = {"mode": "trajectory-scan", "trajectory": {"kind": "tanh", "a": 1.0, "a2": 1.2, "width": 50.0,
                                                     "taus": [-10.0, 10.0]},
           "detector": {"sigma": 20.0}, "scan": {"min": 1.0, "max": 2.0, "points": 2}}
    out = str(tmp_path / "ts.csv")
    assert main(["--config", _write(tmp_path, "c.json", cfg), "--output", out]) == 0
    header, rows = _csv(out)
    assert header == ["tau", "E", "p", "p_err", "method"]
    assert [(r[0], r[1]) for r in rows] == [("-10", "1"), ("-10", "2"), ("10", "1"), ("10", "2")]


def test_g2_two_level_minimum(tmp_path):
    cfg = {"mode": "g2", "detector": {"sigma": 100.0, "alpha": {"kind": "two_level", "E0": 10.0, "delta_E": 1.0}},
           "source": {"kind": "accelerated", "a": 1.0, "r": 0.0}, "scan": {"min": -300.0, "max": 300.0, "points": 4}}
    out = str(tmp_path / "g.csv")
    assert main(["--config", _write(tmp_path, "c.json", cfg), "--output", out]) == 0
    header, rows = _csv(out)
    assert header == ["dtau", "g2", "regime", "source"]
    g = {float(r[0]): float(r[1]) for r in rows}
    assert min(g, key=g.get) == 0.0
    assert g[0.0] == pytest.approx(0.974934, abs=1e-6)


def test_g2_far_markers(tmp_path):
    cfg = {"mode": "g2", "detector": {"sigma": 0.5}, "source": {"kind": "accelerated", "a": 1.0, "r": 5.0},
           "scan": {"min": -8.0, "max": 8.0, "points": 3}}
    out = str(tmp_path / "g.csv")
    assert main(["--config", _write(tmp_path, "c.json", cfg), "--output", out]) == 0
    _, rows = _csv(out)
    g = {float(r[0]): float(r[1]) for r in rows}
    assert -5.0 in g and 5.0 in g
    assert g[5.0] < 1 and g[-5.0] < 1 and g[0.0] == pytest.approx(1.0, abs=1e-12)


def test_g2_from_proper_distance():
    cfg = from_dict({"mode": "g2", "detector": {"sigma": 0.1}, "source": {"kind": "accelerated", "a": 1.0, "d": 2.0}})
    from udw.config import pair_source
    assert pair_source(cfg).r == pytest.approx(2 * np.arcsinh(1.0))


@pytest.mark.parametrize("patch, path", [
    ({"scan": {"min": 0.5, "max": 3.0, "points": 1}}, "scan.points"),
    ({"scan": {"min": 3.0, "max": 0.5, "points": 4}}, "scan.max"),
    ({"detector": {"sigma": -1.0}}, "detector.sigma"),
    ({"trajectory": {"kind": "circle"}}, "trajectory.kind"),
    ({"trajectory": {"kind": "switch", "a": 1.0}}, "trajectory.a2"),
    ({"quadrature": {"window_sigmas": 4}}, "quadrature"),
    ({"output": {"format": "xml"}}, "output.format"),
    ({"detector": {"sigma": 5.0, "alpha": {"kind": "two_level", "E0": 10.0, "delta_E": 1.0}}}, "detector.alpha"),
    ({"scan": {"min": 0.5, "max": 3.0, "points": "many"}}, "scan.points"),
    ({"bogus": 1}, "bogus"),
])
def test_config_errors_name_the_field(patch, path, tmp_path, capsys):
    cfg = dict(UNIFORM, **patch)
    with pytest.raises(ConfigError) as info:
        from_dict(cfg)
    assert info.value.path == path
    assert main(["--config", _write(tmp_path, "c.json", cfg)]) == 2
    assert path in capsys.readouterr().err


def test_g2_regime_gap_is_config_error():
    with pytest.raises(ConfigError, match="source.r"):
        from_dict({"mode": "g2", "detector": {"sigma": 1.0}, "source": {"a": 1.0, "r": 1.0}})


def test_missing_or_broken_config(tmp_path):
    assert main(["--config", str(tmp_path / "none.json")]) == 2
    bad = tmp_path / "bad.json"
    bad.write_text("{not json")
    assert main(["--config", str(bad)]) == 2
    assert main([]) == 2


def test_nonconvergence_exit_code(tmp_path):
    cfg = {"mode": "spectrum", "trajectory": {"kind": "switch", "a": 1.0, "a2": 2.0, "tau": 0.0},
           "detector": {"sigma": 30.0}, "scan": {"min": 1.0, "max": 2.0, "points": 2},
           "quadrature": {"max_doublings": 0, "rel_tol": 1e-14, "panels": 64}}
    out = str(tmp_path / "n.csv")
    assert main(["--config", _write(tmp_path, "c.json", cfg), "--output", out]) == 3
    _, rows = _csv(out)
    assert len(rows) == 2 and all(r[3] == "failed" for r in rows)
    meta = json.loads(open(out + ".meta.json").read())
    assert len(meta["failures"]) == 2


def test_validate_corrupted_tolerance_fails(tmp_path, capsys):
    # criterion 5 is met to ~1e-16; a zero tolerance must still fail it
    cfg = _write(tmp_path, "v.json", {"mode": "validate", "tolerances": {"5": 0.0}})
    code = main(["--config", cfg])
    assert code == 1
    assert "FAIL [ 5]" in capsys.readouterr().out


def test_default_round_trip():
    cfg = RunConfig()
    assert from_dict(cfg.to_dict()) == cfg
