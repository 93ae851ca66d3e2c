import json

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from udw.errors import DegeneratePoleError, DomainError, RegimeError
from udw.quadrature import QuadratureSpec
from udw.response import (CallableAlpha, Constant, DetectorModel, Spectrum, Tabulated, TwoLevel,
                          adiabatic_response, intensity, light_cone_term, planck_response,
                          planck_with_correction, response_general, single_axis_quadrature,
                          single_axis_response, stationary_response, thermal_static_response,
                          two_pole_closed_form, unruh_temperature)
from udw.propagators import TwoPointKernel
from udw.worldlines import SingleAxis, Static, UniformAcceleration

# frozen oracles (independent high-precision evaluation)
PLANCK_E1_A1 = 2.97768807888379035e-4          # 1 / (2 pi (e^{2 pi} - 1))
LIGHT_CONE_S1_E05 = 0.006630034490028846       # contour integral of g e^{-iEy} (-1/(4 pi^2 y^2))
LIGHT_CONE_S1_E1 = 0.0006756686458958639
DET50 = DetectorModel(50.0)


def test_planck_frozen():
    assert planck_response(1.0, 1.0, DET50) == pytest.approx(PLANCK_E1_A1, rel=1e-14)
    assert unruh_temperature(2 * np.pi) == pytest.approx(1.0)


def test_light_cone_term_oracle():
    assert light_cone_term(0.5, 1.0) == pytest.approx(LIGHT_CONE_S1_E05, rel=1e-12)
    assert light_cone_term(1.0, 1.0) == pytest.approx(LIGHT_CONE_S1_E1, rel=1e-12)


@pytest.mark.parametrize("E", [0.5, 1.0, 2.0, 3.0])
def test_uniform_acceleration_is_planckian(E):
    p = response_general(UniformAcceleration(1.0), E, 0.0, DET50).value
    assert p == pytest.approx(float(planck_response(E, 1.0, DET50)), rel=1e-2)


def test_response_independent_of_tau_for_uniform_motion():
    w = UniformAcceleration(1.0)
    assert response_general(w, 1.0, 7.0, DET50).value == pytest.approx(
        response_general(w, 1.0, 0.0, DET50).value, rel=1e-10)


@pytest.mark.parametrize("E", [0.5, 1.0])
def test_window_robustness(E):
    w = UniformAcceleration(1.0)
    p12 = response_general(w, E, 0.0, DET50, QuadratureSpec(window_sigmas=12)).value
    p16 = response_general(w, E, 0.0, DET50, QuadratureSpec(window_sigmas=16)).value
    assert p12 == pytest.approx(p16, rel=1e-8)


@given(st.floats(4.0, 20.0))
@settings(max_examples=10, deadline=None)
def test_static_detector_silent_when_resolved(sigmaE):
    sigma = 2.0
    p = response_general(Static(), sigmaE / sigma, 0.0, DetectorModel(sigma)).value
    assert abs(p) < 1e-13


def test_static_detector_leaks_below_resolution():
    # an unresolved inertial detector still clicks: the light-cone term survives
    p = response_general(Static(), 0.5, 0.0, DetectorModel(1.0)).value
    assert p == pytest.approx(LIGHT_CONE_S1_E05, rel=1e-12)


@pytest.mark.parametrize("E", [0.5, 2.0])
def test_thermal_static_equals_accelerated(E):
    th = thermal_static_response(E, 2 * np.pi, DET50).value
    acc = response_general(UniformAcceleration(1.0), E, 0.0, DET50).value
    assert th == pytest.approx(acc, rel=1e-6)


def test_stationary_accelerated_kernel_matches_worldline():
    k = TwoPointKernel("accelerated", 1e-12, a=1.0)
    assert stationary_response(k, 1.0, DET50).value == pytest.approx(
        response_general(UniformAcceleration(1.0), 1.0, 0.0, DET50).value, rel=1e-8)


def test_regulator_halving_robust(monkeypatch):
    base = thermal_static_response(1.0, 2 * np.pi, DET50).value
    monkeypatch.setenv("UDW_EPS_SCALE", "5e-11")
    assert thermal_static_response(1.0, 2 * np.pi, DET50).value == pytest.approx(base, rel=1e-9)


def test_energy_must_be_positive():
    with pytest.raises(DomainError):
        response_general(UniformAcceleration(1.0), 0.0, 0.0, DET50)


def test_two_level_regime_checks():
    DetectorModel(100.0, TwoLevel(10.0, 1.0))
    with pytest.raises(RegimeError):
        DetectorModel(5.0, TwoLevel(10.0, 1.0))
    with pytest.raises(RegimeError):
        DetectorModel(100.0, TwoLevel(5.0, 1.0))


def test_coupling_spectra():
    tl = TwoLevel(10.0, 1.0, 2.0)
    assert tl(10.4) == 2.0 and tl(10.6) == 0.0
    tab = Tabulated((1.0, 2.0, 3.0), (0.0, 1.0, 0.0))
    assert tab(1.5) == pytest.approx(0.5) and tab(4.0) == 0.0
    with pytest.raises(DomainError):
        Tabulated((1.0, 1.0), (0.0, 1.0))
    ca = CallableAlpha(lambda E: E ** 2, (0.0, 5.0))
    assert ca(2.0) == 4.0
    assert DetectorModel(50.0, Constant(3.0)).coupling(1.0) == 3.0


def test_planck_with_correction_regime():
    assert planck_with_correction(1.0, 1.0, DetectorModel(5.0)) > float(planck_response(1.0, 1.0, DetectorModel(5.0)))
    with pytest.raises(RegimeError):
        planck_with_correction(1.0, 1.0, DetectorModel(2.0))


def test_adiabatic_response():
    det = DetectorModel(30.0)
    assert adiabatic_response(1.0, 0.0, lambda t: 1.0 + 0.0 * t, det) == pytest.approx(
        float(planck_response(1.0, 1.0, det)))
    with pytest.raises(RegimeError):
        adiabatic_response(1.0, 0.0, lambda t: 1.0 + 0.1 * t, det)


def test_spectrum_serialization():
    s = Spectrum([0.5, 1.0], [1 / 3, 0.25], [1e-12, 2e-12], tau=0.0, method="quadrature")
    lines = s.to_csv().splitlines()
    assert lines[0] == "E,p,p_err,method"
    assert lines[1] == "0.5,0.33333333333333331,9.9999999999999998e-13,quadrature"
    assert json.loads(s.to_json())["data"][1]["p"] == 0.25


def test_intensity_of_planck_spectrum():
    # int_0^inf E P(E) dE = zeta(3) / (8 pi^4) at a = 1
    E = np.linspace(1e-6, 12.0, 4001)
    s = Spectrum(E, planck_response(E, 1.0, DET50), np.zeros_like(E))
    with pytest.warns(RuntimeWarning):
        val = intensity(s)
    assert val == pytest.approx(1.2020569031595942 / (8 * np.pi ** 4), rel=1e-8)


# --- single-axis residue method -------------------------------------------------

UD, U3, VD, V3, E_CUBIC = 1.3, 0.4, 1 / 1.3, 1.1, 0.8


def _cubic(c1, c3):
    def d(t, n):
        return {1: c1 + c3 * t * t / 2, 2: c3 * t, 3: c3 + 0.0 * t}.get(n, 0.0 * t)
    return (lambda t: c1 * t + c3 * t ** 3 / 6), d


def _axis(s3u, s3v):
    u, ud = _cubic(UD, s3u)
    v, vd = _cubic(VD, s3v)
    return SingleAxis(u, v, ud, vd)


def test_two_pole_closed_form_matches_quadrature():
    w = _axis(U3, V3)
    q = single_axis_quadrature(w, E_CUBIC, 0.0).value.real
    assert two_pole_closed_form(UD, U3, VD, V3, E_CUBIC) == pytest.approx(q, rel=1e-9)
    assert single_axis_response(w, E_CUBIC, 0.0, DetectorModel(1.0), check_regime=False) == pytest.approx(q, rel=1e-9)


def test_vanishing_case_all_real_poles():
    w = _axis(-U3, -V3)
    assert single_axis_response(w, E_CUBIC, 0.0, DetectorModel(1.0), check_regime=False) == 0.0
    assert abs(single_axis_quadrature(w, E_CUBIC, 0.0).value.real) < 1e-12


def test_coincident_poles():
    with pytest.raises(DegeneratePoleError):
        two_pole_closed_form(1.0, 0.5, 1.0, 0.5, 1.0)
    # the residue path merges them into one double pole
    u, ud = _cubic(1.0, 0.5)
    w = SingleAxis(u, u, ud, ud)
    res = single_axis_response(w, 1.0, 0.0, DetectorModel(1.0), check_regime=False)
    q = single_axis_quadrature(w, 1.0, 0.0).value.real
    assert res == pytest.approx(q, rel=1e-8)


def test_exponential_light_cone_coordinates_converge_to_planck():
    a = 1.0
    w = SingleAxis(lambda t: np.exp(a * t) / a, lambda t: -np.exp(-a * t) / a,
                   lambda t, n: a ** (n - 1) * np.exp(a * t), lambda t, n: (-a) ** (n - 1) * np.exp(-a * t))
    det = DetectorModel(1.0)
    pl = float(planck_response(1.0, a, det))
    p5 = single_axis_response(w, 1.0, 0.0, det, (5, 5))
    assert p5 == pytest.approx(pl, rel=1e-4)


def test_truncation_regime_check():
    a = 1.0
    w = SingleAxis(lambda t: np.exp(a * t) / a, lambda t: -np.exp(-a * t) / a,
                   lambda t, n: a ** (n - 1) * np.exp(a * t), lambda t, n: (-a) ** (n - 1) * np.exp(-a * t))
    with pytest.raises(RegimeError):
        single_axis_response(w, 1.0, 0.0, DetectorModel(20.0), (1, 1))
