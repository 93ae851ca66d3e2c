import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from udw.errors import ConvergenceError, DomainError, IllConditionedError, RegimeError
from udw.quadrature import (Pole, PoleSet, QuadratureSpec, integrate_line, integrate_windowed, residue,
                            residue_sum, eta_series_term, smearing_correction)
from udw.smearing import g_sigma


@given(st.floats(0.1, 30), st.floats(0, 1.5))
@settings(max_examples=30, deadline=None)
def test_windowed_gaussian_fourier_transform(sigma, Es):
    E = Es / sigma
    res = integrate_windowed(lambda y: g_sigma(y, sigma) * np.exp(-1j * E * y), sigma=sigma)
    exact = np.sqrt(8 * np.pi) * sigma * np.exp(-2 * sigma ** 2 * E ** 2)
    # the window cuts the Gaussian at exp(-18) of its peak
    assert res.value.real == pytest.approx(exact, rel=1e-7, abs=1e-7 * np.sqrt(8 * np.pi) * sigma)


def test_shifted_line_gives_same_integral():
    sigma, E = 2.0, 1.5
    f = lambda y: g_sigma(y, sigma) * np.exp(-1j * E * y)
    on_axis = integrate_windowed(f, QuadratureSpec(window_sigmas=16), sigma=sigma).value
    below = integrate_windowed(f, QuadratureSpec(window_sigmas=16), sigma=sigma, shift=4 * sigma ** 2 * E).value
    assert below == pytest.approx(on_axis, rel=1e-9, abs=1e-14)


def test_convergence_error_carries_estimates():
    spec = QuadratureSpec(panels=2, max_doublings=1, rel_tol=1e-14)
    with pytest.raises(ConvergenceError) as info:
        integrate_line(lambda y: np.exp(-1j * 40 * y), -1.0, 1.0, spec)
    assert info.value.last is not None and info.value.previous is not None


def test_nonfinite_integrand_rejected():
    with pytest.raises(DomainError):
        integrate_line(lambda y: np.where(y == 0, np.inf, y), -1.0, 1.0, QuadratureSpec(panels=2))


@pytest.mark.parametrize("kw", [dict(window_sigmas=6), dict(panels=1000), dict(rel_tol=0), dict(eps_scale=0)])
def test_spec_validation(kw):
    with pytest.raises(DomainError):
        QuadratureSpec(**kw)


def test_spec_epsilon_policy_and_env(monkeypatch):
    spec = QuadratureSpec()
    assert spec.epsilon(50.0, 1.0) == pytest.approx(1e-10)
    monkeypatch.setenv("UDW_EPS_SCALE", "1e-6")
    assert spec.epsilon(2.0) == pytest.approx(2e-6)


def test_spec_round_trip():
    spec = QuadratureSpec(window_sigmas=14, rel_tol=1e-9)
    assert QuadratureSpec(**spec.to_dict()) == spec
    assert spec.replace(panels=8).panels == 8


def test_residue_simple_and_double():
    assert residue(lambda z: 3 / (z - 1), 1.0, 0.5) == pytest.approx(3.0, rel=1e-14)
    assert residue(lambda z: np.exp(z) / (z - 1) ** 2, 1.0, 0.5) == pytest.approx(np.e, rel=1e-13)


@given(st.floats(0.1, 5))
def test_residue_sum_lorentzian(E):
    f = lambda y: np.exp(-1j * E * y) / (y * y + 1)
    val = residue_sum(f, [1j, -1j], "lower")
    assert val == pytest.approx(np.pi * np.exp(-E), rel=1e-12)


def test_residue_sum_refuses_poles_on_axis():
    with pytest.raises(IllConditionedError):
        residue_sum(lambda y: 1 / (y - 1e-12j), [1e-12j], "lower", eps=1e-10)


def test_poleset_sorted_and_split():
    ps = PoleSet([2j, -1j, Pole(-3j, 2)])
    assert [p.location for p in ps] == [-3j, -1j, 2j]
    assert len(ps.lower()) == 2 and len(ps.upper()) == 1
    with pytest.raises(DomainError):
        PoleSet([Pole(1j, 0)])


def test_eta_series_term_frozen():
    # (1/25) [(pi^2/4)(e^x+1)/(e^x-1)^2 - pi/(4 (1 - e^x))] at x = 2 pi
    assert eta_series_term(1.0, 1.0, 5.0) == pytest.approx(2.4412219962620521e-4, rel=1e-13)


def test_series_regime_checks():
    with pytest.raises(RegimeError):
        eta_series_term(1.0, 1.0, 0.5)
    with pytest.raises(DomainError):
        eta_series_term(0.01, 1.0, 5.0)
    with pytest.raises(DomainError):
        smearing_correction(-1.0, 1.0, 5.0)


@pytest.mark.parametrize("E", [0.5, 1.0, 2.0])
def test_smearing_correction_is_curvature_of_planck(E):
    a, sigma, h = 1.0, 5.0, 1e-3
    P = lambda e: e / (2 * np.pi * np.expm1(2 * np.pi * e / a))
    second = (P(E + h) - 2 * P(E) + P(E - h)) / h ** 2
    assert smearing_correction(E, a, sigma) == pytest.approx(second / (8 * sigma ** 2 * P(E)), rel=1e-5)
